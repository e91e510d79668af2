"""Relativistic Maxwell-Bloch simulator for superradiance and maser emission."""
from .config import FIGURES, PRESETS, ScenarioConfig, load_config, parse_config, preset_config
from .errors import ConfigError, DomainError, NumericalError, OutputError, RelMBEError
from .params import CONST, OH1612, SampleSpec, TimescaleSpec, TransitionSpec
from .solver import MBESystem, SimulationResult, VelocityChannel, run, run_system

__version__ = "0.1.0"
