"""Scenario configuration: strict TOML schema, figure presets, round-trip.

A scenario file looks like::

    schema_version = 1
    name = "fig1-beta05"
    boundary_intensity = 0.0      # W/m^2 at z = 0, observer frame

    [transition]
    preset = "oh1612"             # or lambda_rest (m) + gamma_sp_rest (1/s)

    [sample]
    length_rest = 4.2e13          # m
    inversion_density_rest = 2e4  # 1/m^3; single resonant channel

    [timescales]
    t1_rest = 0.1                 # s
    t2_rest = 1.2e-3              # s

    [frame]
    beta = 0.5

    [grid]
    n_z = 400
    tau_max_rest = 0.2            # s, rest-frame duration

A file may also start from a built-in scenario with ``preset = "fig1-beta0"``
and override individual keys.  See ``docs/config.md`` for every key.
"""
from __future__ import annotations

import copy
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from . import relativity
from .errors import ConfigError, DomainError
from .params import TRANSITION_PRESETS, TransitionSpec, superradiance_time_rest
from .solver import STEPS_PER_TIMESCALE, MBESystem, VelocityChannel, constant_boundary

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "RELMBE_OUTPUT_DIR"
PLOT_STYLES = ("linear", "log")
DETUNING_MODELS = ("doppler", "literal")
PUMP_PHASES = ("corotating", "fixed")


@dataclass(frozen=True)
class ChannelConfig:
    k: int
    inversion_density_rest: float


@dataclass(frozen=True)
class GridConfig:
    n_z: int
    n_tau: int
    tau_max_rest: float


@dataclass(frozen=True)
class PumpConfig:
    inversion_rate: float | None = None
    polarization_rate: float | None = None
    polarization_phase: str = "corotating"


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    stem: str = ""
    snapshot_times: tuple[float, ...] = ()
    plot_style: str = "linear"
    log_floor: float = 1e-30


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    transition_preset: str | None
    transition: TransitionSpec
    length_rest: float
    t1_rest: float
    t2_rest: float
    beta: float
    grid: GridConfig
    channels: tuple[ChannelConfig, ...]
    pumps: PumpConfig = PumpConfig()
    boundary_intensity: float = 0.0
    tipping_angle: float | None = None
    detuning_model: str = "doppler"
    outputs: OutputConfig = OutputConfig()

    @property
    def total_density_rest(self) -> float:
        return math.fsum(ch.inversion_density_rest for ch in self.channels)

    @property
    def dv_fundamental_rest(self) -> float:
        """Fundamental channel step lambda' / tau_max' (m/s)."""
        return self.transition.lambda_rest / self.grid.tau_max_rest

    def velocity_channels(self) -> tuple[VelocityChannel, ...]:
        dv = self.dv_fundamental_rest
        return tuple(VelocityChannel(ch.k * dv, ch.inversion_density_rest) for ch in self.channels)

    def system(self) -> MBESystem:
        return MBESystem(
            transition=self.transition,
            length_rest=self.length_rest,
            t1_rest=self.t1_rest,
            t2_rest=self.t2_rest,
            beta=self.beta,
            channels=self.velocity_channels(),
            n_z=self.grid.n_z,
            n_tau=self.grid.n_tau,
            tau_max_rest=self.grid.tau_max_rest,
            inversion_rate=self.pumps.inversion_rate,
            polarization_rate=self.pumps.polarization_rate,
            theta0=self.tipping_angle,
            boundary=constant_boundary(self.boundary_intensity),
            detuning_model=self.detuning_model,
            pump_phase=self.pumps.polarization_phase,
        )

    def output_dir(self) -> Path:
        return Path(self.outputs.directory)

    def to_dict(self) -> dict:
        """Fully resolved document; parsing it back gives an equal config."""
        doc = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "boundary_intensity": self.boundary_intensity,
            "detuning_model": self.detuning_model,
            "transition": {"lambda_rest": self.transition.lambda_rest,
                           "gamma_sp_rest": self.transition.gamma_sp_rest},
            "sample": {"length_rest": self.length_rest},
            "timescales": {"t1_rest": self.t1_rest, "t2_rest": self.t2_rest},
            "frame": {"beta": self.beta},
            "grid": asdict(self.grid),
            "channels": [asdict(ch) for ch in self.channels],
            "pumps": {k: v for k, v in asdict(self.pumps).items() if v is not None},
            "outputs": {**asdict(self.outputs), "snapshot_times": list(self.outputs.snapshot_times)},
        }
        if self.transition_preset is not None:
            doc["transition"]["preset"] = self.transition_preset
        if self.tipping_angle is not None:
            doc["sample"]["tipping_angle"] = self.tipping_angle
        return doc

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


# --- schema ------------------------------------------------------------------

_TOP_KEYS = {"schema_version", "name", "preset", "boundary_intensity", "detuning_model",
             "transition", "sample", "timescales", "frame", "grid", "channels", "pumps",
             "outputs"}
_SECTION_KEYS = {
    "transition": {"preset", "lambda_rest", "gamma_sp_rest"},
    "sample": {"length_rest", "inversion_density_rest", "tipping_angle"},
    "timescales": {"t1_rest", "t2_rest"},
    "frame": {"beta"},
    "grid": {"n_z", "n_tau", "tau_max_rest"},
    "pumps": {"inversion_rate", "polarization_rate", "polarization_phase"},
    "outputs": {"directory", "stem", "snapshot_times", "plot_style", "log_floor"},
}
_CHANNEL_KEYS = {"k", "inversion_density_rest"}


def _num(value, key, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", key=key)
    if positive and not value > 0:
        raise ConfigError(f"must be > 0, got {value!r}", key=key)
    if nonneg and value < 0:
        raise ConfigError(f"must be >= 0, got {value!r}", key=key)
    return value


def _int(value, key, *, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", key=key)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", key=key)
    return value


def _choice(value, key, choices):
    if value not in choices:
        raise ConfigError(f"must be one of {', '.join(choices)}; got {value!r}", key=key)
    return value


def _check_keys(section: dict, allowed: set, where: str):
    for key in section:
        if key not in allowed:
            dotted = f"{where}.{key}" if where else key
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})",
                              kind="unknown-key", key=dotted)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def auto_n_tau(tau_max_rest: float, tr_rest: float, t2_rest: float) -> int:
    """Smallest step count meeting the dtau <= min(T_R, T2)/50 rule.

    Computed from rest-frame ratios so that every frame gets the same count.
    """
    ratio = tau_max_rest / min(tr_rest, t2_rest) * STEPS_PER_TIMESCALE
    return int(math.ceil(ratio * (1.0 - 1e-12))) + 1


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a parsed document and resolve derived values."""
    if not isinstance(doc, dict):
        raise ConfigError("document must be a table", kind="syntax")
    _check_keys(doc, _TOP_KEYS, "")
    if "preset" in doc:
        preset_name = doc["preset"]
        if preset_name not in PRESETS:
            raise ConfigError(f"unknown preset {preset_name!r}", key="preset")
        over = {k: v for k, v in doc.items() if k != "preset"}
        # an override of the single-channel density replaces the preset's channels
        base = PRESETS[preset_name]
        if "inversion_density_rest" in over.get("sample", {}) and "channels" not in over:
            base = {k: v for k, v in base.items() if k != "channels"}
        doc = _merge(base, over)
        doc.setdefault("name", preset_name)

    for section, keys in _SECTION_KEYS.items():
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError("expected a table", key=section)
            _check_keys(doc[section], keys, section)
    if isinstance(doc.get("channels"), list):
        for i, ch in enumerate(doc["channels"]):
            if isinstance(ch, dict):
                _check_keys(ch, _CHANNEL_KEYS, f"channels[{i}]")

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}", key="schema_version")

    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ConfigError("must be a non-empty string", key="name")

    # transition
    tr_doc = doc.get("transition", {"preset": "oh1612"})
    preset = tr_doc.get("preset")
    if preset is not None:
        if preset not in TRANSITION_PRESETS:
            raise ConfigError(f"unknown transition preset {preset!r}", key="transition.preset")
        base_tr = TRANSITION_PRESETS[preset]
        lam = _num(tr_doc.get("lambda_rest", base_tr.lambda_rest), "transition.lambda_rest", positive=True)
        gam = _num(tr_doc.get("gamma_sp_rest", base_tr.gamma_sp_rest), "transition.gamma_sp_rest",
                   positive=True)
        if (lam, gam) != (base_tr.lambda_rest, base_tr.gamma_sp_rest):
            preset = None
    else:
        for key in ("lambda_rest", "gamma_sp_rest"):
            if key not in tr_doc:
                raise ConfigError("required when no transition preset is given", key=f"transition.{key}")
        lam = _num(tr_doc["lambda_rest"], "transition.lambda_rest", positive=True)
        gam = _num(tr_doc["gamma_sp_rest"], "transition.gamma_sp_rest", positive=True)
    transition = TransitionSpec(lam, gam)

    sample = doc.get("sample", {})
    if "length_rest" not in sample:
        raise ConfigError("required", key="sample.length_rest")
    length_rest = _num(sample["length_rest"], "sample.length_rest", positive=True)
    tipping = sample.get("tipping_angle")
    if tipping is not None:
        tipping = _num(tipping, "sample.tipping_angle", nonneg=True)
        if tipping >= math.pi:
            raise ConfigError("must be < pi", key="sample.tipping_angle")

    # channels: explicit list, or a single resonant channel from the sample density
    if "channels" in doc:
        if "inversion_density_rest" in sample:
            raise ConfigError("give either sample.inversion_density_rest or [[channels]], not both",
                              key="sample.inversion_density_rest")
        raw = doc["channels"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("must be a non-empty array of tables", key="channels")
        channels = []
        for i, ch in enumerate(raw):
            if not isinstance(ch, dict):
                raise ConfigError("expected a table", key=f"channels[{i}]")
            if "inversion_density_rest" not in ch:
                raise ConfigError("required", key=f"channels[{i}].inversion_density_rest")
            channels.append(ChannelConfig(
                _int(ch.get("k", 0), f"channels[{i}].k"),
                _num(ch["inversion_density_rest"], f"channels[{i}].inversion_density_rest", positive=True)))
        channels = tuple(channels)
    else:
        if "inversion_density_rest" not in sample:
            raise ConfigError("required unless [[channels]] is given", key="sample.inversion_density_rest")
        channels = (ChannelConfig(0, _num(sample["inversion_density_rest"],
                                          "sample.inversion_density_rest", positive=True)),)

    ts = doc.get("timescales", {})
    for key in ("t1_rest", "t2_rest"):
        if key not in ts:
            raise ConfigError("required", key=f"timescales.{key}")
    t1 = _num(ts["t1_rest"], "timescales.t1_rest", positive=True)
    t2 = _num(ts["t2_rest"], "timescales.t2_rest", positive=True)
    if t1 < t2:
        raise ConfigError(f"T1' >= T2' required, got T1'={t1}, T2'={t2}", key="timescales.t1_rest")

    beta = _num(doc.get("frame", {}).get("beta", 0.0), "frame.beta")
    if not abs(beta) < 1.0:
        raise ConfigError(f"|beta| < 1 required, got {beta}", key="frame.beta")

    grid_doc = doc.get("grid", {})
    for key in ("n_z", "tau_max_rest"):
        if key not in grid_doc:
            raise ConfigError("required", key=f"grid.{key}")
    n_z = _int(grid_doc["n_z"], "grid.n_z", minimum=2)
    tau_max_rest = _num(grid_doc["tau_max_rest"], "grid.tau_max_rest", positive=True)
    total = math.fsum(ch.inversion_density_rest for ch in channels)
    tr_rest = superradiance_time_rest(lam, total, length_rest, gam)
    if "n_tau" in grid_doc:
        n_tau = _int(grid_doc["n_tau"], "grid.n_tau", minimum=2)
    else:
        n_tau = auto_n_tau(tau_max_rest, tr_rest, t2)
    grid = GridConfig(n_z, n_tau, tau_max_rest)

    pumps_doc = doc.get("pumps", {})
    pumps = PumpConfig(
        inversion_rate=(None if pumps_doc.get("inversion_rate") is None
                        else _num(pumps_doc["inversion_rate"], "pumps.inversion_rate", nonneg=True)),
        polarization_rate=(None if pumps_doc.get("polarization_rate") is None
                           else _num(pumps_doc["polarization_rate"], "pumps.polarization_rate", nonneg=True)),
        polarization_phase=_choice(pumps_doc.get("polarization_phase", "corotating"),
                                   "pumps.polarization_phase", PUMP_PHASES),
    )

    boundary = _num(doc.get("boundary_intensity", 0.0), "boundary_intensity", nonneg=True)
    detuning = _choice(doc.get("detuning_model", "doppler"), "detuning_model", DETUNING_MODELS)

    out_doc = doc.get("outputs", {})
    snaps = out_doc.get("snapshot_times", [])
    if not isinstance(snaps, list):
        raise ConfigError("must be an array of times (s)", key="outputs.snapshot_times")
    tau_max = tau_max_rest * relativity.time_factor(beta)
    snaps = tuple(_num(t, "outputs.snapshot_times", nonneg=True) for t in snaps)
    for t in snaps:
        if t > tau_max * (1 + 1e-12):
            raise ConfigError(f"snapshot time {t} s beyond observer tau_max {tau_max:.6g} s",
                              key="outputs.snapshot_times")
    default_dir = os.environ.get(OUTPUT_DIR_ENV, "out")
    directory = out_doc.get("directory", default_dir)
    if not isinstance(directory, str) or not directory:
        raise ConfigError("must be a non-empty string", key="outputs.directory")
    stem = out_doc.get("stem", "") or name
    if not isinstance(stem, str):
        raise ConfigError("must be a string", key="outputs.stem")
    outputs = OutputConfig(
        directory=directory,
        stem=stem,
        snapshot_times=snaps,
        plot_style=_choice(out_doc.get("plot_style", "linear"), "outputs.plot_style", PLOT_STYLES),
        log_floor=_num(out_doc.get("log_floor", 1e-30), "outputs.log_floor", positive=True),
    )

    cfg = ScenarioConfig(
        name=name,
        transition_preset=preset,
        transition=transition,
        length_rest=length_rest,
        t1_rest=t1,
        t2_rest=t2,
        beta=beta,
        grid=grid,
        channels=channels,
        pumps=pumps,
        boundary_intensity=boundary,
        tipping_angle=tipping,
        detuning_model=detuning,
        outputs=outputs,
    )
    # channel offsets must stay inside the linearised velocity transform
    try:
        cfg.system().detunings()
    except DomainError as exc:
        raise ConfigError(str(exc), key="channels") from exc
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    """Parse a TOML scenario document (or a bare preset name)."""
    stripped = text.strip()
    if stripped in PRESETS:
        return config_from_dict({"preset": stripped})
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc), kind="syntax") from exc
    return config_from_dict(doc)


def load_config(source: str | os.PathLike) -> ScenarioConfig:
    """Load from a file path, or a preset name when no such file exists."""
    path = Path(source)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"))
    name = str(source)
    if name.endswith(".toml") and name[:-5] in PRESETS:
        name = name[:-5]
    if name in PRESETS:
        return config_from_dict({"preset": name})
    raise ConfigError(f"no such config file or preset: {source}", kind="syntax")


# --- figure presets ------------------------------------------------------------

_OH_BASE = {
    "transition": {"preset": "oh1612"},
    "sample": {"length_rest": 4.2e13},
    "timescales": {"t1_rest": 0.1, "t2_rest": 1.2e-3},
    "frame": {"beta": 0.0},
}

_BETAS = {"beta0": 0.0, "beta05": 0.5, "betam05": -0.5}


def _preset(beta, *, density=None, channels=None, tau_max_rest, n_z=400, style="linear"):
    doc = _merge(_OH_BASE, {"frame": {"beta": beta},
                            "grid": {"n_z": n_z, "tau_max_rest": tau_max_rest},
                            "outputs": {"plot_style": style}})
    if channels is not None:
        doc["channels"] = [{"k": k, "inversion_density_rest": d} for k, d in channels]
    else:
        doc["sample"]["inversion_density_rest"] = density
    return doc


def _build_presets():
    presets = {}
    figures = {}
    for tag, beta in _BETAS.items():
        presets[f"fig1-{tag}"] = _preset(beta, density=2e4, tau_max_rest=0.2)
        presets[f"fig2-{tag}"] = _preset(beta, density=6e3, tau_max_rest=0.2, style="log")
        presets[f"fig4-{tag}"] = _preset(beta, channels=[(-20, 6e3), (20, 6e3)], tau_max_rest=0.1,
                                         style="log")
        presets[f"fig5-{tag}"] = _preset(beta, channels=[(-20, 1.2e4), (20, 1.2e4)], tau_max_rest=0.1,
                                         style="log")
    presets["fig3-single"] = _preset(0.0, density=6e3, tau_max_rest=0.1, style="log")
    presets["fig3-merged"] = _preset(0.0, channels=[(0, 6e3), (0, 6e3)], tau_max_rest=0.1, style="log")
    presets["fig3-split"] = _preset(0.0, channels=[(-20, 6e3), (20, 6e3)], tau_max_rest=0.1, style="log")
    for fig in ("fig1", "fig2", "fig4", "fig5"):
        figures[fig] = [f"{fig}-{tag}" for tag in _BETAS]
    figures["fig3"] = ["fig3-single", "fig3-merged", "fig3-split"]
    for name in presets:
        presets[name]["name"] = name
    return presets, dict(sorted(figures.items()))


PRESETS, FIGURES = _build_presets()


def preset_config(name: str, **grid_overrides) -> ScenarioConfig:
    """Built-in scenario, optionally with grid keys (n_z, n_tau, tau_max_rest) replaced."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}", key="preset")
    doc = {"preset": name}
    if grid_overrides:
        doc["grid"] = dict(grid_overrides)
    return config_from_dict(doc)
