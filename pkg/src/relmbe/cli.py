"""Command-line interface: ``relmbe run | preset | analytic | check``.

Exit status: 0 success, 1 failed checks, 2 usage error, 3 config error,
4 domain error, 5 numerical error, 6 I/O error.  Failures print a single
``error: <category>: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import relativity, steady_state
from .config import FIGURES, OUTPUT_DIR_ENV, PRESETS, load_config, preset_config
from .errors import RelMBEError
from .params import (TRANSITION_PRESETS, TransitionSpec, derive_dipole, gain_coefficient_rest,
                     particle_number, saturation_intensity, superradiance_time_rest, tipping_angle)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CODES = {"config": 3, "domain": 4, "numerical": 5, "io": 6}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _transition(args) -> TransitionSpec:
    if args.lambda_rest is not None or args.gamma_sp is not None:
        base = TRANSITION_PRESETS[args.preset]
        return TransitionSpec(args.lambda_rest or base.lambda_rest, args.gamma_sp or base.gamma_sp_rest)
    return TRANSITION_PRESETS[args.preset]


def _print(name, value, unit=""):
    print(f"{name} = {value:.10g}{(' ' + unit) if unit else ''}")


# --- analytic -----------------------------------------------------------------

def _an_dipole(a):
    t = _transition(a)
    _print("omega0_rest", t.omega0_rest, "rad/s")
    _print("dipole_rest", derive_dipole(t.gamma_sp_rest, t.omega0_rest), "C m")


def _an_tr(a):
    t = _transition(a)
    relativity.lorentz_gamma(a.beta)
    tr = superradiance_time_rest(t.lambda_rest, a.ntot, a.length, t.gamma_sp_rest)
    _print("T_R'", tr, "s")
    if a.beta:
        _print("T_R", relativity.timescale_to_observer(tr, a.beta), "s")


def _an_n(a):
    _print("N", particle_number(a.ntot, _transition(a).lambda_rest, a.length))


def _an_theta0(a):
    n = particle_number(a.ntot, _transition(a).lambda_rest, a.length)
    _print("N", n)
    _print("theta0", tipping_angle(n), "rad")


def _an_isat(a):
    t = _transition(a)
    t1 = relativity.timescale_to_observer(a.t1, a.beta)
    t2 = relativity.timescale_to_observer(a.t2, a.beta)
    _print("I_sat'", saturation_intensity(t.dipole_rest, a.t1, a.t2), "W/m^2")
    _print("I_sat", saturation_intensity(t.dipole_rest, t1, t2), "W/m^2")


def _an_gain(a):
    t = _transition(a)
    tr = superradiance_time_rest(t.lambda_rest, a.ntot, a.length, t.gamma_sp_rest)
    alpha_rest = gain_coefficient_rest(a.t2, a.length, tr)
    _print("alpha'", alpha_rest, "1/m")
    _print("alpha", relativity.lorentz_gamma(a.beta) * alpha_rest, "1/m")
    _print("alpha' L'", alpha_rest * a.length)


def _an_saturated(a):
    t = _transition(a)
    length = relativity.length_to_observer(a.length, a.beta)
    z = length if a.z is None else a.z
    _print("I(z)", steady_state.saturated_profile(z, omega0_rest=t.omega0_rest, inversion_density_rest=a.ntot,
                                                   t1_rest=a.t1, beta=a.beta, length_rest=a.length), "W/m^2")


def _an_unsaturated(a):
    point = steady_state.MaserOperatingPoint(a.i0, a.gain, math.inf, beta=a.beta)
    _print("I(z)", steady_state.unsaturated_profile(a.z, point), "W/m^2")


def _an_inversion(a):
    _print("n'", steady_state.steady_inversion(a.n0, a.ratio), "1/m^3")


def _an_bessel(a):
    _print("P/P0", steady_state.linear_regime_polarization(a.z, a.tau, 1.0, a.length, a.tr))


def _an_delay(a):
    _print("tau_D", steady_state.delay_time_estimate(a.tr, a.theta0), "s")


def _add_transition(p):
    p.add_argument("--preset", choices=sorted(TRANSITION_PRESETS), default="oh1612",
                   help="transition preset (default oh1612)")
    p.add_argument("--lambda", dest="lambda_rest", type=float, help="rest wavelength (m)")
    p.add_argument("--gamma-sp", dest="gamma_sp", type=float, help="spontaneous rate Gamma' (1/s)")


def _build_analytic(sub):
    an = sub.add_parser("analytic", help="evaluate closed-form results")
    asub = an.add_subparsers(dest="quantity", required=True, parser_class=_Parser)

    def add(name, func, help_, *, transition=False, sample=False, t1=False, t2=False, beta=False):
        p = asub.add_parser(name, help=help_)
        if transition:
            _add_transition(p)
        if sample:
            p.add_argument("--ntot", type=float, required=True, help="inversion density n_t' (1/m^3)")
            p.add_argument("--length", type=float, required=True, help="sample length L' (m)")
        if t1:
            p.add_argument("--t1", type=float, required=True, help="T1' (s)")
        if t2:
            p.add_argument("--t2", type=float, required=True, help="T2' (s)")
        if beta:
            p.add_argument("--beta", type=float, default=0.0, help="frame velocity v/c (default 0)")
        p.set_defaults(func=func)
        return p

    add("dipole", _an_dipole, "dipole moment from Gamma' (Einstein A)", transition=True)
    add("tr", _an_tr, "superradiance time T_R'", transition=True, sample=True, beta=True)
    add("n", _an_n, "particle number N", transition=True, sample=True)
    add("theta0", _an_theta0, "tipping angle 2/sqrt(N)", transition=True, sample=True)
    add("isat", _an_isat, "saturation intensity", transition=True, t1=True, t2=True, beta=True)
    add("gain", _an_gain, "unsaturated gain coefficient", transition=True, sample=True, t2=True, beta=True)
    p = add("saturated", _an_saturated, "saturated maser intensity (linear in z)", transition=True,
            sample=True, t1=True, beta=True)
    p.add_argument("--z", type=float, help="observer-frame position (m); default z = L")
    p = add("unsaturated", _an_unsaturated, "unsaturated maser intensity I0 exp(alpha z)", beta=True)
    p.add_argument("--i0", type=float, required=True, help="background intensity I0 (W/m^2)")
    p.add_argument("--gain", type=float, required=True, help="rest-frame gain alpha' (1/m)")
    p.add_argument("--z", type=float, required=True, help="observer-frame position (m)")
    p = add("inversion", _an_inversion, "steady inversion n0'/(1 + I/I_sat)")
    p.add_argument("--n0", type=float, required=True, help="unsaturated inversion (1/m^3)")
    p.add_argument("--ratio", type=float, required=True, help="I/I_sat")
    p = add("bessel", _an_bessel, "linear-regime growth P/P0 = I0(2 sqrt(tau z / L T_R))")
    for flag, h in (("--z", "position (m)"), ("--tau", "retarded time (s)"), ("--length", "length L (m)"),
                    ("--tr", "T_R (s)")):
        p.add_argument(flag, type=float, required=True, help=h)
    p = add("delay", _an_delay, "heuristic burst delay (T_R/4) ln^2(theta0/2pi)")
    p.add_argument("--tr", type=float, required=True, help="observer-frame T_R (s)")
    p.add_argument("--theta0", type=float, required=True, help="tipping angle (rad)")


# --- run / preset / check -------------------------------------------------------------

def _cmd_run(a):
    from .output import emit_plot, write_results
    from .solver import run

    sources = list(a.config or []) + list(a.preset or [])
    if not sources:
        raise UsageError("run needs --config or --preset")
    configs = []
    for src in sources:
        cfg = load_config(src)
        grid = {}
        if a.n_z is not None:
            grid["n_z"] = a.n_z
        if a.n_tau is not None:
            grid["n_tau"] = a.n_tau
        if grid:
            cfg = replace(cfg, grid=replace(cfg.grid, **grid))
        if a.output_dir is not None:
            cfg = replace(cfg, outputs=replace(cfg.outputs, directory=a.output_dir))
        configs.append(cfg)

    with ThreadPoolExecutor(max_workers=max(1, a.jobs)) as pool:
        results = list(pool.map(run, configs))

    for cfg, res in zip(configs, results):
        paths = write_results(res, cfg.output_dir(), cfg.outputs.stem, config=cfg)
        if not a.no_plot:
            paths["plot"] = emit_plot(res, cfg.output_dir() / f"{cfg.outputs.stem}.svg",
                                      style=a.style or cfg.outputs.plot_style, floor=cfg.outputs.log_floor)
        for p in paths.values():
            print(p)
    if len(results) > 1 and not a.no_plot:
        first = configs[0]
        stem = a.compare_stem or "compare_" + "_".join(c.outputs.stem for c in configs)
        path = emit_plot(results, first.output_dir() / f"{stem}.svg",
                         style=a.style or first.outputs.plot_style, floor=first.outputs.log_floor)
        print(path)
    return EXIT_OK


def _cmd_preset(a):
    if a.action == "list":
        for fig, members in FIGURES.items():
            print(f"{fig}: {' '.join(members)}")
        return EXIT_OK
    if not a.name:
        raise UsageError("preset emit needs a preset name")
    text = preset_config(a.name).to_toml()
    if a.output:
        try:
            Path(a.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            from .errors import OutputError
            raise OutputError(f"cannot write {a.output}: {exc.strerror or exc}") from exc
        print(a.output)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_check(a):
    from .checks import ALL_CHECKS

    ok = True
    for chk in ALL_CHECKS:
        r = chk()
        print(r.line(), flush=True)
        ok &= r.passed
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relmbe", description="Relativistic Maxwell-Bloch simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate one or more scenarios")
    r.add_argument("--config", action="append", help="scenario TOML file (repeatable)")
    r.add_argument("--preset", action="append", choices=sorted(PRESETS), metavar="NAME",
                   help="built-in scenario (repeatable; see 'preset list')")
    r.add_argument("--output-dir", help=f"output directory (default: config value, ${OUTPUT_DIR_ENV}, ./out)")
    r.add_argument("--n-z", type=int, help="override grid.n_z")
    r.add_argument("--n-tau", type=int, help="override grid.n_tau")
    r.add_argument("--style", choices=("linear", "log"), help="plot style override")
    r.add_argument("--no-plot", action="store_true", help="skip SVG output")
    r.add_argument("--jobs", type=int, default=1, help="runs to execute in parallel threads")
    r.add_argument("--compare-stem", help="file stem of the overlay plot when several runs are given")
    r.set_defaults(func=_cmd_run)

    p = sub.add_parser("preset", help="list or emit built-in figure scenarios")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?", help="preset to emit")
    p.add_argument("-o", "--output", help="write the TOML here instead of stdout")
    p.set_defaults(func=_cmd_preset)

    _build_analytic(sub)

    c = sub.add_parser("check", help="reduced-scale invariant and oracle checks")
    c.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        code = args.func(args)
        return EXIT_OK if code is None else code
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RelMBEError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {exc.category}: {msg}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)


if __name__ == "__main__":
    sys.exit(main())
