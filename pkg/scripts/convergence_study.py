"""Grid convergence of the Fig.-1 burst and of the Fig.-1/Fig.-2 late-time plateaus.

Compares the plateaus with the closed forms: the saturable-gain law for Fig. 1
and the seeded unsaturated amplifier for Fig. 2.
"""
import argparse

import numpy as np

from relmbe.config import preset_config
from relmbe.solver import run
from relmbe.steady_state import saturable_gain_profile, unsaturated_plateau, unsaturated_seed_intensity


def late_mean(res, frac=0.05):
    n = max(1, int(frac * res.tau.size))
    return res.intensity[-n:].mean()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-z", type=int, nargs="+", default=[100, 200, 400, 800])
    args = ap.parse_args()

    for name in ("fig1-beta0", "fig2-beta0"):
        m = preset_config(name).system().metadata()
        seed = unsaturated_seed_intensity(m["dipole_rest_C_m"], m["t2_s"], m["tipping_angle_rad"])
        if name.startswith("fig1"):
            ref = float(saturable_gain_profile(np.array([m["length_m"]]), seed, m["alpha_per_m"], m["isat_W_m2"])[0])
        else:
            ref = unsaturated_plateau(m["dipole_rest_C_m"], m["t2_s"], m["tipping_angle_rad"],
                                      m["alpha_per_m"] * m["length_m"])
        print(f"{name}: closed-form plateau {ref:.5e} W/m^2")
        for nz in args.n_z:
            res = run(preset_config(name, n_z=nz))
            i = res.intensity.argmax()
            p = late_mean(res)
            print(f"  n_z={nz:4d}  peak {res.intensity[i]:.6e} at {res.tau[i]:.5f} s  "
                  f"plateau {p:.5e} ({p / ref - 1:+.3%})")

    base = preset_config("fig1-beta0", tau_max_rest=0.03)
    n1 = base.grid.n_tau
    print("fig1-beta0 (30 ms window): peak against step count")
    for mult in (1, 2, 4):
        cfg = preset_config("fig1-beta0", tau_max_rest=0.03, n_tau=mult * (n1 - 1) + 1)
        res = run(cfg)
        print(f"  n_tau={cfg.grid.n_tau:7d}  peak {res.intensity.max():.12e}")


if __name__ == "__main__":
    main()
