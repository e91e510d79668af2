"""Run the built-in figure scenarios and write CSV/JSON/SVG plus one overlay per figure.

    python3 scripts/reproduce_figures.py --figures fig1 fig3 --out out/figures --jobs 2
"""
import argparse
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from relmbe.config import FIGURES, preset_config
from relmbe.output import emit_plot, write_results
from relmbe.solver import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--figures", nargs="+", choices=sorted(FIGURES), default=sorted(FIGURES))
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--n-z", type=int, help="override the preset z resolution")
    ap.add_argument("--jobs", type=int, default=1, help="runs in parallel threads")
    args = ap.parse_args()

    for fig in args.figures:
        names = FIGURES[fig]
        configs = []
        for name in names:
            cfg = preset_config(name) if args.n_z is None else preset_config(name, n_z=args.n_z)
            configs.append(replace(cfg, outputs=replace(cfg.outputs, directory=args.out)))
        t0 = time.perf_counter()
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, configs))
        for cfg, res in zip(configs, results):
            write_results(res, args.out, cfg.outputs.stem, config=cfg)
            i = res.intensity.argmax()
            print(f"{cfg.name:14s} peak {res.intensity[i]:.4e} W/m^2 at {res.tau[i]:.5f} s, "
                  f"final {res.intensity[-1]:.4e} W/m^2")
        path = emit_plot(results, f"{args.out}/{fig}.svg", style=configs[0].outputs.plot_style,
                         title=f"{fig}: {', '.join(names)}")
        print(f"{fig}: {time.perf_counter() - t0:.1f} s -> {path}")


if __name__ == "__main__":
    main()
