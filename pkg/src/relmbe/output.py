"""Result serialization (CSV + JSON sidecar) and static SVG plots."""
from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, OutputError
from .solver import SimulationResult

SCHEMA_VERSION = 1
SERIES_COLUMNS = ("tau_s", "intensity_W_m2", "E_re_V_m", "E_im_V_m", "intensity_norm")
NUMBER_FORMAT = "%.16e"  # 17 significant digits: exact float64 round-trip
MAX_PLOT_BINS = 4000


def _write_table(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            if len(columns[0]):
                np.savetxt(fh, np.column_stack(columns), fmt=NUMBER_FORMAT, delimiter=",")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def series_columns(result: SimulationResult) -> list[np.ndarray]:
    return [result.tau, result.intensity, result.field.real, result.field.imag,
            result.normalized_intensity]


def write_results(result: SimulationResult, directory, stem: str, config=None) -> dict[str, Path]:
    """Write the endfire series, channel summaries, snapshots and metadata.

    Returns the written paths keyed by ``series``, ``channels``, ``metadata``
    and ``snapshot_<i>``.
    """
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    paths = {}

    paths["series"] = out / f"{stem}.csv"
    _write_table(paths["series"], SERIES_COLUMNS, series_columns(result))

    nc = result.channel_mean_inversion.shape[1] if result.channel_mean_inversion.ndim == 2 else 0
    header = ["tau_s"]
    cols = [result.tau]
    for v in range(nc):
        header += [f"mean_n_{v}_m3", f"max_abs_P_{v}_C_m2"]
        cols += [result.channel_mean_inversion[:, v], result.channel_max_polarization[:, v]]
    paths["channels"] = out / f"{stem}_channels.csv"
    _write_table(paths["channels"], header, cols)

    for i, snap in enumerate(result.snapshots):
        header = ["z_m", "abs_E_V_m"]
        cols = [snap.z, snap.field_abs]
        for v in range(snap.inversion.shape[0]):
            header += [f"n_{v}_m3", f"abs_P_{v}_C_m2"]
            cols += [snap.inversion[v], snap.polarization_abs[v]]
        key = f"snapshot_{i}"
        paths[key] = out / f"{stem}_snapshot_{i:03d}.csv"
        _write_table(paths[key], header, cols)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": result.name,
        "series_columns": list(SERIES_COLUMNS),
        "units": {"tau_s": "s", "intensity_W_m2": "W/m^2", "E_re_V_m": "V/m", "E_im_V_m": "V/m",
                  "intensity_norm": "I / max(I)"},
        "snapshot_times_s": [s.tau for s in result.snapshots],
        "metadata": result.metadata,
        "config": None if config is None else config.to_dict(),
    }
    paths["metadata"] = out / f"{stem}.json"
    try:
        paths["metadata"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {paths['metadata']}: {exc.strerror or exc}") from exc
    return paths


def read_series(path) -> dict[str, np.ndarray]:
    """Read a series CSV back into column arrays keyed by header name."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    header, _, body = text.partition("\n")
    names = header.strip().split(",")
    if body.strip():
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    else:
        data = np.empty((0, len(names)))
    return {name: data[:, i].copy() for i, name in enumerate(names)}


def read_metadata(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc


# --- plots ---------------------------------------------------------------------

def _decimate(tau, y, max_bins=MAX_PLOT_BINS):
    """Min/max per bin so fast beats survive in a compact plot."""
    n = tau.size
    if n <= 2 * max_bins:
        return tau, y
    edges = np.linspace(0, n, max_bins + 1).astype(int)
    t_out = np.empty(2 * max_bins)
    y_out = np.empty(2 * max_bins)
    for b in range(max_bins):
        seg = slice(edges[b], edges[b + 1])
        ys = y[seg]
        i_lo, i_hi = int(np.argmin(ys)), int(np.argmax(ys))
        first, second = sorted((i_lo, i_hi))
        t_out[2 * b] = tau[seg][first]
        y_out[2 * b] = ys[first]
        t_out[2 * b + 1] = tau[seg][second]
        y_out[2 * b + 1] = ys[second]
    return t_out, y_out


def emit_plot(results, path, style: str = "linear", floor: float = 1e-30, title: str | None = None) -> Path:
    """Intensity against retarded time as a standalone, byte-deterministic SVG.

    ``results`` is one :class:`SimulationResult` or a sequence of them, which
    are overlaid with a legend of their beta values.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if isinstance(results, SimulationResult):
        results = [results]
    if not results:
        raise DomainError("nothing to plot")
    for r in results:
        if r.tau.size == 0:
            raise DomainError(f"empty series{f' ({r.name})' if r.name else ''}")
    if style not in ("linear", "log"):
        raise DomainError(f"unknown plot style {style!r}")

    with plt.rc_context({"svg.hashsalt": "relmbe", "svg.fonttype": "none", "path.simplify": False}):
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        clamped = False
        for r in results:
            y = r.intensity
            if style == "log":
                below = y < floor
                clamped |= bool(below.any())
                y = np.where(below, floor, y)
            t, yd = _decimate(r.tau, y)
            beta = r.metadata.get("beta", math.nan)
            ax.plot(t, yd, lw=0.9, label=f"β = {beta:g}")
        if style == "log":
            ax.set_yscale("log")
            if clamped:
                ax.annotate(f"values below {floor:.0e} W/m² clamped", xy=(0.01, 0.01),
                            xycoords="axes fraction", fontsize=8, color="0.35")
        ax.set_xlabel("retarded time τ (s)")
        ax.set_ylabel("endfire intensity (W/m²)")
        if title is None:
            title = " + ".join(r.name or "run" for r in results)
        ax.set_title(title)
        if len(results) > 1:
            ax.legend(frameon=False)
        ax.grid(alpha=0.3, lw=0.5)
        fig.tight_layout()
        out = Path(path)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OutputError(f"cannot write {out}: {exc.strerror or exc}") from exc
        finally:
            plt.close(fig)
    return out
