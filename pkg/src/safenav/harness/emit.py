"""Write a trace to disk: CSV rows, a JSON summary and optional SVG figures."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.patches import PathPatch  # noqa: E402
from matplotlib.path import Path as MplPath  # noqa: E402
from shapely.geometry import Point as ShapelyPoint  # noqa: E402
from shapely.geometry import Polygon as ShapelyPolygon  # noqa: E402

from safenav.geometry import Disc, Feature, Mode, Polygon  # noqa: E402
from safenav.harness.metrics import metrics  # noqa: E402

MODE_COLORS = {"A0": "#1f77b4", "A1": "#d62728", "A2": "#ff7f0e"}
ROBOT_COLORS = ("#1f77b4", "#2ca02c", "#9467bd", "#8c564b")


def _cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def write_csv(trace, path: Path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace.columns)
        for row in trace.rows:
            w.writerow([_cell(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_summary(summary: dict, path: Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return path


def _ring(outer, inner) -> MplPath | None:
    """Matplotlib path of the region between two shapely polygons."""
    region = outer.difference(inner) if inner is not None and not inner.is_empty else outer
    if region.is_empty:
        return None
    polys = getattr(region, "geoms", [region])
    verts, codes = [], []
    for poly in polys:
        for ring in [poly.exterior, *poly.interiors]:
            xy = list(ring.coords)
            verts.extend(xy)
            codes.extend([MplPath.MOVETO] + [MplPath.LINETO] * (len(xy) - 2) + [MplPath.CLOSEPOLY])
    return MplPath(verts, codes)


def band_path(feature: Feature) -> MplPath | None:
    """Avoidance band of a static feature, or None for moving features."""
    lo = feature.safe_distance - feature.band
    hi = feature.safe_distance + feature.band
    shape = feature.shape
    if isinstance(shape, Disc):
        base = ShapelyPoint(shape.center).buffer(shape.radius, 128) if shape.radius > 0 else ShapelyPoint(shape.center)
        return _ring(base.buffer(hi, 128), base.buffer(lo, 128))
    if isinstance(shape, Polygon):
        base = ShapelyPolygon(shape.vertices)
        if feature.mode is Mode.KEEP_INSIDE:
            return _ring(base.buffer(-lo, 64), base.buffer(-hi, 64))
        return _ring(base.buffer(hi, 64), base.buffer(lo, 64))
    return None


def _draw_feature(ax, feature: Feature) -> None:
    shape = feature.shape
    if isinstance(shape, Disc):
        if shape.radius > 0:
            circ = plt.Circle(shape.center, shape.radius, color="0.3", fill=True, alpha=0.6)
            circ.set_gid(f"feature:{feature.name}")
            ax.add_patch(circ)
        else:
            (pt,) = ax.plot(*shape.center, "k.", markersize=6)
            pt.set_gid(f"feature:{feature.name}")
    elif isinstance(shape, Polygon):
        xs, ys = zip(*(shape.vertices + shape.vertices[:1]))
        (line,) = ax.plot(xs, ys, color="k", lw=1.2)
        line.set_gid(f"feature:{feature.name}")
    band = band_path(feature)
    if band is not None:
        patch = PathPatch(band, facecolor="#d62728", edgecolor="none", alpha=0.2)
        patch.set_gid(f"band:{feature.name}")
        ax.add_patch(patch)


def _by_robot(trace) -> dict[str, list[tuple]]:
    out: dict[str, list[tuple]] = {}
    for row in trace.rows:
        out.setdefault(row[1], []).append(row)
    return out


def plot_trajectories(trace, scenario, path: Path) -> Path:
    """Robot paths coloured by supervisor mode over features and their bands."""
    cols = trace.columns
    ix, iy, ixr, iyr, im = (cols.index(c) for c in ("x", "y", "x_r", "y_r", "mode"))
    fig, ax = plt.subplots(figsize=(6, 6))
    for f in scenario.features:
        _draw_feature(ax, f)
    for k, (name, rows) in enumerate(sorted(_by_robot(trace).items())):
        color = ROBOT_COLORS[k % len(ROBOT_COLORS)]
        ax.plot([r[ixr] for r in rows], [r[iyr] for r in rows], ls="--", lw=0.8, color=color, alpha=0.5,
                gid=f"reference:{name}")
        (line,) = ax.plot([r[ix] for r in rows], [r[iy] for r in rows], lw=1.0, color=color, label=name)
        line.set_gid(f"robot:{name}")
        safety = [
            ((a[ix], a[iy]), (b[ix], b[iy])) for a, b in zip(rows, rows[1:]) if a[im] != "A0"
        ]
        if safety:
            lc = LineCollection(safety, colors=MODE_COLORS["A1"], linewidths=2.0)
            lc.set_gid(f"safety:{name}")
            ax.add_collection(lc)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(trace.scenario)
    if trace.rows:
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def plot_clearance(trace, path: Path) -> Path:
    """Distance to the dominant feature over time, one curve per robot."""
    cols = trace.columns
    it, idist = cols.index("t"), cols.index("d_o")
    fig, ax = plt.subplots(figsize=(7, 3))
    for k, (name, rows) in enumerate(sorted(_by_robot(trace).items())):
        ax.plot([r[it] for r in rows], [r[idist] for r in rows], lw=0.8,
                color=ROBOT_COLORS[k % len(ROBOT_COLORS)], label=name, gid=f"clearance:{name}")
    for safe in sorted({s for s, _ in trace.features.values()}):
        ax.axhline(safe, color="k", lw=0.6, ls=":")
        ax.axhline(0.9 * safe, color="#d62728", lw=0.6, ls=":")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("d_o [m]")
    if trace.rows:
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)


def _save(fig, path: Path) -> Path:
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "safenav", "svg.fonttype": "none"}):
        fig.savefig(path, format=path.suffix.lstrip(".") or "svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit(trace, out_dir: Path, scenario=None, svg: bool = False, summary: dict | None = None) -> dict[str, Path]:
    """Write the trace files for one run into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = trace.scenario
    files = {"trace": write_csv(trace, out / f"{stem}.csv")}
    files["summary"] = write_summary(summary if summary is not None else metrics(trace), out / f"{stem}.json")
    if svg:
        if scenario is None:
            raise ValueError("plotting needs the scenario for its features")
        files["trajectory"] = plot_trajectories(trace, scenario, out / f"{stem}_trajectory.svg")
        files["clearance"] = plot_clearance(trace, out / f"{stem}_clearance.svg")
    return files
