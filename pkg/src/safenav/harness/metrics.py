"""Run summaries computed from trace columns alone."""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from safenav.supervisor import Phase


def clearance_stats(d: np.ndarray, threshold: float) -> dict:
    d = d[np.isfinite(d)]
    if d.size == 0:
        return {"min": math.nan, "mean": math.nan, "fraction_above": math.nan, "samples": 0}
    return {
        "min": float(d.min()),
        "mean": float(d.mean()),
        "fraction_above": float(np.mean(d > threshold)),
        "samples": int(d.size),
    }


def encounters(transitions) -> list[list]:
    """Split a transition log into encounters, each opened by leaving A0."""
    groups: list[list] = []
    for tr in transitions:
        if tr.source is Phase.A0 or not groups:
            groups.append([])
        groups[-1].append(tr)
    return groups


def metrics(trace, thresholds: dict[str, float] | None = None, floor_ratio: float = 0.9) -> dict:
    """Per-robot and per-feature summary of a trace.

    ``thresholds`` maps feature names to the clearance level used for the
    fraction-of-time statistic; the default is ``floor_ratio`` times the
    feature's safe distance.
    """
    thresholds = dict(thresholds or {})
    cols = trace.columns
    i_robot, i_feat, i_d = cols.index("robot"), cols.index("feature"), cols.index("d_o")
    i_mode = cols.index("mode")
    i_x, i_y, i_xr, i_yr = (cols.index(c) for c in ("x", "y", "x_r", "y_r"))

    per_robot: dict[str, dict] = {}
    by_robot = defaultdict(list)
    for row in trace.rows:
        by_robot[row[i_robot]].append(row)

    for robot in trace.robots or list(by_robot):
        rows = by_robot.get(robot, [])
        d_all = np.array([r[i_d] for r in rows], dtype=float)
        features = {}
        by_feature = defaultdict(list)
        for r in rows:
            if r[i_feat]:
                by_feature[r[i_feat]].append(r[i_d])
        for name, values in sorted(by_feature.items()):
            safe = trace.features.get(name, (math.nan, math.nan))[0]
            thr = thresholds.get(name, floor_ratio * safe)
            stats = clearance_stats(np.array(values, dtype=float), thr)
            stats.update(threshold=thr, safe_distance=safe, floor_ok=bool(stats["min"] >= floor_ratio * safe))
            features[name] = stats

        a0 = [r for r in rows if r[i_mode] == Phase.A0.value]
        err = np.array([math.hypot(r[i_x] - r[i_xr], r[i_y] - r[i_yr]) for r in a0], dtype=float)
        tr_log = trace.transitions.get(robot, [])
        groups = encounters(tr_log)
        safety_rows = sum(1 for r in rows if r[i_mode] != Phase.A0.value)
        per_robot[robot] = {
            "min_clearance": float(np.nanmin(d_all)) if np.isfinite(d_all).any() else math.nan,
            "features": features,
            "tracking_rms": float(np.sqrt(np.mean(err**2))) if err.size else math.nan,
            "final_tracking_error": float(err[-1]) if err.size and rows[-1][i_mode] == Phase.A0.value else math.nan,
            "transitions": len(tr_log),
            "transitions_per_encounter": [len(g) for g in groups],
            "safety_fraction": safety_rows / len(rows) if rows else 0.0,
            "delta_excursions": trace.delta_excursions.get(robot, 0),
        }

    summary = {
        "scenario": trace.scenario,
        "status": trace.status,
        "dt": trace.dt,
        "seed": trace.seed,
        "steps": len({r[0] for r in trace.rows}),
        "robots": per_robot,
        "violation": vars(trace.violation) if trace.violation else None,
        "corner_passages": len(trace.corner_jumps),
    }
    if len(trace.robots) > 1:
        summary["min_inter_robot_distance"] = min_inter_robot_distance(trace)
    return summary


def min_inter_robot_distance(trace) -> float:
    cols = trace.columns
    i_t, i_robot, i_x, i_y = cols.index("t"), cols.index("robot"), cols.index("x"), cols.index("y")
    at = defaultdict(list)
    for r in trace.rows:
        at[r[i_t]].append((r[i_x], r[i_y]))
    best = math.inf
    for pts in at.values():
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = min(best, math.dist(pts[i], pts[j]))
    return best


def safety_ok(summary: dict) -> bool:
    """True when the run finished and every feature kept its clearance floor."""
    if summary["status"] != "OK":
        return False
    return all(
        f["floor_ok"] for r in summary["robots"].values() for f in r["features"].values() if f["samples"]
    )
