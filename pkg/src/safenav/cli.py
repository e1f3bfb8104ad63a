"""Command line entry point: ``safenav run | batch | validate-gains``.

Exit codes: 0 when every safety invariant held, 2 on a safety violation,
1 on a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from safenav.errors import ConfigurationError
from safenav.harness.emit import emit
from safenav.harness.metrics import metrics, safety_ok
from safenav.harness.scenario import admissibility, load_scenario
from safenav.harness.sim import run

OUT_ENV = "SAFENAV_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_UNSAFE = 0, 1, 2

log = logging.getLogger("safenav")


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "safenav_out"))


def run_file(path: str | Path, out: Path, dt: float | None = None, svg: bool = False,
             seed: int | None = None) -> tuple[int, str]:
    """Run one scenario file end to end; returns (exit code, one-line report)."""
    try:
        scenario = load_scenario(path)
    except ConfigurationError as exc:
        return EXIT_CONFIG, f"{path}: configuration error: {exc}"
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    trace = run(scenario, dt=dt)
    summary = metrics(trace)
    files = emit(trace, out, scenario=scenario, svg=svg, summary=summary)
    ok = safety_ok(summary)
    status = "ok" if ok else ("FAILED" if trace.failed else "floor violated")
    mins = ", ".join(
        f"{r}/{f}={s['min']:.3f}"
        for r, d in summary["robots"].items()
        for f, s in d["features"].items()
    )
    return (EXIT_OK if ok else EXIT_UNSAFE), f"{scenario.name}: {status} [{mins}] -> {files['trace']}"


def _run_one(args) -> tuple[int, str]:
    return run_file(*args)


def cmd_run(ns) -> int:
    code, line = run_file(ns.scenario, ns.out, ns.dt, ns.svg, ns.seed)
    print(line)
    return code


def cmd_batch(ns) -> int:
    files = sorted(Path(ns.directory).glob("*.toml"))
    if not files:
        print(f"no scenario files in {ns.directory}", file=sys.stderr)
        return EXIT_CONFIG
    jobs = [(f, ns.out / f.stem, ns.dt, ns.svg, None) for f in files]
    with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
        results = list(pool.map(_run_one, jobs))
    for _, line in results:
        print(line)
    codes = {c for c, _ in results}
    if EXIT_CONFIG in codes:
        return EXIT_CONFIG
    return EXIT_UNSAFE if EXIT_UNSAFE in codes else EXIT_OK


def cmd_validate(ns) -> int:
    from safenav.harness.scenario import ScenarioSpec, build, tomllib

    try:
        with open(ns.scenario, "rb") as fh:
            scenario = build(ScenarioSpec.model_validate(tomllib.load(fh)))
    except Exception as exc:  # schema or syntax problems
        print(f"{ns.scenario}: configuration error: {exc}")
        return EXIT_CONFIG
    checks = admissibility(scenario)
    for c in checks:
        margin = "" if c.margin != c.margin else f"  margin={c.margin:.4g}"
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.subject}: {c.name}: {c.detail}{margin}")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_CONFIG


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="safenav", description="Safety-augmented robot navigation simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario file")
    r.add_argument("scenario")
    r.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./safenav_out)")
    r.add_argument("--dt", type=float, default=None, help="override the integration step [s]")
    r.add_argument("--svg", action="store_true", help="also render trajectory and clearance figures")
    r.add_argument("--seed", type=int, default=None)
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("batch", help="simulate every *.toml in a directory concurrently")
    b.add_argument("directory")
    b.add_argument("--out", type=Path, default=None)
    b.add_argument("--dt", type=float, default=None)
    b.add_argument("--svg", action="store_true")
    b.add_argument("--jobs", type=int, default=None)
    b.set_defaults(func=cmd_batch)

    v = sub.add_parser("validate-gains", help="print every admissibility check with its margin")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    ns = parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(ns, "out", None) is None and ns.command != "validate-gains":
        ns.out = _default_out()
    try:
        return ns.func(ns)
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
