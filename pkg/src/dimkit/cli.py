"""``dimkit`` command line: generate clouds, estimate, evaluate formulas, compare, draw figures.

Exit codes: 0 success, 2 configuration or usage error, 3 percolation
extinction, 4 too few usable scales.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytic, svg
from .errors import DomainError, ExtinctionError, InsufficientDataError
from .estimators import ESTIMATORS, estimate_assouad_spectrum, theta_sweep
from .generators import (
    FIGURE6_CARPET,
    Carpet,
    Countable,
    Percolation,
    Spiral,
    generate,
    load_spec,
    spec_label,
)
from .geometry import PointCloud, read_cloud, write_cloud

log = logging.getLogger("dimkit")

EXIT_OK, EXIT_CONFIG, EXIT_EXTINCT, EXIT_SCALES = 0, 2, 3, 4
DEFAULT_GRID = "0.02:0.98:0.02"
COMPARE_COLUMNS = (
    "theta",
    "numeric_estimate",
    "analytic_value_or_bounds",
    "lemma1_lower",
    "lemma1_upper",
    "lemma3_lower",
    "intermediate_lower",
    "intermediate_upper",
    "flag",
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config helpers

def parse_theta_grid(text: str) -> np.ndarray:
    """``START:STOP:STEP`` (STOP included when on the grid) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(Fraction(v)) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = np.round(start + step * np.arange(max(n, 0)), 12)
        else:
            grid = np.array([float(Fraction(v)) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"bad theta grid {text!r}; expected START:STOP:STEP") from None
    if grid.size == 0 or np.any((grid <= 0) | (grid >= 1)):
        raise UsageError("theta values must lie strictly between 0 and 1")
    return np.unique(grid)


def threads() -> int:
    raw = os.environ.get("DIMKIT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"DIMKIT_THREADS must be an integer >= 1, got {raw!r}")
    return n


def default_resolution(spec) -> float:
    """Resolution used when none is given; chosen to keep each command under a minute."""
    if isinstance(spec, Countable):
        return 1e-6
    if isinstance(spec, Carpet):
        return float(spec.m) ** -math.ceil(10 * math.log(2) / math.log(spec.m))
    if isinstance(spec, Spiral):
        return 1e-4
    if isinstance(spec, Percolation):
        return float(spec.m) ** -math.ceil(10 * math.log(2) / math.log(spec.m))
    return 1e-5


def transitions(spec) -> list[float]:
    """Theta values where the analytic spectrum changes branch."""
    if isinstance(spec, (Countable, Spiral)):
        return [spec.p / (1 + spec.p)]
    if isinstance(spec, Carpet):
        return [] if analytic.carpet_derived(spec).uniform_fibres else [analytic.carpet_transition(spec)]
    return []


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _spec_from_args(args):
    if not args.spec:
        raise UsageError("--spec is required")
    overrides = {"seed": args.seed} if getattr(args, "seed", None) is not None else None
    return load_spec(args.spec, overrides)


# ---------------------------------------------------------------- comparison table

def compare_table(spec, thetas, numeric=None, skipped: str | None = None) -> str:
    """CSV comparing a numeric spectrum with the analytic one and the general bounds."""
    rep = analytic.dims(spec)
    flags = list(analytic.spectrum_flags(spec))
    if skipped:
        flags.append(f"numeric_skipped:{skipped}")
    flag = ";".join(flags) if flags else "ok"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for i, t in enumerate(thetas):
        lo1, hi1 = analytic.lemma1_bounds(rep.upper_box, rep.assouad, t)
        ilo, ihi, _ = analytic.intermediate_formula_or_bounds(spec, t)
        w.writerow([
            repr(float(t)),
            _fmt(None if numeric is None else numeric[i]),
            _fmt(analytic.assouad_spectrum_formula(spec, t)),
            _fmt(lo1),
            _fmt(hi1),
            _fmt(analytic.lemma3_bound(rep.lower_box, rep.assouad, t)),
            _fmt(ilo),
            _fmt(ihi),
            flag,
        ])
    return buf.getvalue()


def read_table(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    cols = {}
    for j, name in enumerate(header):
        if name == "flag":
            cols[name] = np.array([r[j] for r in body])
        else:
            cols[name] = np.array([float(r[j]) if r[j] else np.nan for r in body])
    return cols


def spectrum_chart(table: dict, spec, title: str) -> str:
    t = table["theta"]
    series = [
        svg.Series("general lower bound", t, table["lemma1_lower"], "dashed", svg.PALETTE["bound"]),
        svg.Series("general upper bound", t, table["lemma1_upper"], "dashed", svg.PALETTE["bound"]),
        svg.Series("Assouad spectrum", t, table["analytic_value_or_bounds"], "solid", svg.PALETTE["value"]),
    ]
    if np.isfinite(table["numeric_estimate"]).any():
        series.append(svg.Series("numeric estimate", t, table["numeric_estimate"], "points", svg.PALETTE["numeric"]))
    return svg.line_chart(series, title=title, markers=transitions(spec))


def countable_chart(table: dict, spec, title: str) -> str:
    """Spectrum and intermediate dimensions together, as for countable sets."""
    t = table["theta"]
    series = [
        svg.Series("Assouad spectrum", t, table["analytic_value_or_bounds"], "solid", svg.PALETTE["numeric"]),
        svg.Series("intermediate dimension", t, table["intermediate_lower"], "solid", svg.PALETTE["value"]),
        svg.Series("intermediate lower bound", t, table["lemma3_lower"], "dashed", svg.PALETTE["bound"]),
    ]
    if np.isfinite(table["numeric_estimate"]).any():
        series.append(svg.Series("numeric spectrum", t, table["numeric_estimate"], "points", svg.PALETTE["alt"]))
    return svg.line_chart(series, title=title, markers=transitions(spec), ylim=(0.0, 1.0))


def intermediate_chart(table: dict, spec, title: str) -> str:
    t = table["theta"]
    series = [
        svg.Series("intermediate lower bound", t, table["intermediate_lower"], "dashed", svg.PALETTE["bound"]),
        svg.Series("intermediate upper bound", t, table["intermediate_upper"], "dashed", svg.PALETTE["bound"]),
    ]
    return svg.line_chart(series, title=title)


def run_compare(spec, thetas, resolution=None, centers=1024, seed=0, r_min=None, numeric=True):
    """Build the comparison CSV text; numeric failures are flagged, not raised."""
    values, skipped = None, None if numeric else "disabled"
    if numeric:
        try:
            cloud = generate(spec, resolution or default_resolution(spec))
            curve = estimate_assouad_spectrum(cloud, thetas, r_min, centers=centers, seed=seed)
            values = curve.values
        except ExtinctionError:
            skipped = "extinction"
        except (InsufficientDataError, DomainError) as exc:
            log.warning("numeric estimate skipped: %s", exc)
            skipped = "insufficient_scales"
    return compare_table(spec, thetas, values, skipped)


# ---------------------------------------------------------------- figures

def _p_tag(p) -> str:
    return str(Fraction(p).limit_denominator(1000)).replace("/", "_")


FIGURES = {
    "4": [(f"figure4-p{_p_tag(p)}", Countable(p)) for p in (4.0, 1.0, 0.1)],
    "6": [("figure6", FIGURE6_CARPET)],
    "7": [(f"figure7-p{p}", Spiral(p)) for p in (2, 10)],
}


def reproduce_figure(fig: str, out: Path, thetas, numeric=True, centers=1024, seed=0) -> list[Path]:
    """Write one CSV per panel family plus the overlay SVGs; returns written paths."""
    if fig not in FIGURES:
        raise UsageError(f"unknown figure {fig!r}; choose from {', '.join(sorted(FIGURES))}")
    jobs = FIGURES[fig]

    def work(job):
        name, spec = job
        return name, spec, run_compare(spec, thetas, centers=centers, seed=seed, numeric=numeric)

    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(work, jobs))
    written = []
    for name, spec, text in results:
        written.append(_write(out / f"{name}.csv", text))
        table = read_table(text)
        label = spec_label(spec)
        if fig == "4":
            written.append(_write(out / f"{name}.svg", countable_chart(table, spec, label)))
        elif fig == "6":
            written.append(_write(out / f"{name}-spectrum.svg", spectrum_chart(table, spec, label)))
            written.append(_write(out / f"{name}-intermediate.svg", intermediate_chart(table, spec, label)))
        else:
            written.append(_write(out / f"{name}.svg", spectrum_chart(table, spec, label)))
    return written


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    spec = _spec_from_args(args)
    res = args.resolution or default_resolution(spec)
    cloud = generate(spec, res)
    out = Path(args.out or ".")
    path = out if out.suffix == ".csv" else out / f"{spec_label(spec)}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_cloud(cloud, path)
    print(f"wrote {path} points={len(cloud)} resolution={cloud.resolution!r}")
    return EXIT_OK


def _estimator_params(args, cloud: PointCloud) -> dict:
    r_min = args.r_min or cloud.resolution
    if args.estimator == "assouad_spectrum":
        return {"r_min": r_min, "centers": args.centers, "seed": args.seed or 0}
    if args.estimator in ("intermediate_upper", "intermediate_lower"):
        return {"r_list": [r_min * 100, r_min * 10, r_min]}
    R_grid = 2.0 ** -np.arange(1, 7)
    return {"R_grid": R_grid, "centers": args.centers, "seed": args.seed or 0}


def cmd_estimate(args) -> int:
    thetas = parse_theta_grid(args.theta_grid)
    spec = None
    if args.cloud:
        cloud = read_cloud(args.cloud)
    else:
        spec = _spec_from_args(args)
        cloud = generate(spec, args.resolution or default_resolution(spec))
    params = _estimator_params(args, cloud)
    params["family"] = spec
    curve = theta_sweep(cloud, args.estimator, thetas, params)
    text = curve.to_csv()
    if args.out:
        out = Path(args.out)
        path = out if out.suffix == ".csv" else out / f"estimate-{args.estimator}.csv"
        _write(path, text)
        if args.svg:
            s = svg.Series(args.estimator, curve.thetas, curve.values, "points", svg.PALETTE["numeric"])
            _write(path.with_suffix(".svg"), svg.line_chart([s], title=args.estimator))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_formula(args) -> int:
    spec = _spec_from_args(args)
    thetas = parse_theta_grid(args.theta_grid)
    rep = analytic.dims(spec)
    for key in ("hausdorff", "lower_box", "upper_box", "assouad"):
        print(f"{key}={getattr(rep, key)!r} ({rep.flags[key]})")
    curve = analytic.analytic_spectrum_curve(spec, thetas)
    if args.out:
        out = Path(args.out)
        path = out if out.suffix == ".csv" else out / f"{spec_label(spec)}-spectrum.csv"
        _write(path, curve.to_csv())
        print(f"wrote {path}")
    else:
        sys.stdout.write(curve.to_csv())
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = _spec_from_args(args)
    thetas = parse_theta_grid(args.theta_grid)
    text = run_compare(spec, thetas, args.resolution, args.centers, args.seed or 0, args.r_min, not args.no_numeric)
    out = Path(args.out or ".")
    label = spec_label(spec)
    path = _write(out / f"{label}-compare.csv", text)
    print(f"wrote {path}")
    if args.svg:
        chart = spectrum_chart(read_table(text), spec, label)
        print(f"wrote {_write(out / f'{label}-compare.svg', chart)}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    thetas = parse_theta_grid(args.theta_grid)
    paths = reproduce_figure(str(args.figure), Path(args.out or "."), thetas, not args.no_numeric, args.centers, args.seed or 0)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="key=value spec file")
    common.add_argument("--resolution", type=float)
    common.add_argument("--theta-grid", default=DEFAULT_GRID, help="START:STOP:STEP")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (or .csv file where allowed)")
    common.add_argument("--svg", action="store_true", help="also write an SVG plot")
    common.add_argument("--centers", type=int, default=1024, help="max centres sampled for local counts")
    common.add_argument("--r-min", type=float, help="smallest scale used by the estimators")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dimkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[common], help="write a point cloud and its metadata")
    g.set_defaults(func=cmd_generate)
    e = sub.add_parser("estimate", parents=[common], help="numeric estimate over a theta grid")
    e.add_argument("--estimator", choices=ESTIMATORS, default="assouad_spectrum")
    e.add_argument("--cloud", help="read a cloud written by 'generate' instead of a spec")
    e.set_defaults(func=cmd_estimate)
    f = sub.add_parser("formula", parents=[common], help="closed-form dimensions and spectrum")
    f.set_defaults(func=cmd_formula)
    c = sub.add_parser("compare", parents=[common], help="numeric versus analytic table")
    c.add_argument("--no-numeric", action="store_true", help="analytic columns only")
    c.set_defaults(func=cmd_compare)
    r = sub.add_parser("reproduce-figure", parents=[common], help="canonical figure panels (4, 6 or 7)")
    r.add_argument("figure")
    r.add_argument("--no-numeric", action="store_true", help="analytic columns only")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        threads()
        return args.func(args)
    except UsageError as exc:
        print(f"error=usage message={exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExtinctionError as exc:
        print(f"error=extinction seed={exc.seed} level={exc.level}", file=sys.stderr)
        return EXIT_EXTINCT
    except InsufficientDataError as exc:
        print(f"error=insufficient_scales message={exc}", file=sys.stderr)
        return EXIT_SCALES
    except (DomainError, FileNotFoundError, KeyError) as exc:
        print(f"error=config message={exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
