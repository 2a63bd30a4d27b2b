"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES
from dimkit import (
    FIGURE6_CARPET,
    Countable,
    ExtinctionError,
    HolderExponents,
    Identity,
    Percolation,
    Spiral,
    assouad_spectrum_formula,
    box_profile,
    dims,
    estimate_assouad_spectrum,
    estimate_box,
    estimate_intermediate_lower,
    estimate_intermediate_upper,
    estimate_phi_assouad,
    generate,
    holder_transform,
    min_cover_cost_1d,
    rho_formula,
    winding_bounds,
)
from dimkit.analytic import analytic_spectrum_curve, carpet_constants, carpet_transition, spectrum_rho
from dimkit.cli import main, read_table
from dimkit.geometry import geometric_scales

import strategies


def record(number: int, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


def test_criterion_1_countable_spectrum():
    thetas = [0.2, 0.4, 0.6, 0.8]
    worst, slowest = 0.0, 0.0
    for p in (1.0, 4.0):
        t0 = time.perf_counter()
        cloud = generate(Countable(p), 1e-6)
        curve = estimate_assouad_spectrum(cloud, thetas)
        slowest = max(slowest, time.perf_counter() - t0)
        for t, v in zip(thetas, curve.values):
            worst = max(worst, abs(v - min(1 / ((1 + p) * (1 - t)), 1.0)))
    record(1, worst <= 0.1 and slowest <= 60,
           f"countable spectrum max error {worst:.3f} (tol 0.1), slowest p {slowest:.1f}s (limit 60s)")


def test_criterion_2_countable_intermediate():
    t0 = time.perf_counter()
    cloud = generate(Countable(1.0), 1e-6)
    r_list = [1e-4, 1e-5, 1e-6]
    up_err, low_gap = [], []
    for theta in (0.25, 0.5, 0.75):
        truth = theta / (theta + 1)
        up = estimate_intermediate_upper(cloud, theta, r_list)
        low = estimate_intermediate_lower(cloud, theta, r_list)
        up_err.append(abs(up - truth))
        low_gap.append(truth - low)
    elapsed = time.perf_counter() - t0
    ok = max(up_err) <= 0.05 and all(0 <= g <= 0.15 for g in low_gap) and elapsed <= 120
    record(2, ok, f"upper max error {max(up_err):.3f} (tol 0.05), lower shortfall in "
                  f"[{min(low_gap):.3f}, {max(low_gap):.3f}] (need [0, 0.15]), {elapsed:.1f}s")


def test_criterion_3_carpet():
    t0 = time.perf_counter()
    k = carpet_constants(FIGURE6_CARPET)
    cloud = generate(FIGURE6_CARPET, 2.0**-10)
    box = estimate_box(box_profile(cloud, 2.0 ** -np.arange(3, 11))).slope
    spec08 = estimate_assouad_spectrum(cloud, [0.8]).values[0]
    elapsed = time.perf_counter() - t0
    rho = math.log(2) / math.log(3)
    transition = carpet_transition(FIGURE6_CARPET) == rho
    # constant from rho on, strictly increasing up to it
    above = [assouad_spectrum_formula(FIGURE6_CARPET, t) for t in np.linspace(rho, 0.99, 20)]
    below = [assouad_spectrum_formula(FIGURE6_CARPET, rho - e) for e in (1e-1, 1e-2, 1e-4, 1e-6)]
    kink = all(v == k.assouad for v in above) and all(a < b < k.assouad for a, b in zip(below, below[1:]))
    ok = abs(box - k.box) <= 0.05 and abs(spec08 - k.assouad) <= 0.1 and transition and kink and elapsed <= 120
    record(3, ok, f"box {box:.4f} vs {k.box:.4f} (tol 0.05); spectrum(0.8) {spec08:.4f} vs "
                  f"{k.assouad:.4f} (tol 0.1); transition at log2/log3: {transition and kink}; {elapsed:.1f}s")


def test_criterion_4_spiral():
    t0 = time.perf_counter()
    cloud = generate(Spiral(2.0), 1e-5)
    thetas = [0.3, 0.5]
    est = estimate_assouad_spectrum(cloud, thetas).values
    errs = [abs(v - (1 + t / (2 * (1 - t)))) for t, v in zip(thetas, est)]
    elapsed = time.perf_counter() - t0
    rho = spectrum_rho(Spiral(2.0))
    ok = max(errs) <= 0.15 and rho == 2 / 3 and elapsed <= 120
    record(4, ok, f"spiral errors {np.round(errs, 3).tolist()} (tol 0.15), transition {rho:.6f}, {elapsed:.1f}s")


def test_criterion_5_percolation():
    t0 = time.perf_counter()
    boxes, assouads, seed = [], [], 0
    while len(boxes) < 20:
        try:
            cloud = generate(Percolation(2, 2, 0.8, seed), 2.0**-12)
        except ExtinctionError:
            seed += 1
            continue
        seed += 1
        boxes.append(estimate_box(box_profile(cloud, 2.0 ** -np.arange(3, 13))).slope)
        assouads.append(estimate_phi_assouad(cloud, Identity(), 2.0 ** -np.arange(1, 7), centers=256))
    elapsed = time.perf_counter() - t0
    target = 2 + math.log(0.8) / math.log(2)
    mb, ma = float(np.median(boxes)), float(np.median(assouads))
    ok = abs(mb - target) <= 0.1 and ma >= 1.85 and elapsed <= 300
    record(5, ok, f"median box {mb:.4f} vs {target:.4f} (tol 0.1), median Assouad {ma:.3f} (need >= 1.85), "
                  f"{seed} seeds tried, {elapsed:.1f}s")


def _brute_cover_cost(x, dmin, dmax, s):
    # enumerate every split of the sorted points into consecutive groups
    n = len(x)
    best = math.inf
    for mask in range(1 << (n - 1)):
        cost, start = 0.0, 0
        for i in range(n):
            if i == n - 1 or mask >> i & 1:
                span = x[i] - x[start]
                if span > dmax + 1e-12:
                    cost = math.inf
                    break
                cost += max(dmin, span) ** s
                start = i + 1
        best = min(best, cost)
    return best


def test_criterion_6_properties():
    failures = []

    # Lemma-1 sandwich on generated clouds over a theta grid
    thetas = np.round(np.arange(0.1, 0.91, 0.1), 2)
    for spec, res in strategies.SANDWICH_CASES:
        cloud = generate(spec, res)
        box = estimate_box(box_profile(cloud, geometric_scales(res, res**0.25))).slope
        d = cloud.ambient_dim
        est = estimate_assouad_spectrum(cloud, thetas).values
        for t, v in zip(thetas, est):
            if not (box - 0.1 <= v <= min(box / (1 - t), d) + 0.1):
                failures.append(f"sandwich {spec} theta={t}: {v:.3f} box={box:.3f}")

    # DP cover cost against brute force, 500 instances of at most 12 points
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(1, 13))
        x = np.sort(rng.random(n))
        dmin = float(rng.uniform(0.001, 0.2))
        dmax = float(dmin * rng.uniform(1, 10))
        s = float(rng.uniform(0, 1))
        got = min_cover_cost_1d(x, dmin, dmax, s)[0]
        want = _brute_cover_cost(x, dmin, dmax, s)
        if not math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-12):
            failures.append(f"cover cost {got} != {want}")

    # rho-formula identity on 99 theta samples
    grid = np.arange(1, 100) / 100
    for spec in (FIGURE6_CARPET, Spiral(2.0)):
        rep, rho = dims(spec), spectrum_rho(spec)
        for t in grid:
            if abs(rho_formula(rep.upper_box, rep.assouad, rho, t) - assouad_spectrum_formula(spec, t)) > 1e-12:
                failures.append(f"rho identity {spec} theta={t}")

    # Hoelder transform is the identity at alpha = beta = 1
    curve = analytic_spectrum_curve(Spiral(2.0))
    lo, hi = holder_transform(curve, HolderExponents(1.0, 1.0))
    if not (np.array_equal(lo.values, curve.values) and np.array_equal(hi.values, curve.values)):
        failures.append("holder identity")

    if winding_bounds(2, 1) != (Fraction(3, 4), Fraction(2, 3)):
        failures.append(f"winding_bounds(2,1) = {winding_bounds(2, 1)}")

    # ordering chain on 200 random specs
    specs = strategies.random_specs(200, seed=11)
    for spec in specs:
        r = dims(spec)
        if not (0 <= r.hausdorff <= r.lower_box <= r.upper_box <= r.assouad <= r.ambient_dim):
            failures.append(f"chain {spec}")

    record(6, not failures, "all property suites hold" if not failures else f"{len(failures)} failures, first: {failures[0]}")


def test_criterion_7_figures(tmp_path):
    t0 = time.perf_counter()
    problems = []
    for fig in ("4", "6", "7"):
        if main(["reproduce-figure", fig, "--out", str(tmp_path / fig)]) != 0:
            problems.append(f"figure {fig} exit code")
    counts = {fig: len(list((tmp_path / fig).glob("*.svg"))) for fig in ("4", "6", "7")}
    if counts["4"] != 3 or counts["7"] != 2 or counts["6"] < 1:
        problems.append(f"svg counts {counts}")
    import xml.etree.ElementTree as ET
    from dimkit.cli import COMPARE_COLUMNS, parse_theta_grid, DEFAULT_GRID
    n_theta = parse_theta_grid(DEFAULT_GRID).size
    for path in sorted(tmp_path.rglob("*")):
        if path.suffix == ".svg":
            ET.parse(path)
        elif path.suffix == ".csv":
            lines = path.read_text().splitlines()
            if tuple(lines[0].split(",")) != COMPARE_COLUMNS or len(lines) - 1 != n_theta:
                problems.append(f"schema {path.name}")
    f4 = read_table((tmp_path / "4" / "figure4-p1.csv").read_text())
    v4 = float(f4["analytic_value_or_bounds"][np.isclose(f4["theta"], 0.5)][0])
    f7 = read_table((tmp_path / "7" / "figure7-p2.csv").read_text())
    v7 = float(f7["analytic_value_or_bounds"][np.isclose(f7["theta"], 0.5)][0])
    if v4 != 1.0 or abs(v7 - 1.5) > 1e-12:
        problems.append(f"point checks {v4}, {v7}")
    elapsed = time.perf_counter() - t0
    record(7, not problems, f"figures 4/6/7 svg counts {counts}, p=1 value {v4}, p=2 value {v7}, {elapsed:.1f}s"
           + (f"; problems: {problems}" if problems else ""))
