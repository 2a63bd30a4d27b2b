"""Numerical dimension estimates from covering counts.

Conventions
-----------
Local counts compare a ball of *diameter* ``R`` (a max-norm ball of radius
``R / 2``) with mesh cubes of side ``r`` and normalize by ``log(1 + R/r)``.
A closed interval of length ``R`` meets at most ``1 + R/r`` mesh cells of
side ``r`` when ``R/r`` is an integer, so a completely filled region scores
exactly the ambient dimension and a sparse one scores less. The normalization
differs from ``log(R/r)`` only by a bounded factor, so every limit is
unchanged; it keeps the estimate honest when ``R/r`` is small.

Intermediate-dimension estimates fit the scaling of a cost across a list of
scales instead of comparing it with a fixed constant, which removes the
unknown constants of the definitions from the answer.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ExtrapolationError, InsufficientDataError, ResolutionError
from .generators import FractalSpec, format_spec, parse_spec
from .geometry import (
    CoveringProfile,
    DiscreteMeasure,
    LocalCounter,
    PointCloud,
    dyadic_masses,
    frostman_exponent,
    geometric_scales,
    mesh_count,
    min_cover_cost_1d,
    separated_net,
)

PROVENANCES = ("numeric", "analytic", "lower_bound", "upper_bound")
DEFAULT_CENTERS = 1024
SPECTRUM_WINDOW = 0.75
BISECTION_TOL = 1e-3


@dataclass
class SpectrumCurve:
    """Samples of ``theta -> value`` with their provenance.

    ``ambient_dim`` bounds the values from above; ``family`` is the fractal
    the curve describes, if known.
    """

    thetas: np.ndarray
    values: np.ndarray
    provenance: str
    family: FractalSpec | None = None
    ambient_dim: int | None = None

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float).ravel()
        val = np.asarray(self.values, dtype=float).ravel()
        if th.shape != val.shape:
            raise DomainError("thetas and values differ in length")
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if np.any((th <= 0) | (th >= 1)):
            raise DomainError("thetas must lie in (0, 1)")
        if np.any(np.diff(th) <= 0):
            raise DomainError("thetas must be strictly increasing")
        if np.any(val < -1e-12) or not np.all(np.isfinite(val)):
            raise DomainError("values must be finite and nonnegative")
        if self.ambient_dim is not None and np.any(val > self.ambient_dim + 1e-9):
            raise DomainError("values exceed the ambient dimension")
        self.thetas, self.values = th, np.maximum(val, 0.0)

    def __len__(self) -> int:
        return self.thetas.size

    def value_at(self, theta: float) -> float:
        """Linear interpolation between samples; no extrapolation."""
        th = self.thetas
        if not (th[0] - 1e-12 <= theta <= th[-1] + 1e-12):
            raise ExtrapolationError(
                f"theta={theta:.6g} outside the sampled range [{th[0]:.6g}, {th[-1]:.6g}]"
            )
        return float(np.interp(theta, th, self.values))

    def to_csv(self, path: str | Path | None = None) -> str:
        # one line per record: spec lines joined by spaces
        fam = " ".join(format_spec(self.family).split()) if self.family is not None else ""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "value", "provenance", "family"])
        for t, v in zip(self.thetas, self.values):
            w.writerow([repr(float(t)), repr(float(v)), self.provenance, fam])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "SpectrumCurve":
        """Read a curve from a CSV file path or from CSV text."""
        text = str(source)
        if isinstance(source, Path) or "\n" not in text:
            text = Path(source).read_text()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["theta", "value", "provenance", "family"]:
            raise DomainError("expected header theta,value,provenance,family")
        body = [r for r in rows[1:] if r]
        if not body:
            raise DomainError("curve has no samples")
        provs = {r[2] for r in body}
        if len(provs) != 1:
            raise DomainError("mixed provenance in one curve")
        fam = body[0][3]
        return cls(
            [float(r[0]) for r in body],
            [float(r[1]) for r in body],
            provs.pop(),
            parse_spec(fam.replace(" ", "\n")) if fam else None,
        )


class PhiFunction:
    """Scale map ``phi`` with ``phi(R) <= R`` for ``R`` in ``(0, 1]``."""

    def __call__(self, R):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(PhiFunction):
    """``phi(R) = R**(1/theta)``; recovers the Assouad spectrum at ``theta``."""

    theta: float

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise DomainError("PowerLaw needs theta in (0, 1)")

    def __call__(self, R):
        return np.asarray(R, dtype=float) ** (1.0 / self.theta)


@dataclass(frozen=True)
class LogCorrection(PhiFunction):
    """``phi(R) = R * |log R|**(-c)``, capped at ``R`` where ``|log R| < 1``.

    Without the cap the map would exceed ``R`` for ``R > 1/e``.
    """

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError("LogCorrection needs c > 0")

    def __call__(self, R):
        R = np.asarray(R, dtype=float)
        with np.errstate(divide="ignore"):
            shrink = np.minimum(1.0, np.abs(np.log(R)) ** (-self.c))
        return R * shrink


@dataclass(frozen=True)
class Identity(PhiFunction):
    """``phi(R) = R``; the lower scale is free, giving the Assouad dimension."""

    def __call__(self, R):
        return np.asarray(R, dtype=float)


@dataclass
class RegressionFit:
    """Least-squares line ``log N = slope * log(1/r) + intercept``."""

    slope: float
    intercept: float
    max_residual: float
    scale_range: tuple[float, float]

    def __post_init__(self):
        if not self.scale_range[0] < self.scale_range[1]:
            raise DomainError("scale_range must be increasing")


def box_profile(cloud: PointCloud, scales: Sequence[float]) -> CoveringProfile:
    """Global mesh counts only, for box-dimension regression."""
    return CoveringProfile({float(s): mesh_count(cloud, float(s)) for s in scales}, {}, 0)


def estimate_box(profile: CoveringProfile) -> RegressionFit:
    """Slope of ``log N_r`` against ``log(1/r)`` over the profile's scales.

    >>> cloud = PointCloud(np.arange(1024) / 1024, 2.0**-10)
    >>> round(estimate_box(box_profile(cloud, 2.0 ** -np.arange(3, 10))).slope, 6)
    1.0
    """
    scales = profile.scales()
    if scales.size < 4:
        raise InsufficientDataError(f"box regression needs at least 4 scales, got {scales.size}")
    x = -np.log(scales)
    y = np.log([profile.global_counts[s] for s in scales])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RegressionFit(float(slope), float(intercept), float(np.abs(resid).max()), (float(scales[0]), float(scales[-1])))


def _local_exponent(n: int, ratio: float) -> float:
    return math.log(n) / math.log1p(ratio) if n > 0 else 0.0


def _spectrum_scales(cloud: PointCloud, r_min: float, window: float) -> np.ndarray:
    if not r_min > 0 or r_min >= 1:
        raise DomainError(f"r_min must lie in (0, 1), got {r_min}")
    if r_min < cloud.resolution * (1 - 1e-9):
        raise ResolutionError(f"r_min={r_min:.3g} is below the cloud resolution {cloud.resolution:.3g}")
    rs = geometric_scales(r_min, r_min**window)
    if rs.size < 2:
        raise InsufficientDataError(f"the window [{r_min:.3g}, {r_min**window:.3g}] holds fewer than two scales")
    return rs


def estimate_assouad_spectrum(
    cloud: PointCloud,
    theta_grid: Sequence[float],
    r_min: float | None = None,
    *,
    window: float = SPECTRUM_WINDOW,
    centers: int = DEFAULT_CENTERS,
    seed: int = 0,
    box: float | None = None,
    family: FractalSpec | None = None,
) -> SpectrumCurve:
    """Finite-scale Assouad spectrum.

    For each ``theta`` and each ``r`` on a dyadic grid in
    ``[r_min, r_min**window]`` the largest local count
    ``N_r(B(x, R/2))`` with ``R = r**theta`` is turned into
    ``log N / log(1 + R/r)``; the estimate is the maximum over ``r``.
    The curve is clamped to ``[box - 0.05, d]``.

    Parameters
    ----------
    r_min
        Smallest scale; defaults to the cloud resolution.
    box
        Box-dimension estimate used for the lower clamp. Computed by
        regression over the same window when omitted.

    Raises
    ------
    InsufficientDataError
        If the scale window holds fewer than two scales.
    """
    r_min = cloud.resolution if r_min is None else float(r_min)
    thetas = np.asarray(theta_grid, dtype=float).ravel()
    if thetas.size == 0 or np.any((thetas <= 0) | (thetas >= 1)):
        raise DomainError("theta_grid must be nonempty and inside (0, 1)")
    thetas = np.unique(thetas)
    rs = _spectrum_scales(cloud, r_min, window)
    counter = LocalCounter(cloud, centers, seed)
    values = np.zeros(thetas.size)
    # r outermost so the counter indexes each scale once
    for r in rs:
        for i, th in enumerate(thetas):
            R = r**th
            values[i] = max(values[i], _local_exponent(counter.sup(r, R / 2), R / r))
    if box is None:
        box_scales = geometric_scales(r_min, max(r_min, r_min**0.25))
        box = estimate_box(box_profile(cloud, box_scales)).slope if box_scales.size >= 4 else 0.0
    d = cloud.ambient_dim
    values = np.clip(values, max(0.0, min(box - 0.05, d)), d)
    return SpectrumCurve(thetas, values, "numeric", family, d)


def estimate_phi_assouad(
    cloud: PointCloud,
    phi: PhiFunction,
    R_grid: Sequence[float],
    *,
    min_ratio: float = 2.0,
    centers: int = DEFAULT_CENTERS,
    seed: int = 0,
) -> float:
    """Finite-scale phi-Assouad dimension.

    Maximum of ``log N_r(B(x, R/2)) / log(1 + R/r)`` over ``R`` in the grid
    and dyadic ``r`` with ``resolution <= r <= min(phi(R), R / min_ratio)``.
    Pairs with ``R/r`` close to 1 carry no scaling information, hence
    ``min_ratio``.
    """
    pairs = []
    for R in np.asarray(R_grid, dtype=float).ravel():
        if not 0 < R <= 1:
            raise DomainError(f"R must lie in (0, 1], got {R}")
        top = min(float(phi(R)), R / min_ratio)
        if top < cloud.resolution * (1 - 1e-9):
            continue
        k = int(math.floor(math.log(top / cloud.resolution) / math.log(2) + 1e-9))
        pairs.extend((top * 2.0**-j, float(R)) for j in range(k + 1))
    if not pairs:
        raise DomainError("no admissible (r, R) pair: phi(R) is below the resolution for every R")
    counter = LocalCounter(cloud, centers, seed)
    pairs.sort()
    return float(min(cloud.ambient_dim, max(_local_exponent(counter.sup(r, R / 2), R / r) for r, R in pairs)))


def _points_1d(points) -> np.ndarray:
    if isinstance(points, PointCloud):
        if points.ambient_dim != 1:
            raise DomainError("intermediate dimensions are estimated for subsets of the line only")
        return points.points[:, 0]
    x = np.asarray(points, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1 or x.size == 0:
        raise DomainError("need a nonempty 1-D array of points")
    return np.sort(x)


def _check_band(theta: float, r_list) -> np.ndarray:
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    rs = np.unique(np.asarray(r_list, dtype=float).ravel())[::-1]
    if rs.size == 0 or np.any(rs <= 0) or np.any(rs >= 1):
        raise DomainError("scales must lie in (0, 1)")
    return rs


def _bisect_decreasing(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Root of a nonincreasing ``f``, clamped to ``[lo, hi]``."""
    if f(lo) <= 0:
        return lo
    if f(hi) >= 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_intermediate_upper(points, theta: float, r_list: Sequence[float], tol: float = BISECTION_TOL) -> float:
    """Upper-flavoured estimate of the intermediate dimension of a subset of the line.

    ``C_r(s)`` is the exact minimum of ``sum |U_i|**s`` over covers with
    ``r <= |U_i| <= r**theta``. The estimate is the ``s`` at which the
    least-squares slope of ``log C_r(s)`` against ``log(1/r)`` vanishes:
    below it the optimal cost blows up as ``r -> 0``, above it it decays.
    """
    x = _points_1d(points)
    rs = _check_band(theta, r_list)
    if rs.size < 2:
        raise InsufficientDataError("the cost scaling needs at least two scales")
    u = -np.log(rs)
    u = u - u.mean()
    denom = float(u @ u)

    def slope(s):
        logc = np.array([math.log(min_cover_cost_1d(x, r, r**theta, s)[0]) for r in rs])
        return float(u @ (logc - logc.mean())) / denom

    return float(_bisect_decreasing(slope, 0.0, 1.0, tol))


def _log_frostman_constants(x: np.ndarray, r: float, theta: float, gamma: float, sgrid: np.ndarray, floor: float):
    # log max_U mu(U) / |U|**s for the uniform measure on an r**gamma net
    net = separated_net(PointCloud(x, floor), max(r**gamma, floor))
    sides, masses = dyadic_masses(DiscreteMeasure.uniform(net), r, r**theta)
    return np.max(np.log(masses)[None, :] - sgrid[:, None] * np.log(sides)[None, :], axis=1)


def estimate_intermediate_lower(
    cloud,
    theta: float,
    r_list: Sequence[float],
    *,
    net_exponents: Sequence[float] | None = None,
    step: float = 0.002,
) -> float:
    """Mass-distribution estimate of the intermediate dimension of a subset of the line.

    For each exponent ``g`` in ``net_exponents`` (default: 9 values from
    ``theta`` to 1) and each ``r``, the test measure is uniform on a maximal
    ``r**g``-separated subset. With several scales, ``s`` qualifies when the
    best Frostman constant ``max_U mu(U) / |U|**s`` over dyadic intervals with
    ``r <= |U| <= r**theta`` does not grow from any scale in ``r_list`` to
    the next smaller one, for ``s`` and every smaller grid exponent. With a single scale the constant is fixed to 1.
    The estimate is the largest qualifying ``s`` over all ``g``.
    """
    if isinstance(cloud, PointCloud):
        if cloud.ambient_dim != 1:
            raise DomainError("intermediate dimensions are estimated for subsets of the line only")
        x, floor = cloud.points[:, 0], cloud.resolution
    else:
        x = _points_1d(cloud)
        floor = float(np.min(np.diff(x))) if x.size > 1 else 1.0
    rs = _check_band(theta, r_list)
    if rs[-1] < floor * (1 - 1e-9):
        raise ResolutionError(f"scale {rs[-1]:.3g} is below the resolution {floor:.3g}")
    gammas = np.linspace(theta, 1.0, 9) if net_exponents is None else np.asarray(net_exponents, dtype=float)
    sgrid = np.arange(0.0, 1.0 + step / 2, step)
    best = 0.0
    for g in gammas:
        if rs.size == 1:
            r = rs[0]
            net = separated_net(PointCloud(x, floor), max(r**g, floor))
            best = max(best, frostman_exponent(DiscreteMeasure.uniform(net), r, r**theta, 1.0, step))
            continue
        L = np.array([_log_frostman_constants(x, r, theta, g, sgrid, floor) for r in rs])
        growth = L[1:] - L[:-1]
        # qualifying s form a prefix of the grid: stop at the first failure
        bad = growth > 1e-9
        first = np.where(bad.any(axis=1), bad.argmax(axis=1), sgrid.size)
        per_pair = [sgrid[f - 1] if f > 0 else 0.0 for f in first]
        best = max(best, float(min(per_pair)))
    return min(best, 1.0)


ESTIMATORS = ("assouad_spectrum", "intermediate_upper", "intermediate_lower", "phi_power_law")


def theta_sweep(cloud: PointCloud, which: str, theta_grid: Sequence[float], params: dict | None = None) -> SpectrumCurve:
    """Run one estimator across a theta grid; provenance is ``numeric``.

    ``which`` is one of ``assouad_spectrum``, ``intermediate_upper``,
    ``intermediate_lower`` or ``phi_power_law``. ``params`` are passed on
    (``r_list`` for the intermediate estimators, ``R_grid`` for the
    power-law phi estimator).
    """
    params = dict(params or {})
    family = params.pop("family", None)
    thetas = np.unique(np.asarray(theta_grid, dtype=float).ravel())
    if which == "assouad_spectrum":
        curve = estimate_assouad_spectrum(cloud, thetas, **params)
        curve.family = family
        return curve
    if which == "intermediate_upper":
        vals = [estimate_intermediate_upper(cloud, t, **params) for t in thetas]
    elif which == "intermediate_lower":
        vals = [estimate_intermediate_lower(cloud, t, **params) for t in thetas]
    elif which == "phi_power_law":
        R_grid = params.pop("R_grid")
        vals = [estimate_phi_assouad(cloud, PowerLaw(t), R_grid, **params) for t in thetas]
    else:
        raise DomainError(f"unknown estimator {which!r}; choose from {', '.join(ESTIMATORS)}")
    return SpectrumCurve(thetas, vals, "numeric", family, cloud.ambient_dim)
