"""Closed-form dimensions, spectra, bounds and transforms.

Everything here is exact up to double rounding and needs no point cloud.
Values that hold only almost surely, only under an unverifiable hypothesis,
or only as bounds are flagged rather than returned bare.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .estimators import Identity, LogCorrection, PhiFunction, PowerLaw, SpectrumCurve
from .generators import (
    Carpet,
    Countable,
    FractalSpec,
    Percolation,
    SelfSimilarLine,
    Spiral,
    carpet_derived,
)

DEFAULT_THETAS = np.round(np.arange(1, 100) / 100, 2)

EXACT = "exact"
UPPER = "upper_bound"
LOWER = "lower_bound"
ALMOST_SURE = "almost_sure"
NO_CONCENTRATION = "assumes_no_superexponential_concentration"
OSC_FAILED = "open_set_condition_not_verified"

_TOL = 1e-12


def _check_theta(theta) -> float:
    theta = float(theta)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    return theta


@dataclass
class DimensionReport:
    """Hausdorff, lower/upper box and Assouad dimensions of one set.

    ``flags`` maps each field name to a tag such as ``exact``,
    ``upper_bound`` or ``almost_sure``; ``notes`` holds set-level caveats.
    """

    hausdorff: float
    lower_box: float
    upper_box: float
    assouad: float
    ambient_dim: int
    flags: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        chain = [self.hausdorff, self.lower_box, self.upper_box, self.assouad]
        if any(v < -_TOL or v > self.ambient_dim + _TOL for v in chain):
            raise DomainError(f"dimensions must lie in [0, {self.ambient_dim}]: {chain}")
        if any(a > b + _TOL for a, b in zip(chain, chain[1:])):
            raise DomainError(f"dimensions out of order: {chain}")
        for name in ("hausdorff", "lower_box", "upper_box", "assouad"):
            self.flags.setdefault(name, EXACT)

    @property
    def box(self) -> float:
        return self.upper_box


@dataclass(frozen=True)
class HolderExponents:
    """Exponents of a map with ``|x-y|**beta <~ |f(x)-f(y)| <~ |x-y|**alpha``.

    Requires ``0 < alpha <= 1 <= beta``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 < self.alpha <= 1 <= self.beta):
            raise DomainError(f"need 0 < alpha <= 1 <= beta, got ({self.alpha}, {self.beta})")


# ---------------------------------------------------------------- carpets

@dataclass(frozen=True)
class CarpetConstants:
    rho: float
    hausdorff: float
    box: float
    assouad: float
    entropy: float


def carpet_constants(spec: Carpet) -> CarpetConstants:
    """Dimensions of a carpet and the entropy of its McMullen measure."""
    st = carpet_derived(spec)
    lm, ln = math.log(spec.m), math.log(spec.n)
    rho = lm / ln
    C = np.array(st.C_list, dtype=float)
    weights = C**rho
    total = math.fsum(weights)
    H = math.log(total) / lm
    B = math.log(st.M) / lm + math.log(st.N / st.M) / ln
    A = math.log(st.M) / lm + math.log(st.C_max) / ln
    h = -math.fsum(weights * ((rho - 1) * np.log(C) - H * lm)) / total
    if st.uniform_fibres:
        H = A = B
    return CarpetConstants(rho, H, B, A, h)


def carpet_transition(spec: Carpet) -> float:
    """Location ``log m / log n`` of the spectrum's phase transition."""
    return math.log(spec.m) / math.log(spec.n)


# ---------------------------------------------------------------- self-similar

def open_set_check(spec: SelfSimilarLine) -> bool:
    """Sufficient separation test: images of ``(0, 1)`` pairwise disjoint."""
    ivs = sorted((t, t + c) for c, t in spec.maps)
    return all(a_hi <= b_lo + 1e-12 for (_, a_hi), (b_lo, _) in zip(ivs, ivs[1:]))


def similarity_dimension(spec: SelfSimilarLine) -> float:
    """Root ``s`` of ``sum c_i**s = 1``."""
    c = np.array([ci for ci, _ in spec.maps])
    if c.size == 1:
        return 0.0
    return float(brentq(lambda s: float(np.sum(c**s)) - 1.0, 0.0, 64.0, xtol=1e-15))


# ---------------------------------------------------------------- dims

def _countable_dims(p):
    if isinstance(p, Rational) or float(p).is_integer():
        b = float(1 / (1 + Fraction(p)))
    else:
        b = 1.0 / (1.0 + p)
    return b


def dims(spec: FractalSpec) -> DimensionReport:
    """Hausdorff, box and Assouad dimensions of a catalogued family.

    >>> r = dims(Countable(1))
    >>> (r.hausdorff, r.lower_box, r.upper_box, r.assouad)
    (0.0, 0.5, 0.5, 1.0)
    """
    if isinstance(spec, Countable):
        b = _countable_dims(spec.p)
        return DimensionReport(0.0, b, b, 1.0, 1)
    if isinstance(spec, Carpet):
        k = carpet_constants(spec)
        return DimensionReport(k.hausdorff, k.box, k.box, k.assouad, 2)
    if isinstance(spec, Spiral):
        return DimensionReport(1.0, 1.0, 1.0, 2.0, 2)
    if isinstance(spec, SelfSimilarLine):
        s = similarity_dimension(spec)
        if open_set_check(spec):
            return DimensionReport(s, s, s, s, 1)
        # Hausdorff and box agree for every self-similar set; without
        # separation only the similarity dimension bounds them
        s = min(s, 1.0)
        flags = {"hausdorff": UPPER, "lower_box": UPPER, "upper_box": UPPER, "assouad": UPPER}
        return DimensionReport(s, s, s, 1.0, 1, flags, (OSC_FAILED,))
    if isinstance(spec, Percolation):
        b = spec.d + math.log(spec.p) / math.log(spec.m)
        flags = dict.fromkeys(("hausdorff", "lower_box", "upper_box", "assouad"), ALMOST_SURE)
        return DimensionReport(b, b, b, float(spec.d), spec.d, flags, (ALMOST_SURE,))
    raise DomainError(f"unsupported spec {spec!r}")


def spectrum_flags(spec: FractalSpec) -> tuple:
    """Caveats attached to :func:`assouad_spectrum_formula` for this spec."""
    if isinstance(spec, Percolation):
        return (ALMOST_SURE,)
    if isinstance(spec, SelfSimilarLine):
        return (NO_CONCENTRATION,) if open_set_check(spec) else (NO_CONCENTRATION, OSC_FAILED)
    return ()


def assouad_spectrum_formula(spec: FractalSpec, theta: float) -> float:
    """Exact Assouad spectrum at ``theta``.

    Self-similar sets and percolation return their box dimension; see
    :func:`spectrum_flags` for the attached caveats.
    """
    theta = _check_theta(theta)
    if isinstance(spec, Countable):
        return min(_countable_dims(spec.p) / (1 - theta), 1.0)
    if isinstance(spec, Spiral):
        if theta < spec.p / (1 + spec.p):
            return 1 + theta / (spec.p * (1 - theta))
        return 2.0
    if isinstance(spec, Carpet):
        st = carpet_derived(spec)
        k = carpet_constants(spec)
        if st.uniform_fibres or theta >= k.rho:
            return k.assouad
        lm, ln = math.log(spec.m), math.log(spec.n)
        first = (math.log(st.M) - theta * math.log(st.N / st.C_max)) / ((1 - theta) * lm)
        second = (math.log(st.N / st.M) - theta * math.log(st.C_max)) / ((1 - theta) * ln)
        return first + second
    if isinstance(spec, (SelfSimilarLine, Percolation)):
        return dims(spec).upper_box
    raise DomainError(f"unsupported spec {spec!r}")


def lemma1_bounds(box: float, assouad: float, theta: float) -> tuple[float, float]:
    """General bounds ``box <= spectrum(theta) <= min(box / (1 - theta), assouad)``."""
    theta = _check_theta(theta)
    if box < 0 or box > assouad + _TOL:
        raise DomainError(f"need 0 <= box <= assouad, got box={box}, assouad={assouad}")
    return box, min(box / (1 - theta), assouad)


def lemma3_bound(lower_box: float, assouad: float, theta: float) -> float:
    """Lower bound ``max(0, A - (A - lower_box) / theta)`` for the intermediate dimension."""
    theta = _check_theta(theta)
    if lower_box < 0 or lower_box > assouad + _TOL:
        raise DomainError(f"need 0 <= lower_box <= assouad, got {lower_box}, {assouad}")
    return max(0.0, assouad - (assouad - lower_box) / theta)


def carpet_intermediate_bounds(spec: Carpet, theta: float) -> tuple[float, float]:
    """Carpet-specific bounds on the intermediate dimension, before combination.

    The upper bound is only available for ``theta < (log m / (2 log n))**2``;
    elsewhere the box dimension is returned in its place.
    """
    theta = _check_theta(theta)
    st = carpet_derived(spec)
    k = carpet_constants(spec)
    lm, ln = math.log(spec.m), math.log(spec.n)
    lower = k.hausdorff + theta * (math.log(st.N) - k.entropy) / lm
    if theta < (lm / (2 * ln)) ** 2:
        upper = k.hausdorff + 2 * math.log(st.C_max) * math.log(ln / lm) / (-ln * math.log(theta))
    else:
        upper = k.box
    return lower, upper


def intermediate_formula_or_bounds(spec: FractalSpec, theta: float) -> tuple[float, float, bool]:
    """``(lower, upper, exact)`` for the intermediate dimension at ``theta``.

    Countable sets have a closed form. Other families combine the best
    available lower bounds (Hausdorff dimension, the Assouad-based bound and,
    for carpets, the entropy bound) with the best upper bounds (box dimension
    and, for carpets, the small-``theta`` bound).
    """
    theta = _check_theta(theta)
    if isinstance(spec, Countable):
        v = theta / (theta + float(spec.p))
        return v, v, True
    rep = dims(spec)
    lower = max(rep.hausdorff, lemma3_bound(rep.lower_box, rep.assouad, theta))
    upper = rep.upper_box
    if isinstance(spec, Carpet):
        c_lo, c_hi = carpet_intermediate_bounds(spec, theta)
        lower, upper = max(lower, min(c_lo, upper)), min(upper, c_hi)
    if rep.flags["upper_box"] == UPPER:
        # without separation the similarity dimension only bounds from above
        lower = lemma3_bound(0.0, rep.assouad, theta)
    lower = min(lower, upper)
    return lower, upper, abs(upper - lower) < _TOL


def holder_transform(
    curve: SpectrumCurve, exps: HolderExponents, thetas: Sequence[float] | None = None
) -> tuple[SpectrumCurve, SpectrumCurve]:
    """Bounds on the Assouad spectrum of an ``(alpha, beta)``-Hoelder image.

    ``lower(t) = (1 - b t / a) / (b (1 - t)) * curve(b t / a)``, taken as 0
    when ``b t / a >= 1``, and ``upper(t) = (1 - a t / b) / (a (1 - t)) *
    curve(a t / b)``. The input curve is interpolated linearly; evaluation
    points outside its sampled range raise :class:`ExtrapolationError`.
    """
    a, b = exps.alpha, exps.beta
    ts = curve.thetas if thetas is None else np.asarray(thetas, dtype=float)
    lo, hi = [], []
    for t in ts:
        t = _check_theta(t)
        s = b * t / a
        lo.append(0.0 if s >= 1 else (1 - s) / (b * (1 - t)) * curve.value_at(s))
        u = a * t / b
        hi.append((1 - u) / (a * (1 - t)) * curve.value_at(u))
    return (
        SpectrumCurve(ts, lo, "lower_bound", curve.family),
        SpectrumCurve(ts, hi, "upper_bound", curve.family),
    )


def winding_bounds(p, beta) -> tuple:
    """Largest Hoelder exponent ``alpha`` for a map from the line onto the spiral.

    Returns ``(spectrum_bound, sharp_bound)`` with ``(p b + b)/(p + 2b)`` and
    ``p b/(p + b)``, both capped at 1. Rational inputs give exact fractions.

    >>> winding_bounds(2, 1)
    (Fraction(3, 4), Fraction(2, 3))
    """
    if p < 1 or beta < 1:
        raise DomainError(f"need p >= 1 and beta >= 1, got p={p}, beta={beta}")
    if isinstance(p, Rational) and isinstance(beta, Rational):
        p, beta, one = Fraction(p), Fraction(beta), Fraction(1)
    else:
        p, beta, one = float(p), float(beta), 1.0
    spectrum = (p * beta + beta) / (p + 2 * beta)
    sharp = p * beta / (p + beta)
    return min(spectrum, one), min(sharp, one)


def rho_formula(box: float, assouad: float, rho: float, theta: float) -> float:
    """``min(box + (1 - rho) theta / ((1 - theta) rho) * (assouad - box), assouad)``."""
    theta = _check_theta(theta)
    if not 0 < rho < 1:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if box < 0 or box > assouad + _TOL:
        raise DomainError(f"need 0 <= box <= assouad, got box={box}, assouad={assouad}")
    if theta >= rho:
        return float(assouad)
    return min(box + (1 - rho) * theta / ((1 - theta) * rho) * (assouad - box), assouad)


def spectrum_rho(spec: FractalSpec) -> float:
    """The constant ``rho`` for which :func:`rho_formula` gives the spectrum."""
    if isinstance(spec, Carpet):
        return carpet_transition(spec)
    if isinstance(spec, Spiral):
        return spec.p / (spec.p + 1)
    if isinstance(spec, Countable):
        return spec.p / (spec.p + 1)
    raise DomainError(f"no rho constant for {type(spec).__name__}")


ASSOUAD_REGIME = "assouad_regime"
BOX_REGIME = "box_regime"
INDETERMINATE = "indeterminate"


def phi_growth_limit(phi: PhiFunction) -> float:
    """``lim_{R -> 0} log(R / phi(R)) / log|log R|`` for the closed forms."""
    if isinstance(phi, Identity):
        return 0.0
    if isinstance(phi, PowerLaw):
        return math.inf
    if isinstance(phi, LogCorrection):
        return float(phi.c)
    raise DomainError(f"no closed-form limit for {phi!r}")


def percolation_phi_regime(phi: PhiFunction) -> str:
    """Which value the phi-Assouad dimension of percolation takes almost surely.

    Growth limit 0 gives the ambient dimension, an infinite limit gives the
    box dimension, and a finite positive limit is not covered.
    """
    lim = phi_growth_limit(phi)
    if lim == 0:
        return ASSOUAD_REGIME
    if math.isinf(lim):
        return BOX_REGIME
    return INDETERMINATE


def analytic_spectrum_curve(spec: FractalSpec, thetas: Sequence[float] = DEFAULT_THETAS) -> SpectrumCurve:
    """:func:`assouad_spectrum_formula` on a grid; provenance ``analytic``.

    Self-similar sets without verified separation get ``upper_bound``.
    """
    ts = np.asarray(thetas, dtype=float)
    vals = [assouad_spectrum_formula(spec, t) for t in ts]
    prov = "upper_bound" if OSC_FAILED in spectrum_flags(spec) else "analytic"
    return SpectrumCurve(ts, vals, prov, spec, dims(spec).ambient_dim)


def lemma1_curves(spec: FractalSpec, thetas: Sequence[float] = DEFAULT_THETAS):
    """General lower and upper spectrum bounds as curves."""
    rep = dims(spec)
    ts = np.asarray(thetas, dtype=float)
    pairs = [lemma1_bounds(rep.upper_box, rep.assouad, t) for t in ts]
    return (
        SpectrumCurve(ts, [p[0] for p in pairs], "lower_bound", spec, rep.ambient_dim),
        SpectrumCurve(ts, [p[1] for p in pairs], "upper_bound", spec, rep.ambient_dim),
    )


def intermediate_curves(spec: FractalSpec, thetas: Sequence[float] = DEFAULT_THETAS):
    """Intermediate-dimension curves: one ``analytic`` curve or a lower/upper pair."""
    ts = np.asarray(thetas, dtype=float)
    rows = [intermediate_formula_or_bounds(spec, t) for t in ts]
    d = dims(spec).ambient_dim
    if all(r[2] for r in rows):
        return (SpectrumCurve(ts, [r[0] for r in rows], "analytic", spec, d),)
    return (
        SpectrumCurve(ts, [r[0] for r in rows], "lower_bound", spec, d),
        SpectrumCurve(ts, [r[1] for r in rows], "upper_bound", spec, d),
    )
