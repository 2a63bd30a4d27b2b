import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimkit import (
    FIGURE6_CARPET,
    Carpet,
    Countable,
    DomainError,
    ExtrapolationError,
    Identity,
    LogCorrection,
    Percolation,
    PowerLaw,
    SelfSimilarLine,
    SpectrumCurve,
    Spiral,
)
from dimkit.analytic import (
    ALMOST_SURE,
    ASSOUAD_REGIME,
    BOX_REGIME,
    DEFAULT_THETAS,
    INDETERMINATE,
    NO_CONCENTRATION,
    OSC_FAILED,
    UPPER,
    DimensionReport,
    HolderExponents,
    analytic_spectrum_curve,
    assouad_spectrum_formula,
    carpet_constants,
    carpet_transition,
    dims,
    holder_transform,
    intermediate_curves,
    intermediate_formula_or_bounds,
    lemma1_bounds,
    lemma1_curves,
    lemma3_bound,
    percolation_phi_regime,
    rho_formula,
    spectrum_flags,
    spectrum_rho,
    winding_bounds,
)
from dimkit.generators import carpet_derived

import strategies

mpmath.mp.dps = 40


def mp_carpet(spec):
    """High-precision oracle for the carpet constants (rho, H, B, A, h)."""
    s = carpet_derived(spec)
    lm, ln = mpmath.log(spec.m), mpmath.log(spec.n)
    rho = lm / ln
    Z = mpmath.fsum(mpmath.mpf(c) ** rho for c in s.C_list)
    H = mpmath.log(Z) / lm
    B = mpmath.log(s.M) / lm + mpmath.log(mpmath.mpf(s.N) / s.M) / ln
    A = mpmath.log(s.M) / lm + mpmath.log(s.C_max) / ln
    h = -mpmath.fsum(mpmath.mpf(c) ** rho * ((rho - 1) * mpmath.log(c) - H * lm) for c in s.C_list) / Z
    return rho, H, B, A, h


# ---------------------------------------------------------------- dims

def test_dims_countable_chain():
    r = dims(Countable(1))
    assert (r.hausdorff, r.lower_box, r.upper_box, r.assouad) == (0, 0.5, 0.5, 1)


def test_dims_figure6_carpet():
    r = dims(FIGURE6_CARPET)
    # frozen from the high-precision oracle
    assert r.hausdorff == pytest.approx(1.3496838201955774, abs=1e-12)
    assert r.upper_box == pytest.approx(1.3690702464285425, abs=1e-12)
    assert r.assouad == pytest.approx(1.6309297535714575, abs=1e-12)


def test_dims_percolation_flagged():
    r = dims(Percolation(2, 2, 0.8))
    assert r.upper_box == pytest.approx(2 + math.log(0.8) / math.log(2), abs=1e-12)
    assert r.upper_box == pytest.approx(1.6781, abs=1e-4)
    assert r.assouad == 2
    assert set(r.flags.values()) == {ALMOST_SURE}


def test_dims_selfsimilar():
    cantor = SelfSimilarLine(((1 / 3, 0.0), (1 / 3, 2 / 3)))
    r = dims(cantor)
    assert r.hausdorff == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert r.assouad == pytest.approx(r.hausdorff, abs=1e-12)
    overlapping = SelfSimilarLine(((0.6, 0.0), (0.6, 0.4)))
    r = dims(overlapping)
    assert OSC_FAILED in r.notes and r.flags["upper_box"] == UPPER
    assert r.upper_box <= 1


@pytest.mark.parametrize("spec", [FIGURE6_CARPET, Carpet(3, 5, frozenset({(0, 0), (1, 2), (1, 4), (2, 1)}))])
def test_carpet_constants_match_high_precision(spec):
    k = carpet_constants(spec)
    for ours, ref in zip((k.rho, k.hausdorff, k.box, k.assouad, k.entropy), mp_carpet(spec)):
        assert ours == pytest.approx(float(ref), abs=1e-12)


def test_uniform_fibre_carpet_collapses():
    spec = Carpet(2, 3, frozenset({(0, 0), (0, 2), (1, 1), (1, 2)}))
    r = dims(spec)
    assert r.hausdorff == r.upper_box == r.assouad


def test_report_rejects_disorder():
    with pytest.raises(DomainError):
        DimensionReport(0.6, 0.5, 0.5, 1.0, 1)
    with pytest.raises(DomainError):
        DimensionReport(0.0, 0.5, 0.5, 1.5, 1)


@given(strategies.specs())
def test_report_chain(spec):
    r = dims(spec)
    assert -1e-12 <= r.hausdorff <= r.lower_box + 1e-12 <= r.upper_box + 2e-12 <= r.assouad + 3e-12
    assert r.assouad <= r.ambient_dim + 1e-12


# ---------------------------------------------------------------- spectrum formula

def test_spectrum_examples():
    assert assouad_spectrum_formula(Countable(1), 0.5) == 1.0
    assert assouad_spectrum_formula(Spiral(2.0), 0.5) == pytest.approx(1.5, abs=1e-12)
    assert assouad_spectrum_formula(Spiral(2.0), 2 / 3) == 2.0
    assert assouad_spectrum_formula(Spiral(2.0), 0.66) < 2.0
    A = dims(FIGURE6_CARPET).assouad
    for t in (math.log(2) / math.log(3), 0.7, 0.95):
        assert assouad_spectrum_formula(FIGURE6_CARPET, t) == A


def test_spectrum_rejects_theta_outside_unit_interval():
    for t in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            assouad_spectrum_formula(Countable(1), t)


def test_spectrum_flags():
    assert spectrum_flags(Percolation(2, 2, 0.8)) == (ALMOST_SURE,)
    assert spectrum_flags(SelfSimilarLine(((0.5, 0.0), (0.25, 0.75)))) == (NO_CONCENTRATION,)
    assert OSC_FAILED in spectrum_flags(SelfSimilarLine(((0.6, 0.0), (0.6, 0.4))))
    assert spectrum_flags(Countable(2)) == ()
    pc = analytic_spectrum_curve(Percolation(2, 2, 0.8))
    assert np.all(pc.values == dims(Percolation(2, 2, 0.8)).upper_box)


@given(strategies.specs())
def test_spectrum_respects_general_bounds(spec):
    r = dims(spec)
    for t in DEFAULT_THETAS:
        v = assouad_spectrum_formula(spec, t)
        lo, hi = lemma1_bounds(r.upper_box, r.assouad, t)
        assert lo - 1e-12 <= v <= hi + 1e-12


@given(strategies.carpets(non_uniform=True))
def test_carpet_spectrum_strictly_below_general_bound(spec):
    r = dims(spec)
    rho = carpet_transition(spec)
    for t in DEFAULT_THETAS[DEFAULT_THETAS < rho]:
        v = assouad_spectrum_formula(spec, t)
        assert v < lemma1_bounds(r.upper_box, r.assouad, t)[1]


def test_carpet_transition_beats_general_transition():
    for spec in strategies.random_carpets(50, seed=11):
        r = dims(spec)
        assert carpet_transition(spec) > 1 - r.upper_box / r.assouad


def test_figure6_transition_location():
    rho = math.log(2) / math.log(3)
    assert carpet_transition(FIGURE6_CARPET) == rho
    below = [assouad_spectrum_formula(FIGURE6_CARPET, rho * (1 - e)) for e in (1e-2, 1e-4, 1e-6)]
    assert np.all(np.diff(below) > 0)
    assert below[-1] == pytest.approx(dims(FIGURE6_CARPET).assouad, abs=1e-5)


# ---------------------------------------------------------------- intermediate dimensions

def test_intermediate_countable_exact():
    lo, hi, exact = intermediate_formula_or_bounds(Countable(4), 0.5)
    assert exact and lo == hi == pytest.approx(1 / 9, abs=1e-15)


def test_intermediate_figure6_carpet():
    k = carpet_constants(FIGURE6_CARPET)
    lo, hi, exact = intermediate_formula_or_bounds(FIGURE6_CARPET, 0.5)
    assert not exact
    assert lo >= k.hausdorff + 0.5 * (math.log(3) - k.entropy) / math.log(2) - 1e-12
    assert hi == k.box


def test_intermediate_collapses_when_box_equals_assouad():
    spec = Carpet(2, 3, frozenset({(0, 0), (0, 2), (1, 1), (1, 2)}))
    b = dims(spec).upper_box
    for t in (0.05, 0.5, 0.95):
        lo, hi, _ = intermediate_formula_or_bounds(spec, t)
        assert lo == pytest.approx(b, abs=1e-12) and hi == pytest.approx(b, abs=1e-12)


@given(strategies.specs(), st.sampled_from(list(DEFAULT_THETAS)))
def test_intermediate_lower_below_upper(spec, t):
    lo, hi, _ = intermediate_formula_or_bounds(spec, t)
    assert lo <= hi + 1e-12


@given(st.floats(0.05, 20), st.floats(0.01, 0.99))
def test_countable_intermediate_inside_envelope(p, t):
    b = 1 / (1 + p)
    v = intermediate_formula_or_bounds(Countable(p), t)[0]
    assert lemma3_bound(b, 1.0, t) - 1e-12 <= v <= b + 1e-12


def test_intermediate_curves_shape():
    (exact,) = intermediate_curves(Countable(1))
    assert exact.provenance == "analytic"
    lo, hi = intermediate_curves(FIGURE6_CARPET)
    assert lo.provenance == "lower_bound" and hi.provenance == "upper_bound"
    assert np.all(lo.values <= hi.values + 1e-12)


# ---------------------------------------------------------------- general bounds

def test_lemma1_examples():
    assert lemma1_bounds(0.5, 1, 0.5) == (0.5, 1)
    assert lemma1_bounds(0, 0.7, 0.3) == (0, 0)
    assert lemma1_bounds(2, 2, 0.6) == (2, 2)
    with pytest.raises(DomainError):
        lemma1_bounds(1.2, 1.0, 0.5)


def test_lemma3_examples():
    assert lemma3_bound(0.5, 1, 0.9) == pytest.approx(1 - 0.5 / 0.9, abs=1e-15)
    assert lemma3_bound(0.5, 1, 0.9) == pytest.approx(0.444, abs=1e-3)
    for t in (0.1, 0.5, 0.9):
        assert lemma3_bound(0.7, 0.7, t) == 0.7
    assert lemma3_bound(0.5, 1, 0.01) == 0.0
    with pytest.raises(DomainError):
        lemma3_bound(1.2, 1.0, 0.5)


def test_lemma1_curves():
    lo, hi = lemma1_curves(Countable(1))
    assert np.all(lo.values == 0.5)
    assert hi.value_at(0.25) == pytest.approx(2 / 3, abs=1e-12)


# ---------------------------------------------------------------- Hoelder images

def interval_curve():
    ts = np.linspace(0.001, 0.999, 999)
    return SpectrumCurve(ts, np.ones(ts.size), "analytic")


def test_holder_identity_is_exact():
    curve = analytic_spectrum_curve(Spiral(2.0))
    lo, hi = holder_transform(curve, HolderExponents(1, 1))
    assert np.array_equal(lo.values, curve.values) and np.array_equal(hi.values, curve.values)


def test_holder_lower_below_upper():
    curve = analytic_spectrum_curve(Countable(1))
    lo, hi = holder_transform(curve, HolderExponents(0.5, 2.0), [0.05, 0.1, 0.2])
    assert np.all(lo.values <= hi.values)
    assert lo.provenance == "lower_bound" and hi.provenance == "upper_bound"


def test_holder_rules_out_fast_maps_onto_spiral():
    # a map from an interval onto the spiral cannot be too Hoelder
    thetas = np.round(np.arange(1, 66) / 100, 2)
    spiral = np.array([assouad_spectrum_formula(Spiral(2.0), t) for t in thetas])
    for alpha, ok in ((0.8, False), (2 / 3, True), (0.75, True)):
        hi = holder_transform(interval_curve(), HolderExponents(alpha, 1.0), thetas)[1]
        assert bool(np.all(spiral <= hi.values + 1e-12)) is ok


def test_holder_extrapolation():
    curve = SpectrumCurve([0.4, 0.6], [1.0, 1.0], "analytic")
    with pytest.raises(ExtrapolationError):
        holder_transform(curve, HolderExponents(0.5, 1.0), [0.5])


def test_holder_exponents_validated():
    for a, b in ((0, 1), (1.2, 1.5), (0.5, 0.9)):
        with pytest.raises(DomainError):
            HolderExponents(a, b)


# ---------------------------------------------------------------- winding

def test_winding_examples():
    assert winding_bounds(2, 1) == (Fraction(3, 4), Fraction(2, 3))
    assert winding_bounds(1, 1) == (Fraction(2, 3), Fraction(1, 2))
    assert winding_bounds(2, 10**9)[1] == 1
    assert winding_bounds(2.0, 1e12)[1] == 1.0
    with pytest.raises(DomainError):
        winding_bounds(0.5, 1)


def test_winding_sharp_below_spectrum_bound():
    for p in np.linspace(1, 10, 37):
        for b in np.linspace(1, 10, 37):
            sb, sh = winding_bounds(float(p), float(b))
            assert sh <= sb + 1e-15


# ---------------------------------------------------------------- rho formula

@pytest.mark.parametrize("spec", [FIGURE6_CARPET, Spiral(2.0), Spiral(5.0), Countable(1), Countable(3)])
def test_rho_identity(spec):
    r = dims(spec)
    rho = spectrum_rho(spec)
    for t in np.arange(1, 10) / 10:
        v = rho_formula(r.upper_box, r.assouad, rho, t)
        assert v == pytest.approx(assouad_spectrum_formula(spec, t), abs=1e-12)


def test_rho_formula_at_transition():
    assert rho_formula(0.4, 1.3, 0.6, 0.6) == 1.3
    assert spectrum_rho(Spiral(2.0)) == pytest.approx(2 / 3)
    with pytest.raises(DomainError):
        rho_formula(0.4, 1.3, 1.0, 0.5)
    with pytest.raises(DomainError):
        spectrum_rho(Percolation(2, 2, 0.8))


# ---------------------------------------------------------------- percolation phi regimes

def test_percolation_regimes():
    assert percolation_phi_regime(PowerLaw(0.5)) == BOX_REGIME
    assert percolation_phi_regime(Identity()) == ASSOUAD_REGIME
    assert percolation_phi_regime(LogCorrection(1.0)) == INDETERMINATE
