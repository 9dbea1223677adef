import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclab import fields
from fraclab.errors import PreconditionError
from fraclab.grid import Field, Grid, translate
from fraclab.inequalities import (
    bessel_pairing_check, compactness_diagnostic, gn_certify, gn_indices_solve, gn_ratio,
    multiplier_series_check, mollifier, polya_szego_certify, reference_grid, regularized_energy,
    series_coefficients, series_energy, sharp_sobolev_constant, sobolev_certify, sobolev_exponent,
)
from fraclab.rearrange import schwarz_rearrange


def binom_partial(s, q, K):
    """Exact rational partial sum 1 - sum (-1)^(k+1) binom(s,k) q^k."""
    s, q = Fraction(s), Fraction(q)
    total, b = Fraction(1), Fraction(1)
    for k in range(1, K + 1):
        b = b * (s - k + 1) / k
        total -= (-1) ** (k + 1) * b * q**k
    return total


# -- Polya-Szego -----------------------------------------------------------------

def test_ps_equality_at_s0():
    u = fields.random_bandlimited(Grid(1, 256, 2 * np.pi), seed=4)
    rep = polya_szego_certify(u, 0.0)
    assert rep.lhs == rep.rhs and rep.slack == 0.0


def test_ps_fixed_point_gaussian():
    rep = polya_szego_certify(fields.gaussian(Grid(1, 256, 20.0)), 0.5)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-12)


def test_ps_two_bump_positive_slack_under_refinement():
    slacks = []
    for N in (256, 512):
        g = Grid(1, N, 20.0)
        rep = polya_szego_certify(fields.two_bump(g), 0.5)
        assert rep.satisfied
        slacks.append(rep.slack)
    assert min(slacks) > 0.05
    assert slacks[1] == pytest.approx(slacks[0], rel=0.05)


def test_ps_range():
    with pytest.raises(PreconditionError):
        polya_szego_certify(fields.gaussian(Grid(1, 8, 1.0)), 1.5)


# -- series ------------------------------------------------------------------------

def test_series_frozen_values():
    res = multiplier_series_check(1.0, 0.5, 3)
    assert [t.partial for t in res.terms] == pytest.approx([0.75, 0.71875, 0.7109375], abs=1e-15)
    assert res.limit == pytest.approx(2**-0.5, rel=1e-15)


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("xi2", [0.1, 1.0, 7.0])
def test_series_against_exact_rationals(s, xi2):
    res = multiplier_series_check(xi2, s, 12)
    for t in res.terms:
        ref = binom_partial(Fraction(s), 1 / (1 + Fraction(xi2)), t.k)
        assert t.partial == pytest.approx(float(ref), rel=1e-13)


def test_series_coefficient_sign():
    assert series_coefficients(0.5, 2)[1] == pytest.approx(1 / 8)


@settings(max_examples=50, deadline=None)
@given(xi2=st.floats(1e-3, 1e3), s=st.floats(0.01, 0.99))
def test_series_positive_and_monotone(xi2, s):
    res = multiplier_series_check(xi2, s, 15)
    assert all(t.coefficient > 0 for t in res.terms)
    errs = [abs(t.partial - res.limit) for t in res.terms]
    ulp = 4 * np.finfo(float).eps
    assert all(b <= a + ulp for a, b in zip(errs, errs[1:]))
    assert all(t.partial >= res.limit - ulp for t in res.terms)


def test_series_at_zero_frequency():
    res = multiplier_series_check(0.0, 0.5, 2000)
    assert res.limit == 0.0 and 0 < res.partial < 0.02


def test_series_preconditions():
    for bad in [(1.0, 0.0, 3), (1.0, 1.0, 3), (-1.0, 0.5, 3), (1.0, 0.5, 0)]:
        with pytest.raises(PreconditionError):
            multiplier_series_check(*bad)


# -- Bessel pairings --------------------------------------------------------------

def test_pairing_symmetric_equality():
    u = fields.gaussian(Grid(1, 128, 20.0))
    rep = bessel_pairing_check(u, 2)
    assert rep.lhs == pytest.approx(rep.rhs, rel=1e-12)


def test_pairing_translated_bump_increases():
    g = Grid(1, 128, 20.0)
    u = fields.two_bump(g)
    rep = bessel_pairing_check(u, 1)
    assert rep.satisfied and rep.rhs > rep.lhs * (1 + 1e-3)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("g", [Grid(1, 64, 10.0), Grid(2, 16, 6.0)])
def test_pairing_nonnegative_fields(k, g):
    for seed in range(10):
        assert bessel_pairing_check(fields.random_nonnegative(g, seed=seed), k).satisfied


def test_series_energy_orders_like_direct_energy():
    g = Grid(1, 32, 2 * np.pi)
    for seed in range(10):
        u = fields.random_nonnegative(g, seed=seed)
        us = schwarz_rearrange(u)
        direct = regularized_energy(us, 0.5) <= regularized_energy(u, 0.5)
        series = series_energy(us, 0.5, 20) <= series_energy(u, 0.5, 20)
        assert direct and series


def test_series_energy_converges_on_mean_zero_fields():
    g = Grid(1, 32, 2 * np.pi)
    u = fields.random_bandlimited(g, seed=2, kmax=6)
    u = u.like(u.values - u.values.mean())
    assert series_energy(u, 0.5, 60) == pytest.approx(regularized_energy(u, 0.5), rel=1e-6)


# -- Gagliardo-Nirenberg ------------------------------------------------------------

def test_gn_examples():
    idx = gn_indices_solve(2, 1, 2, 2, 4, 4)
    assert idx.theta == pytest.approx(0.5, abs=1e-15) and idx.route == "l2"
    idx = gn_indices_solve(1, 1, 2, 2, 4, 4)
    assert idx.theta == pytest.approx(0.25, abs=1e-15)
    assert abs(idx.residual()) < 1e-12


def test_gn_hls_route():
    # n=3, s=1, p=2, r=2, m=q=3: theta = (1 - 3/2) / (3 (1/2 - 1/3 - 1/2)) = 1/2
    idx = gn_indices_solve(3, 1, 2, 2, 3, 3)
    assert idx.theta == pytest.approx(0.5) and idx.p0 == pytest.approx(6.0)
    idx = gn_indices_solve(3, 1, 1.5, 2, 2.5, 2.5)
    assert idx.route == "hls" and abs(idx.residual()) < 1e-12


@pytest.mark.parametrize("args,constraint", [
    ((2, 1, 2, 3, 4, 4), "p out of range"),
    ((1, 1, 2, 3, 4, 4), "0 < s < n"),
    ((1, 2, 2, 2, 4, 4), "0 < s <= n (L2 form)"),
    ((2, 1, 2, 2, 2, 2), "theta != 0"),
    ((4, 1, 2, 2, 4, 4), "n in {1,2,3}"),
    ((2, 1, 2, 2, 0, 4), "m != 0"),
])
def test_gn_rejections_name_the_constraint(args, constraint):
    with pytest.raises(PreconditionError) as exc:
        gn_indices_solve(*args)
    assert exc.value.constraint == constraint


def test_gn_ratio_gaussian_below_constant():
    g = Grid(1, 256, 40.0)
    u = fields.gaussian(g, width=2.0)
    idx = gn_indices_solve(1, 1, 2, 2, 4, 4)
    rep = gn_certify(u, idx)
    assert rep.satisfied and rep.ratio < 10
    # closed form: ||u||_4 = (pi w^2/2)^(1/4) * ..., use the direct integrals
    w = 2.0
    l4 = (w * math.sqrt(math.pi / 2)) ** 0.25
    l2 = (w * math.sqrt(math.pi)) ** 0.5
    grad = (math.sqrt(math.pi) / (2 * w)) ** 0.5
    assert rep.ratio == pytest.approx(l4 / (grad**0.25 * l2**0.75), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(lam=st.floats(1e-3, 1e3))
def test_gn_ratio_amplitude_invariant(lam):
    u = fields.gaussian(Grid(1, 128, 30.0), width=2.0)
    idx = gn_indices_solve(1, 1, 2, 2, 4, 4)
    assert gn_ratio(u * lam, idx) == pytest.approx(gn_ratio(u, idx), rel=1e-12)


def test_gn_zero_field():
    g = Grid(1, 16, 4.0)
    with pytest.raises(PreconditionError):
        gn_ratio(Field(g, np.zeros(16)), gn_indices_solve(1, 1, 2, 2, 4, 4))


# -- sharp Sobolev --------------------------------------------------------------------

def mp_sharp(n, s):
    n, s = mpmath.mpf(n), mpmath.mpf(s)
    return mpmath.pi ** (s / 2) * mpmath.gamma((n - s) / 2) / mpmath.gamma((n + s) / 2) \
        * (mpmath.gamma(n) / mpmath.gamma(n / 2)) ** (s / n)


def test_sharp_constant_examples():
    assert sharp_sobolev_constant(2, 1) == pytest.approx(2 * math.sqrt(math.pi), abs=1e-12)
    assert sharp_sobolev_constant(3, 1e-9) == pytest.approx(1.0, abs=1e-8)
    ref = math.sqrt(math.pi) * (2 / (math.sqrt(math.pi) / 2)) ** (1 / 3)
    assert sharp_sobolev_constant(3, 1) == pytest.approx(ref, rel=1e-12)


def test_sharp_constant_sweep_against_mpmath():
    mpmath.mp.dps = 30
    pts = [(n, s) for n in (1, 2, 3) for s in np.linspace(0.1, 0.9 * n, 7)][:20]
    assert len(pts) == 20
    for n, s in pts:
        assert sharp_sobolev_constant(n, float(s)) == pytest.approx(float(mp_sharp(n, s)), rel=1e-12)


def test_sobolev_exponent_and_boundary():
    assert sobolev_exponent(2, 0.5, 2) == 4.0
    with pytest.raises(PreconditionError):
        sobolev_certify(fields.bump(Grid(1, 64, 8.0)), 1, 1.0, 2)


def test_sobolev_certify_scaling():
    g = Grid(2, 64, 20.0)
    u = fields.gaussian(g, width=2.0)
    a = sobolev_certify(u, 2, 0.5, 2)
    b = sobolev_certify(u * 7.5, 2, 0.5, 2)
    assert a.satisfied and a.metadata["q"] == 4.0
    assert b.ratio == pytest.approx(a.ratio, rel=1e-12)
    with pytest.raises(PreconditionError):
        sobolev_certify(u, 2, 0.5, 1.5)


# -- compactness ---------------------------------------------------------------------

def test_mollifier_unit_mass():
    g = reference_grid(1)
    for ell in (2, 4, 8, 16):
        phi = mollifier(g, ell)
        assert g.cell_volume * math.fsum(phi.values) == pytest.approx(1.0, abs=1e-10)


def test_compactness_decreasing_and_order():
    v = compactness_diagnostic(0.5, [2, 4, 8, 16])
    assert all(b < a for a, b in zip(v, v[1:])) and v[-1] > 0
    lo = compactness_diagnostic(0.1, [4])[0]
    hi = compactness_diagnostic(0.9, [4])[0]
    assert hi < lo


def test_compactness_tail_rate():
    # ||phi^l * G_s - G_s||_1 ~ C l^-s once phi^l is inside the singular core
    v = compactness_diagnostic(0.5, [8, 16])
    assert v[1] / v[0] == pytest.approx(2**-0.5, rel=0.02)


def test_compactness_preconditions():
    with pytest.raises(PreconditionError):
        compactness_diagnostic(0.5, [4, 2])
    with pytest.raises(PreconditionError):
        compactness_diagnostic(1.5, [2, 4])
