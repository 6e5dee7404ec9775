import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from reslab.errors import AtResonance, DegeneratePoint, PrecisionExhausted
from reslab.potential import PiecewisePotential, make_double_well, make_rectangular_well
from reslab.scattering import (SQRT_2PI, bound_state_diagnostic, closed_form_double_well,
                               double_well_coefficients, eigenfunction_at, solve,
                               solve_scattering, transmission_reflection, wronskian_residual)

WELL = make_double_well(1.0, 2.0, 436.0)
MODERATE = make_double_well(1.0, 0.5, 40.0)

real_k = st.floats(min_value=0.05, max_value=30.0)
complex_k = st.tuples(st.floats(min_value=0.1, max_value=30.0),
                      st.floats(min_value=-1.0, max_value=1.0)).map(lambda p: complex(*p))


def _rel(x, y, scale):
    return abs(complex(x) - complex(y)) / scale


def random_k(rng, n):
    real = rng.uniform(0.05, 40.0, n // 2)
    cplx = rng.uniform(0.1, 40.0, n - n // 2) + 1j * rng.uniform(-1.0, 1.0, n - n // 2)
    return np.concatenate([real, cplx])


# ---------------------------------------------------------------- free particle

def test_free_particle():
    V = PiecewisePotential.free()
    sol = solve_scattering(V, np.array([0.3, 1.0, 7.5 - 0.2j]))
    np.testing.assert_allclose(sol.a, 1.0, atol=1e-15)
    np.testing.assert_allclose(sol.b_plus, 0.0, atol=1e-15)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(sol.f_plus(x), np.exp(1j * np.outer(sol.k, x)), atol=1e-14)


def test_free_eigenfunction_normalisation():
    u = eigenfunction_at(solve_scattering(PiecewisePotential.free(), 1.0, digits=30), 0.0)
    assert abs(complex(u.u_plus) - 1 / math.sqrt(2 * math.pi)) < 1e-15


def test_free_wronskian_and_flux():
    sol = solve_scattering(PiecewisePotential.free(), np.linspace(0.1, 5, 11))
    assert wronskian_residual(sol, np.linspace(-2, 2, 5)) < 1e-14
    T, R, _ = transmission_reflection(sol)
    np.testing.assert_allclose(T, 1.0, rtol=1e-14)
    np.testing.assert_allclose(R, 0.0, atol=1e-28)


# ---------------------------------------------------------------- normalisation

def test_outgoing_normalisation(rng):
    k = random_k(rng, 20)
    sol = solve_scattering(MODERATE, k)
    xr = np.array([1.6, 4.0, 9.0])
    np.testing.assert_allclose(sol.f_plus(xr), np.exp(1j * np.outer(k, xr)), rtol=1e-12)
    np.testing.assert_allclose(sol.f_minus(-xr), np.exp(1j * np.outer(k, xr)), rtol=1e-12)


def test_a_plus_equals_a_minus(rng):
    k = random_k(rng, 200)
    sol = solve_scattering(WELL, k)
    np.testing.assert_allclose(sol.a_minus, sol.a, rtol=1e-11)


# ---------------------------------------------------------------- back ends

def test_backend_equivalence(rng):
    k = random_k(rng, 200)
    tm = solve_scattering(WELL, k)
    worst = 0.0
    for i, kk in enumerate(k):
        cf = closed_form_double_well(1.0, 2.0, 436.0, kk)
        for j, (pa, pb) in enumerate(cf.region_amplitudes_plus):
            ta, tb = tm.region_amplitudes_plus[j]
            scale = max(abs(pa), abs(pb))
            worst = max(worst, _rel(ta[i], pa, scale), _rel(tb[i], pb, scale))
        worst = max(worst, _rel(tm.a[i], cf.a, abs(cf.a)),
                    _rel(tm.b_plus[i], cf.b_plus, max(abs(cf.a), abs(cf.b_plus))))
    assert worst < 1e-12


def test_closed_form_extended_matches_transfer():
    k = mpmath.mpf("7.4875")
    cf = closed_form_double_well(1.0, 2.0, 436.0, k, digits=40)
    tm = solve_scattering(WELL, k, digits=40)
    with mpmath.workdps(40):
        assert abs(cf.a - tm.a) / abs(cf.a) < mpmath.mpf(10) ** -30
        assert abs(cf.b_plus - tm.b_plus) / abs(cf.a) < mpmath.mpf(10) ** -30


def test_closed_form_is_product_a1_a2(rng):
    for kk in rng.uniform(0.1, 30, 20):
        c = double_well_coefficients(1.0, 2.0, 436.0, kk)
        sol = solve_scattering(WELL, kk)
        assert _rel(sol.a, c["a1"] * c["a2"], abs(c["a"])) < 1e-12


def test_small_lambda_limit():
    sol = closed_form_double_well(1.0, 2.0, 1e-12, 1.3)
    assert abs(complex(sol.a) - 1) < 1e-10
    assert abs(complex(sol.b_plus)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(k=complex_k)
def test_branch_flip_closed_form(k):
    c1 = double_well_coefficients(1.0, 2.0, 436.0, k, kt_sign=1)
    c2 = double_well_coefficients(1.0, 2.0, 436.0, k, kt_sign=-1)
    scale = max(abs(c1["a"]), 1e-300)
    for key in ("a", "a1", "a2", "b_plus", "A", "A_bar"):
        assert _rel(c1[key], c2[key], max(abs(c1[key]), scale)) < 1e-12
    # the region functions are unchanged, their two exponentials trade places
    for p, q in (("c1", "c2"), ("c3", "c4")):
        s = max(abs(c1[p]), abs(c1[q]))
        assert _rel(c1[p], c2[q], s) < 1e-12 and _rel(c1[q], c2[p], s) < 1e-12


@settings(max_examples=50, deadline=None)
@given(k=complex_k, signs=st.tuples(st.sampled_from([1, -1]), st.sampled_from([1, -1]),
                                   st.sampled_from([1, -1])))
def test_branch_invariance_transfer(k, signs):
    ref = solve_scattering(MODERATE, k)
    flipped = solve_scattering(MODERATE, k, branch_signs=signs)
    assert _rel(ref.a, flipped.a, abs(ref.a)) < 1e-12
    assert _rel(ref.b_plus, flipped.b_plus, abs(ref.a)) < 1e-12
    x = np.linspace(-2, 2, 17)
    np.testing.assert_allclose(flipped.f_plus(x), ref.f_plus(x), rtol=1e-10, atol=1e-12)


# ---------------------------------------------------------------- identities

@settings(max_examples=100, deadline=None)
@given(k=real_k)
def test_flux_conservation(k):
    for V in (WELL, MODERATE, make_rectangular_well(1.0, 30.0)):
        T, Rp, Rm = transmission_reflection(solve_scattering(V, k))
        assert abs(T + Rp - 1) < 1e-10
        assert abs(T + Rm - 1) < 1e-10


def test_flux_identity_closed_form(rng):
    for kk in rng.uniform(0.1, 30, 50):
        c = closed_form_double_well(1.0, 2.0, 436.0, kk)
        assert abs(abs(c.b_plus) ** 2 + 1 - abs(c.a) ** 2) / abs(c.a) ** 2 < 1e-10


def test_wronskian_real_k(rng):
    x = np.concatenate([np.linspace(-5, 5, 16), [-2.0, -0.5, 0.5, 2.0]])
    sol = solve_scattering(WELL, rng.uniform(0.1, 30, 50))
    assert wronskian_residual(sol, x) < 1e-10


def test_wronskian_complex_k(rng):
    x = np.linspace(-4, 4, 20)
    k = rng.uniform(0.5, 30, 50) + 1j * rng.uniform(-1, 1, 50)
    assert wronskian_residual(solve_scattering(WELL, k), x) < 1e-8


def test_wronskian_needs_two_samples():
    with pytest.raises(ValueError):
        wronskian_residual(solve_scattering(WELL, 1.0), [0.0])


def test_parity(rng):
    k = rng.uniform(0.1, 20, 10)
    x = rng.uniform(-4, 4, 30)
    sol = solve_scattering(MODERATE, k)
    up = eigenfunction_at(sol, x).u_plus
    um_mirror = eigenfunction_at(sol, -x).u_minus
    np.testing.assert_allclose(um_mirror, up, rtol=1e-11, atol=1e-13)


# ---------------------------------------------------------------- eigenfunctions

def test_middle_region_formula(rng):
    for kk in rng.uniform(0.1, 25, 10):
        c = double_well_coefficients(1.0, 2.0, 436.0, kk)
        sol = solve_scattering(WELL, kk, digits=None)
        x = 0.37
        expected = (c["a1"] * np.cos(kk * x) + 1j * c["a2"] * np.sin(kk * x)) / (SQRT_2PI * c["a"])
        got = eigenfunction_at(sol, np.array([x])).u_plus
        assert abs(complex(np.ravel(got)[0]) - expected) <= 1e-11 * abs(expected)


def test_eigenfunction_bound(rng):
    k = rng.uniform(0.1, 30, 100)
    x = rng.uniform(-5, 5, 100)
    for kk, xx in zip(k, x):
        sol = solve_scattering(MODERATE, kk)
        u = complex(np.ravel(eigenfunction_at(sol, np.array([xx])).u_plus)[0])
        r = int(MODERATE.region_index(np.array([xx]))[0])
        alpha, beta = sol.region_amplitudes_plus[r]
        q = sol.wavenumbers[r]
        bound = (abs(alpha) * abs(np.exp(1j * q * xx)) + abs(beta) * abs(np.exp(-1j * q * xx)))
        assert abs(u) <= bound / (SQRT_2PI * abs(sol.a)) * (1 + 1e-12)


def test_at_resonance_raises():
    V = PiecewisePotential.free()
    sol = solve_scattering(V, 1.0, digits=20)
    object.__setattr__(sol, "a", mpmath.mpc(0))
    with pytest.raises(AtResonance):
        eigenfunction_at(sol, 0.0)


# ---------------------------------------------------------------- errors and scans

def test_k_zero_is_degenerate():
    with pytest.raises(DegeneratePoint):
        solve_scattering(WELL, 0.0)
    with pytest.raises(DegeneratePoint):
        double_well_coefficients(1, 2, 436, 0.0)


def test_overflow_reports_digits():
    V = make_double_well(1.0, 2.0, 1e6)
    with pytest.raises(PrecisionExhausted) as info:
        solve_scattering(V, 1.0)
    assert info.value.digits_needed > 16
    sol = solve_scattering(V, 1.0, digits=info.value.digits_needed)
    assert mpmath.isfinite(sol.a)


def test_transmission_rejects_complex():
    with pytest.raises(ValueError):
        transmission_reflection(solve_scattering(WELL, 1.0 - 0.1j))


def test_deep_minimum_of_a_near_root():
    # Re z from hbar z_SI = 1.0967e-19 with hbar / a0 as the momentum unit
    re_z = 1.0967e-19 / (1.054571817e-34 / 7.2e-15)
    k = np.linspace(7.0, 8.0, 20001)
    a = np.abs(solve(WELL, k, backend="closed_form").a)
    k_min = k[np.argmin(a)]
    assert abs(k_min - re_z) < 1e-3
    assert a.min() < 1e-3 * np.median(a)


def test_resonant_transmission_peak():
    with mpmath.workdps(50):
        from reslab.resonance import find_resonances
        z = find_resonances(WELL, (7, 8), 1e-3, digits=50)[0].z
        center = mpmath.re(z)
        T = [transmission_reflection(solve_scattering(WELL, center + d, digits=50))[0]
             for d in (mpmath.mpf("-1e-30"), mpmath.mpf(0), mpmath.mpf("1e-30"))]
    assert T[1] > 0.99 and T[0] < 1e-3 and T[2] < 1e-3


def test_bound_state_diagnostic():
    assert bound_state_diagnostic(make_double_well(1.0, 2.0, 436.0)) is False
    assert bound_state_diagnostic(PiecewisePotential.free()) is False
    assert bound_state_diagnostic(PiecewisePotential((-1.0, 1.0), (-5.0,))) is True


def test_negative_well_has_negative_eigenvalue():
    # brute force: finite differences on a large box
    B, n = 20.0, 4000
    x = np.linspace(-B, B, n)
    h = x[1] - x[0]
    v = np.where(np.abs(x) <= 1.0, -5.0, 0.0)
    w = eigh_tridiagonal(2 / h ** 2 + v, -np.ones(n - 1) / h ** 2, select="i", select_range=(0, 0))[0]
    assert w[0] < 0
