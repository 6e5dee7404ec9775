import numpy as np
import pytest

from reslab import spectral as sp
from reslab.errors import NotApplicable
from reslab.pole import (
    calibrate_pole,
    gamow_projection,
    gamow_transform_closed_form,
    gamow_transform_numeric,
    laurent_split_diagnostic,
    pole_approximation_evolution,
    pole_prediction,
    pole_window_mass,
)
from reslab.potential import PiecewisePotential
from reslab.resonance import Resonance, gamow_from_resonance, truncate, truncated_norm2


@pytest.fixture(scope="module")
def gamow_coeffs(moderate_well, moderate_resonances, moderate_gamow):
    psi = truncate(moderate_gamow, 1.0).function
    return sp.forward_transform(psi, moderate_well, resonances=moderate_resonances[:1], tol=1e-3,
                                raise_on_defect=False)


def test_pole_amplitude_is_pure_exponential(moderate_resonances):
    r = moderate_resonances[0]
    ts = np.linspace(0.0, 50.0, 11)
    amps = np.array([a for _, a in pole_approximation_evolution(r, (0.3, 0.4), ts)])
    assert np.allclose(amps / amps[0], np.exp((-1j * r.E - r.Gamma) * ts), rtol=1e-13, atol=0)


def test_pole_amplitude_constant_as_gamma_vanishes():
    r = Resonance(2.0 - 1e-14j, 1.0, None, "none")
    ts = np.linspace(0.0, 100.0, 5)
    amps = np.array([a for _, a in pole_approximation_evolution(r, (1.0, 1.0), ts)])
    assert np.ptp(np.abs(amps)) < 1e-10 * np.abs(amps[0])


def test_broad_resonance_warns():
    r = Resonance(2.0 - 0.5j, 1.0, None, "none")
    with pytest.warns(UserWarning, match="Gamma/E"):
        pole_approximation_evolution(r, (1.0, 1.0), [0.0])


def test_pole_path_tracks_window_mass(moderate_resonances, moderate_gamow, gamow_coeffs):
    r = moderate_resonances[0]
    t0, t1 = sp.exponential_window(r.E, r.Gamma)
    cal = calibrate_pole(gamow_coeffs, moderate_gamow, t0)
    ts = np.linspace(t0, t1, 7)
    exact = sp.evolve(gamow_coeffs, t_list=ts, x_grid=np.array([0.0])).window_mass
    pole = pole_window_mass(r, cal, moderate_gamow, ts)
    assert np.max(np.abs(pole - exact) / exact) < 0.1
    assert abs(abs(cal.c) - 1) < 1e-12


def test_gamow_projection_at_time_zero(gamow_coeffs, moderate_gamow):
    # <1_L G, 1_ell G> / |1_L G|^2 = |1_ell G|^2 / |1_L G|^2
    expected = truncated_norm2(moderate_gamow, 1.0) / truncated_norm2(moderate_gamow, 1.5)
    # the missing spectral mass (Parseval defect) bounds the error at t = 0
    tol = 2 * gamow_coeffs.parseval_defect
    assert abs(gamow_projection(gamow_coeffs, moderate_gamow, 0.0) - expected) < tol
    assert abs(gamow_projection(gamow_coeffs, moderate_gamow, 0.0, window=1.0) - 1) < tol


def test_laurent_principal_part_dominates(gamow_coeffs, moderate_resonances, moderate_gamow):
    r = moderate_resonances[0]
    k0, hw = r.z_complex.real, r.Gamma / (2 * np.sqrt(r.E))
    split = laurent_split_diagnostic(gamow_coeffs, moderate_gamow, (k0 - 20 * hw, k0 + 20 * hw))
    assert split.ratio > 10
    assert split.outside_mass > 0


def test_laurent_ratio_falls_as_interval_widens(gamow_coeffs, moderate_resonances, moderate_gamow):
    r = moderate_resonances[0]
    k0, hw = r.z_complex.real, r.half_width
    ratios = [laurent_split_diagnostic(gamow_coeffs, moderate_gamow, (max(k0 - m * hw, 1e-3), k0 + m * hw)).ratio
              for m in (20, 200, 2000)]
    full = laurent_split_diagnostic(gamow_coeffs, moderate_gamow, (1e-3, gamow_coeffs.K_max)).ratio
    assert all(a > b for a, b in zip(ratios, ratios[1:] + [full]))


def test_laurent_split_needs_resonance(gamow_coeffs):
    with pytest.raises(NotApplicable):
        laurent_split_diagnostic(gamow_coeffs, None, (1.0, 2.0))
    free = PiecewisePotential.free(1.0)
    c = sp.forward_transform(gamow_coeffs.psi, free, K_max=5.0, K_limit=5.0, tol=1.0)
    with pytest.raises(NotApplicable):
        laurent_split_diagnostic(c, None, (1.0, 2.0))


@pytest.mark.parametrize("which", [0, 1])
def test_closed_form_transform_matches_quadrature(moderate_well, moderate_resonances, which):
    G = gamow_from_resonance(moderate_well, moderate_resonances[which])
    k0 = moderate_resonances[which].z_complex.real
    for k in (0.3, k0 - 0.01, k0, k0 + 0.2, 7.5):
        cf = gamow_transform_closed_form(G, k)
        num = gamow_transform_numeric(G, k)
        assert abs(cf - num) < 1e-8 * abs(num)


def test_closed_form_matches_spectral_transform(gamow_coeffs, moderate_gamow):
    k = gamow_coeffs.k_grid[::97]
    cf = np.array([gamow_transform_closed_form(moderate_gamow, kk) for kk in k])
    assert np.allclose(gamow_coeffs.psi_hat_plus[::97], cf, rtol=1e-5, atol=1e-9)


def test_closed_form_needs_double_well(moderate_resonances):
    V = PiecewisePotential((-2.0, -1.5, 1.0, 1.4), (25.0, 0.0, 35.0))
    from reslab.resonance import find_resonances
    r = find_resonances(V, (1.0, 5.0), 0.5)[0]
    with pytest.raises(NotApplicable):
        gamow_transform_closed_form(gamow_from_resonance(V, r), 2.0)


def test_transform_follows_pole_near_u234(u234_well, u234_resonance):
    G = gamow_from_resonance(u234_well, u234_resonance)
    k0, hw = u234_resonance.z_complex.real, u234_resonance.half_width
    ks = k0 + hw * np.linspace(-10, 10, 9)
    import mpmath
    with mpmath.workdps(50):
        ks_mp = [mpmath.mpf(u234_resonance.z.real) + mpmath.mpf(hw) * s for s in np.linspace(-10, 10, 9)]
        exact = [abs(gamow_transform_closed_form(G, kk)) for kk in ks_mp]
        pred = pole_prediction(G, ks_mp)
    assert len(ks) == len(exact)
    assert max(abs(float(e) / p - 1) for e, p in zip(exact, pred)) < 0.05
