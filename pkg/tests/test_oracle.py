from types import SimpleNamespace

import numpy as np
import pytest

from reslab import oracle
from reslab import spectral as sp
from reslab.errors import GridMismatch
from reslab.potential import PiecewisePotential, make_double_well
from reslab.resonance import find_resonances, gamow_from_resonance, truncate

A = 0.4  # initial Gaussian exp(-x^2 / A)


def free_gaussian(t, x, k0=0.0):
    """Exact e^{-iHt} of exp(-x^2/A + i k0 x) for H = -d^2/dx^2."""
    s = A + 4j * t
    return np.sqrt(A / s) * np.exp(-((x - 2 * k0 * t) ** 2) / s + 1j * k0 * x - 1j * k0**2 * t)


def exact_result(times, x, W, k0=0.0):
    """Duck-typed spectral result holding the exact free evolution."""
    profiles = np.array([free_gaussian(t, x, k0) for t in times])
    return SimpleNamespace(times=np.asarray(times, float), x_grid=x, profiles=profiles, window=W)


def test_free_gaussian_matches_closed_form():
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x), 12.0, 0.005, 0.0005)
    times = [0.0, 0.05, 0.2]
    out = oracle.propagate_crank_nicolson(g0, PiecewisePotential.free(1.0), times, window=3.0)
    x = np.linspace(-3.0, 3.0, 601)
    rows = oracle.compare(exact_result(times, x, 3.0), out)
    assert rows[0].l2_diff < 1e-6  # interpolation only
    assert all(r.l2_diff < 1e-4 for r in rows)
    assert not any(r.flag for r in rows)


def test_norm_drift_small():
    V = make_double_well(1.0, 0.5, 20.0)
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x, 3.0), 40.0, 0.02, 0.001)
    out = oracle.propagate_crank_nicolson(g0, V, [10.0])  # 10^4 steps
    assert abs(out[0].norm2() / g0.norm2() - 1) < 1e-8


def test_active_range_matches_full_solve():
    V = make_double_well(1.0, 0.5, 20.0)
    h, dt = 0.01, 0.002
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x, 2.0), 60.0, h, dt)
    out = oracle.propagate_crank_nicolson(g0, V, [2.0])[0]
    factors, rhs = oracle._operators(V, g0.x_grid[1:-1], h, dt)
    state = g0.values[1:-1].copy()
    for _ in range(1000):
        state = oracle._step(factors, rhs, state)
    assert np.max(np.abs(out.values[1:-1] - state)) < 1e-10


def test_second_order_convergence():
    V = make_double_well(1.0, 0.5, 20.0)
    t = 0.5
    snaps = []
    for m in (1, 2, 4):
        g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x, 3.0), 8.0, 0.04 / m, 0.01 / m)
        snaps.append(oracle.propagate_crank_nicolson(g0, V, [t])[0])
    # x_j = -B + j h: the coarse nodes are shared by all three grids
    vals = [s.values[::m] for s, m in zip(snaps, (1, 2, 4))]
    d1 = np.linalg.norm(vals[0] - vals[1])
    d2 = np.linalg.norm(vals[1] - vals[2])
    assert 3.0 < d1 / d2 < 5.0


def test_small_box_flagged_and_wrong():
    k0, W, B = 10.0, 1.0, 4.0
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x, k0), B, 0.0025, 0.0001)
    K = oracle.effective_wavenumber(g0)
    t_back = oracle.return_time(B, W, K)
    times = [0.5 * t_back, 0.9 * t_back, 0.4]
    assert times[-1] > (B + W) / (2 * k0)  # the packet centre has come back
    out = oracle.propagate_crank_nicolson(g0, PiecewisePotential.free(1.0), times, window=W, K=K)
    rows = oracle.compare(exact_result(times, np.linspace(-W, W, 201), W, k0), out)
    assert [r.flag for r in rows] == [False, False, True]
    assert rows[0].l2_diff < 1e-3 and rows[-1].l2_diff > 0.5
    assert oracle.required_box(W, K, 0.4) > B


def test_compare_rejects_misaligned_input():
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x), 6.0, 0.01, 0.001)
    out = oracle.propagate_crank_nicolson(g0, PiecewisePotential.free(1.0), [0.0, 0.01])
    x = np.linspace(-1.0, 1.0, 101)
    with pytest.raises(GridMismatch):
        oracle.compare(exact_result([0.0], x, 1.0), out)
    with pytest.raises(GridMismatch):
        oracle.compare(exact_result([0.0, 0.02], x, 1.0), out)
    with pytest.raises(GridMismatch):
        oracle.compare(exact_result([0.0, 0.01], x, 2.0), out)


def test_negative_time_rejected():
    g0 = oracle.GridWave.from_callable(lambda x: free_gaussian(0.0, x), 6.0, 0.01, 0.001)
    with pytest.raises(ValueError):
        oracle.propagate_crank_nicolson(g0, PiecewisePotential.free(1.0), [-1.0])


def test_cell_averaged_potential_at_steps():
    V = PiecewisePotential((-1.0, 1.0), (4.0,))
    x = np.array([-1.0, -0.995, 0.0, 1.0025, 2.0])
    assert np.allclose(oracle.cell_averaged_potential(V, x, 0.01), [2.0, 4.0, 4.0, 1.0, 0.0])


@pytest.mark.slow
def test_grid_decay_rate_of_truncated_gamow():
    V = make_double_well(1.0, 0.5, 20.0)
    r = find_resonances(V, (0.5, 3.0), 0.5)[0]
    psi = truncate(gamow_from_resonance(V, r), 1.0).function
    t0, t1 = sp.exponential_window(r.E, r.Gamma)
    ts = np.linspace(t0, t1, 8)
    h, dt = 0.02, 0.01
    g = oracle.GridWave.from_callable(lambda x: psi(x), 20.0, h, dt)
    # the sharp cut puts ~1e-4 of the mass at high k; flux that small may return
    K = oracle.effective_wavenumber(g, mass_fraction=1e-4)
    g0 = oracle.GridWave.from_callable(lambda x: psi(x), oracle.required_box(V.L, K, t1), h, dt)
    out = oracle.propagate_crank_nicolson(g0, V, ts, K=K)
    mass = []
    for s in out:
        inside = np.abs(s.x_grid) <= V.L
        mass.append(h * np.sum(np.abs(s.values[inside]) ** 2))
    assert sp.fit_decay_rate(ts, mass) == pytest.approx(2 * r.Gamma, rel=0.1)
