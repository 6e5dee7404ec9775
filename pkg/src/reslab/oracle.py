"""Crank-Nicolson propagation on a large box, used as an independent check.

Nothing here touches the scattering or spectral machinery: the potential
is only read through its breakpoints and heights, and the wave is stepped
in x-space with

    (1 + i dt/2 H) psi^{n+1} = (1 - i dt/2 H) psi^n,   H = -D2 + V,

with Dirichlet walls at +-B. The scheme is unitary, so the only way the
box can spoil a result is flux coming back from the walls; that is
estimated from the spectrum of the initial data and flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import simpson
from scipy.linalg.lapack import zgttrf, zgttrs

from .errors import GridMismatch
from .potential import PiecewisePotential


@dataclass(frozen=True)
class GridWave:
    """Samples of a wave on the uniform grid x_j = -B + j h, j = 0..N.

    ``flag`` is set on snapshots taken after flux could have returned from
    the walls into the observation window.
    """

    x_grid: np.ndarray
    values: np.ndarray
    box_size: float
    dt: float
    t: float = 0.0
    flag: bool = False

    @property
    def h(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @classmethod
    def from_callable(cls, f, box_size: float, h: float, dt: float) -> "GridWave":
        n = int(round(2 * box_size / h))
        x = np.linspace(-box_size, box_size, n + 1)
        v = np.asarray(f(x), dtype=complex)
        v[0] = v[-1] = 0
        return cls(x, v, float(box_size), float(dt))

    def norm2(self) -> float:
        return float(self.h * np.sum(np.abs(self.values) ** 2))


def cell_averaged_potential(V: PiecewisePotential, x, h: float) -> np.ndarray:
    """Mean of V over [x - h/2, x + h/2] for every grid point."""
    x = np.asarray(x, dtype=float)
    lo, hi = x - h / 2, x + h / 2
    out = np.zeros_like(x)
    bp = np.asarray(V.breakpoints, dtype=float)
    for a, b, height in zip(bp[:-1], bp[1:], V.heights):
        overlap = np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0, None)
        out += height * overlap / h
    return out


def effective_wavenumber(wave: GridWave, mass_fraction: float = 1e-8) -> float:
    """Smallest K with all but ``mass_fraction`` of |psi_hat|^2 inside |k| <= K."""
    spec = np.abs(np.fft.fft(wave.values)) ** 2
    k = np.abs(2 * np.pi * np.fft.fftfreq(wave.values.size, d=wave.h))
    order = np.argsort(k)
    cum = np.cumsum(spec[order])
    total = cum[-1]
    idx = int(np.searchsorted(cum, (1 - mass_fraction) * total))
    return float(k[order][min(idx, k.size - 1)])


def return_time(box_size: float, window: float, K: float) -> float:
    """Earliest time flux with group velocity <= 2K can leave [-W, W], hit a wall and come back."""
    return 2 * (box_size - window) / (2 * K)


def required_box(window: float, K: float, t_max: float, margin: float = 1.1) -> float:
    """Box half-width keeping returning flux out of the window up to t_max."""
    return margin * (window + K * t_max)


# Amplitudes below this fraction of the peak are treated as exact zeros. The
# implicit solve otherwise fills the whole box with exponentially small
# values, and subnormal arithmetic makes every step an order of magnitude
# slower.
ACTIVE_FLOOR = 1e-150


def _operators(V: PiecewisePotential, x, h: float, dt: float):
    """LU factors of 1 + i dt/2 H and the tridiagonal 1 - i dt/2 H on the points ``x``."""
    v = cell_averaged_potential(V, x, h)
    n = v.size
    off = np.full(n - 1, -1.0 / h ** 2, dtype=complex)
    diag = 2.0 / h ** 2 + v
    lhs = (off * 0.5j * dt, 1 + 0.5j * dt * diag, off * 0.5j * dt)
    rhs = (-off * 0.5j * dt, 1 - 0.5j * dt * diag, -off * 0.5j * dt)
    dl, d, du, du2, ipiv, info = zgttrf(*lhs)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal factorisation failed (info={info})")
    return (dl, d, du, du2, ipiv), rhs


def _step(factors, rhs, psi):
    lo, d, up = rhs
    b = d * psi
    b[1:] += lo * psi[:-1]
    b[:-1] += up * psi[1:]
    x, info = zgttrs(*factors, b)
    return x


class _ActiveStepper:
    """CN steps restricted to the index range that carries non-negligible amplitude.

    Outside ``[a, b)`` the state is exactly zero, which is the full-box
    solution up to ACTIVE_FLOOR. The range widens whenever amplitude above
    the floor reaches its margin.
    """

    def __init__(self, V, x_interior, h, dt, state):
        self.V, self.x, self.h, self.dt = V, x_interior, h, dt
        self.state = state
        n = state.size
        self.pad = max(2000, n // 50)
        self.margin = self.pad // 4
        self.ref = float(np.max(np.abs(state))) or 1.0
        live = np.flatnonzero(np.abs(state) > ACTIVE_FLOOR * self.ref)
        lo, hi = (live[0], live[-1] + 1) if live.size else (0, 1)
        self.a, self.b = max(lo - self.pad, 0), min(hi + self.pad, n)
        self._cache = {}

    def _ops(self, dt):
        key = (self.a, self.b, round(dt, 15))
        if key not in self._cache:
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = _operators(self.V, self.x[self.a:self.b], self.h, dt)
        return self._cache[key]

    def _widen(self):
        n, m, thr = self.state.size, self.margin, ACTIVE_FLOOR * self.ref
        s = self.state
        grow_lo = self.a > 0 and np.max(np.abs(s[self.a:self.a + m])) > thr
        grow_hi = self.b < n and np.max(np.abs(s[self.b - m:self.b])) > thr
        if grow_lo:
            self.a = max(self.a - self.pad, 0)
        if grow_hi:
            self.b = min(self.b + self.pad, n)

    def step(self):
        self._widen()
        a, b = self.a, self.b
        self.state[a:b] = _step(*self._ops(self.dt), self.state[a:b])

    def partial(self, dt):
        """The state advanced by ``dt`` without changing the stepper."""
        out = self.state.copy()
        a, b = self.a, self.b
        out[a:b] = _step(*self._ops(dt), self.state[a:b])
        return out


def propagate_crank_nicolson(psi0: GridWave, V: PiecewisePotential, t_list,
                             window: float | None = None, K: float | None = None) -> list:
    """Snapshots of the Crank-Nicolson evolution at each requested time.

    Times need not be multiples of ``psi0.dt``: the remainder is covered by
    one extra step of the right length on a copy of the state.

    Parameters
    ----------
    window : float
        Observation half-width W used for the box-return flag (default L).
    K : float, optional
        Wavenumber bound for the flag; estimated from the spectrum of psi0
        when omitted.
    """
    x = psi0.x_grid
    h, dt, B = psi0.h, psi0.dt, psi0.box_size
    W = float(window if window is not None else V.L)
    K = K if K is not None else effective_wavenumber(psi0)
    t_back = return_time(B, W, max(K, 1e-12))
    times = np.asarray(t_list, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    stepper = _ActiveStepper(V, x[1:-1], h, dt, psi0.values[1:-1].copy())
    n_done = 0
    out = {}
    for t in sorted(set(times.tolist())):
        n_full = int(math.floor(t / dt + 1e-9))
        while n_done < n_full:
            stepper.step()
            n_done += 1
        rest = t - n_full * dt
        snap = stepper.partial(rest) if rest > 1e-12 * max(dt, 1.0) else stepper.state
        values = np.zeros_like(psi0.values)
        values[1:-1] = snap
        out[t] = GridWave(x, values, B, dt, float(t), bool(t > t_back))
    return [out[t] for t in times.tolist()]


class ComparisonRow(NamedTuple):
    t: float
    l2_diff: float
    flag: bool


def compare(spectral_result, grid_result, window: float | None = None,
            time_tol: float = 1e-9) -> list:
    """Relative L2 difference on [-W, W] between spectral profiles and grid snapshots.

    The grid waves are interpolated (cubic spline) onto the spectral x-grid,
    which must be uniform, odd-sized and cover the window.

    Raises
    ------
    GridMismatch
        If the time lists differ, or the window is not covered by both grids.
    """
    times = np.asarray(spectral_result.times, dtype=float)
    if len(grid_result) != times.size:
        raise GridMismatch(f"{times.size} spectral times vs {len(grid_result)} grid snapshots")
    scale = max(1.0, float(np.max(np.abs(times)))) if times.size else 1.0
    for t, g in zip(times, grid_result):
        if abs(t - g.t) > time_tol * scale:
            raise GridMismatch(f"time {g.t} does not match spectral time {t}")
    xs = np.asarray(spectral_result.x_grid, dtype=float)
    W = float(window if window is not None else spectral_result.window)
    sel = (xs >= -W - 1e-12) & (xs <= W + 1e-12)
    xw = xs[sel]
    if xw.size < 3 or xw[0] > -W + 1e-9 or xw[-1] < W - 1e-9:
        raise GridMismatch("spectral x-grid does not cover the window")
    rows = []
    for t, prof, g in zip(times, spectral_result.profiles, grid_result):
        if g.x_grid[0] > -W or g.x_grid[-1] < W:
            raise GridMismatch("grid box smaller than the window")
        near = (g.x_grid >= -W - 4 * g.h) & (g.x_grid <= W + 4 * g.h)
        gx, gv = g.x_grid[near], g.values[near]
        gi = CubicSpline(gx, gv.real)(xw) + 1j * CubicSpline(gx, gv.imag)(xw)
        sp = np.asarray(prof)[sel]
        num = simpson(np.abs(sp - gi) ** 2, x=xw)
        den = simpson(np.abs(sp) ** 2, x=xw)
        rows.append(ComparisonRow(float(t), float(math.sqrt(num / den)), bool(g.flag)))
    return rows
