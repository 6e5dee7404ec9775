"""Expansion in generalised eigenfunctions and exact spectral time evolution.

For square-integrable psi (and a potential without bound states)

    psi_hat±(k) = int psi(x) conj(u±(k, x)) dx,                        k >= 0
    psi(t, x)   = int_0^inf (psi_hat+ u+ + psi_hat- u-)(k, x) e^{-i k^2 t} dk.

The k-integrals are done in the energy variable eps = k^2, on panels that
are graded towards eps = 0 and around every tracked resonance. Each panel
carries Gauss-Legendre nodes; for t > 0 the integrand is replaced by its
Legendre interpolant on the panel and integrated against e^{-i eps t}
exactly (Filon-type weights via spherical Bessel functions), so the cost
does not grow with t.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_legendre, spherical_jn

from .errors import TruncationError
from .potential import PiecewisePotential
from .sampled import SampledFunction, gauss_legendre, panel_nodes
from .scattering import SQRT_2PI, bound_state_diagnostic, solve_scattering

log = logging.getLogger(__name__)

N_GAUSS = 16
MAX_PANELS = 20000
K_FLOOR = 1e-6  # first graded edge; the panel [0, K_FLOOR] carries mass ~ K_FLOOR^3


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("RESLAB_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# k-grid construction

def _graded(center, width, reach):
    """Offsets center +- width * {1/2, 1, 2, 4, ...} up to ``reach``."""
    offsets = [0.0, 0.5 * width]
    w = width
    while w < reach:
        offsets.append(w)
        w *= 2
    offs = np.array(offsets)
    return np.concatenate([center - offs[::-1], center + offs[1:]])


def build_k_edges(K_max: float, dk: float, resonances=(), k_floor: float = K_FLOOR):
    """Panel edges in k: geometric near 0, uniform ``dk``, graded at resonances.

    ``resonances`` is a sequence of (Re z, |Im z|) pairs.
    """
    k_a = min(dk, 0.1)
    low = [0.0]
    k = k_floor
    while k < k_a:
        low.append(k)
        k *= 2
    n_uniform = max(1, int(math.ceil((K_max - k_a) / dk)))
    edges = np.concatenate([low, np.linspace(k_a, K_max, n_uniform + 1)])
    for center, width in resonances:
        if not 0 < center < K_max or width <= 0:
            continue
        if width < 1e-12 * center:
            warnings.warn(f"resonance at {center:.6g} is narrower than double precision; "
                          "not resolved on the k-grid")
            continue
        reach = min(dk, 0.45 * center)
        graded = _graded(center, width, reach)
        span = graded[-1] - center
        keep = (edges < center - span - 0.25 * dk) | (edges > center + span + 0.25 * dk) | (edges == 0)
        edges = np.union1d(edges[keep], graded[(graded > 0) & (graded < K_max)])
    return np.unique(edges)


def _eps_nodes(k_edges, n=N_GAUSS):
    eps_edges = np.asarray(k_edges) ** 2
    eps, w = panel_nodes(eps_edges, n)
    return eps_edges, eps, w


# --------------------------------------------------------------------------
# forward transform

def _default_dk(psi: SampledFunction, V: PiecewisePotential, window: float | None = None) -> float:
    extent = max(abs(psi.x0), abs(psi.x_end), V.L) + (window or V.L)
    return min(0.5, 3.0 / extent)


def transform_at(psi: SampledFunction, V: PiecewisePotential, k, threads: int | None = None):
    """psi_hat+(k), psi_hat-(k) for an array of real k > 0 (double precision)."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    kmax = float(np.max(k)) if k.size else 1.0
    n_gauss = 4 if kmax * 2 * psi.dx < 0.5 else 8
    x, w = psi.quadrature(breakpoints=V.breakpoints, n_gauss=n_gauss,
                          max_width=min(2 * psi.dx, 2.0 / max(kmax, 1.0)))
    weighted = w * psi(x)
    chunk = max(1, int(4_000_000 // max(x.size, 1)))
    pieces = [k[i:i + chunk] for i in range(0, k.size, chunk)]

    def work(kc):
        sol = solve_scattering(V, kc)
        norm = np.conj(SQRT_2PI * np.asarray(sol.a))[:, None]
        up = np.conj(sol.f_plus(x)) / norm
        um = np.conj(sol.f_minus(x)) / norm
        return up @ weighted, um @ weighted

    threads = threads or default_threads()
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, pieces))
    else:
        results = [work(p) for p in pieces]
    if not results:
        return np.zeros(0, complex), np.zeros(0, complex)
    plus = np.concatenate([r[0] for r in results])
    minus = np.concatenate([r[1] for r in results])
    return plus, minus


@dataclass(frozen=True)
class SpectralCoefficients:
    """psi_hat± sampled on Gauss-Legendre nodes of eps-panels covering (0, K_max^2].

    ``weights_eps`` integrate in eps; ``weights_k = weights_eps / (2k)``
    integrate in k.
    """

    psi: SampledFunction
    potential: PiecewisePotential
    k_edges: np.ndarray
    eps_edges: np.ndarray
    eps: np.ndarray
    weights_eps: np.ndarray
    psi_hat_plus: np.ndarray
    psi_hat_minus: np.ndarray
    norm2: float
    resonances: tuple = ()
    n_gauss: int = N_GAUSS
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def k_grid(self) -> np.ndarray:
        return np.sqrt(self.eps)

    @property
    def K_max(self) -> float:
        return float(self.k_edges[-1])

    @property
    def weights_k(self) -> np.ndarray:
        return self.weights_eps / (2 * self.k_grid)

    @property
    def density(self) -> np.ndarray:
        """|psi_hat+|^2 + |psi_hat-|^2 on the grid."""
        return np.abs(self.psi_hat_plus) ** 2 + np.abs(self.psi_hat_minus) ** 2

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights_k * self.density))

    @property
    def parseval_defect(self) -> float:
        return abs(self.mass - self.norm2) / self.norm2

    def samples_within(self, center: float, half_width: float) -> int:
        k = self.k_grid
        return int(np.sum(np.abs(k - center) <= half_width))


def _panel_tails(values, n):
    """Relative size of the two highest Legendre coefficients on each panel."""
    s, w = gauss_legendre(n)
    P = np.array([eval_legendre(m, s) for m in range(n)])
    coef = (values.reshape(-1, n) * w) @ P.T * (2 * np.arange(n) + 1) / 2
    return np.abs(coef[:, -1]) + np.abs(coef[:, -2]), np.abs(coef[:, 0])


def forward_transform(psi: SampledFunction, V: PiecewisePotential, K_max: float | None = None,
                      tol: float = 1e-6, resonances=(), dk: float | None = None,
                      K_limit: float | None = None, max_rounds: int = 12,
                      threads: int | None = None, raise_on_defect: bool = True,
                      window: float | None = None,
                      recon_tol: float | None = None) -> SpectralCoefficients:
    """Generalised Fourier transform of ``psi`` on an adaptive k-grid.

    Parameters
    ----------
    resonances : sequence of Resonance
        Narrow features to grade the grid around.
    K_max : float, optional
        Initial cut-off. Defaults to Re z + max(40 |Im z|, 10) over the
        tracked resonances (10 without any) and is raised automatically,
        up to ``K_limit`` (default 16 K_max), until the Parseval defect
        drops below ``tol``.
    raise_on_defect : bool
        Raise :class:`TruncationError` when the defect stays above ``tol``;
        otherwise return the best result with the defect in ``diagnostics``.
    recon_tol : float, optional
        Target relative L2 error of the reconstruction. The error of the
        inverse transform is the square root of the spectral mass beyond
        K_max, so this keeps extending K_max until that mass is estimated
        below recon_tol^2 |psi|^2, which a Parseval defect of ``tol`` alone
        does not guarantee.
    """
    if bound_state_diagnostic(V):
        warnings.warn("potential appears to support a bound state; the expansion "
                      "in u± alone is incomplete")
    pairs = tuple((r.z_complex.real, r.half_width) for r in resonances)
    if K_max is None:
        K_max = max([c + max(40 * w, 10.0) for c, w in pairs] + [10.0])
    K_limit = K_limit or 16 * K_max
    dk = dk or _default_dk(psi, V, window)
    norm2 = psi.norm2()
    edges = build_k_edges(K_max, dk, pairs)
    n = N_GAUSS
    cache: dict = {}

    def evaluate(edges):
        lo, hi = edges[:-1], edges[1:]
        todo = [(a, b) for a, b in zip(lo, hi) if (a, b) not in cache]
        if todo:
            nodes = []
            for a, b in todo:
                ee, _ = panel_nodes([a * a, b * b], n)
                nodes.append(ee)
            allk = np.sqrt(np.concatenate(nodes))
            hp, hm = transform_at(psi, V, allk, threads)
            for i, key in enumerate(todo):
                cache[key] = (hp[i * n:(i + 1) * n], hm[i * n:(i + 1) * n])
        hp = np.concatenate([cache[(a, b)][0] for a, b in zip(lo, hi)])
        hm = np.concatenate([cache[(a, b)][1] for a, b in zip(lo, hi)])
        return hp, hm

    tail_target = 0.05 * tol * norm2
    if recon_tol is not None:
        tail_target = min(tail_target, 0.25 * recon_tol**2 * norm2)
    for rounds in range(max_rounds):
        eps_edges, eps, w = _eps_nodes(edges, n)
        hp, hm = evaluate(edges)
        k = np.sqrt(eps)
        F = (np.abs(hp) ** 2 + np.abs(hm) ** 2) / (2 * k)
        mass = float(np.sum(w * F))
        defect = abs(mass - norm2) / norm2
        last_rho = float(F[-n:].mean() * 2 * k[-1])
        tail_est = last_rho * edges[-1]
        if defect < tol and (recon_tol is None or tail_est <= tail_target):
            break
        tails, _ = _panel_tails(F, n)
        half = np.diff(eps_edges) / 2
        err = tails * half * 2
        # panels whose top coefficients sit at the rounding floor cannot improve
        noise = 1e-11 * float(np.max(np.abs(F))) * half * 2
        bad = (err > 0.05 * tol * norm2) & (err > noise) & (defect >= tol)
        if edges.size + np.count_nonzero(bad) > MAX_PANELS:
            log.warning("panel budget exhausted; stopping refinement")
            bad[:] = False
        # mass beyond the cut-off, from the density on the last panel
        old = edges
        grew = False
        if tail_est > tail_target and edges[-1] < K_limit:
            newK = min(K_limit, edges[-1] * 1.5)
            extra = np.linspace(edges[-1], newK, max(2, int(math.ceil((newK - edges[-1]) / dk)) + 1))
            edges = np.concatenate([edges, extra[1:]])
            grew = True
        if np.any(bad):
            mids = 0.5 * (old[:-1][bad] + old[1:][bad])
            edges = np.union1d(edges, mids)
        elif not grew:
            break
    eps_edges, eps, w = _eps_nodes(edges, n)
    hp, hm = evaluate(edges)
    coeffs = SpectralCoefficients(psi, V, np.asarray(edges), eps_edges, eps, w, hp, hm, norm2,
                                  tuple(resonances), n)
    defect = coeffs.parseval_defect
    coeffs.diagnostics.update(parseval_defect=defect, rounds=rounds + 1, K_max=coeffs.K_max)
    if defect >= tol:
        msg = f"Parseval defect {defect:.3g} above tol {tol:.3g} at K_max = {coeffs.K_max:.4g}"
        if raise_on_defect:
            raise TruncationError(msg, defect)
        log.warning(msg)
    return coeffs


# --------------------------------------------------------------------------
# evolution

def filon_weights(eps_edges, n: int, t: float) -> np.ndarray:
    """Weights W with sum_j W_j F(eps_j) ~ int F(eps) e^{-i eps t} d eps.

    F is replaced on every panel by its degree n-1 Legendre interpolant at
    the Gauss-Legendre nodes and the product with the exponential is
    integrated exactly: int_{-1}^{1} P_m(s) e^{-i w s} ds = 2 (-i)^m j_m(w).
    """
    s, w = gauss_legendre(n)
    m = np.arange(n)
    B = (2 * m[:, None] + 1) / 2 * w[None, :] * np.array([eval_legendre(j, s) for j in m])
    eps_edges = np.asarray(eps_edges)
    half = np.diff(eps_edges) / 2
    mid = (eps_edges[1:] + eps_edges[:-1]) / 2
    if t == 0:
        return (half[:, None] * w[None, :]).ravel().astype(complex)
    omega = half * t
    J = 2 * ((-1j) ** m)[None, :] * spherical_jn(m[None, :], omega[:, None])
    W = (half * np.exp(-1j * mid * t))[:, None] * (J @ B)
    return W.ravel()


def _window_nodes(V: PiecewisePotential, W: float, n: int = 12, max_width: float = 0.1):
    edges = np.union1d([-W, W], [b for b in V.breakpoints if -W < b < W])
    fine = [edges[:1]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((hi - lo) / max_width)))
        fine.append(np.linspace(lo, hi, m + 1)[1:])
    return panel_nodes(np.concatenate(fine), n)


def _kernel(coeffs: SpectralCoefficients, x):
    """g(k_j, x) / (2 k_j): the eps-integrand without the phase."""
    sol = solve_scattering(coeffs.potential, coeffs.k_grid)
    norm = (SQRT_2PI * np.asarray(sol.a))[:, None]
    g = (coeffs.psi_hat_plus[:, None] * sol.f_plus(x)
         + coeffs.psi_hat_minus[:, None] * sol.f_minus(x)) / norm
    return g / (2 * coeffs.k_grid[:, None])


def inverse_transform(coeffs: SpectralCoefficients, V: PiecewisePotential | None = None, x_grid=None):
    """psi(x) = int_0^K (psi_hat+ u+ + psi_hat- u-) dk on ``x_grid``."""
    if V is not None and V != coeffs.potential:
        raise ValueError("coefficients were computed for a different potential")
    x = np.asarray(x_grid, dtype=float)
    return coeffs.weights_eps @ _kernel(coeffs, x)


def _error_floor(coeffs: SpectralCoefficients) -> float:
    """t-independent bound on the panel interpolation error of the survival integrand."""
    n = coeffs.n_gauss
    F = coeffs.density / (2 * coeffs.k_grid)
    tails, _ = _panel_tails(F, n)
    return float(np.sum(tails * np.diff(coeffs.eps_edges)))


@dataclass(frozen=True)
class EvolutionResult:
    """psi(t, x) on ``x_grid`` with per-time survival amplitude and window mass.

    ``reliable[i]`` is False where the estimated quadrature error exceeds
    ``rel_tol`` times |survival_amplitude[i]|.
    """

    times: np.ndarray
    x_grid: np.ndarray
    profiles: np.ndarray
    survival_amplitude: np.ndarray
    window_mass: np.ndarray
    window: float
    norm2: float
    reliable: np.ndarray
    error_estimate: np.ndarray


def survival_amplitudes(coeffs: SpectralCoefficients, t_list) -> np.ndarray:
    """<psi, e^{-iHt} psi> = int rho(k) e^{-i k^2 t} dk for each t."""
    F = coeffs.density / (2 * coeffs.k_grid)
    return np.array([filon_weights(coeffs.eps_edges, coeffs.n_gauss, float(t)) @ F
                     for t in t_list])


def refine(coeffs: SpectralCoefficients, threads: int | None = None) -> SpectralCoefficients:
    """The same transform on a grid with every panel bisected."""
    e = coeffs.k_edges
    edges = np.union1d(e, 0.5 * (e[1:] + e[:-1]))
    eps_edges, eps, w = _eps_nodes(edges, coeffs.n_gauss)
    hp, hm = transform_at(coeffs.psi, coeffs.potential, np.sqrt(eps), threads)
    return SpectralCoefficients(coeffs.psi, coeffs.potential, edges, eps_edges, eps, w, hp, hm,
                                coeffs.norm2, coeffs.resonances, coeffs.n_gauss,
                                dict(coeffs.diagnostics, refined=True))


def evolve(coeffs: SpectralCoefficients, V: PiecewisePotential | None = None, t_list=(0.0,),
           x_window: float | None = None, x_grid=None, rel_tol: float = 1e-3,
           error_estimate: str = "floor") -> EvolutionResult:
    """Exact spectral time evolution e^{-iHt} psi.

    Parameters
    ----------
    x_window : float
        Half-width W of the observation window [-W, W] (default: L of the
        potential) over which ``window_mass`` is integrated.
    x_grid : array, optional
        Points at which profiles are reported (default: 201 points on the
        window).
    error_estimate : {"floor", "refine"}
        "floor" bounds the panel interpolation error of the survival
        integrand once for all t (cheap, pessimistic). "refine" recomputes
        the survival amplitude on a bisected grid and uses the difference,
        which is what resolves small long-time amplitudes.
    """
    if V is not None and V != coeffs.potential:
        raise ValueError("coefficients were computed for a different potential")
    if error_estimate not in ("floor", "refine"):
        raise ValueError(f"unknown error_estimate {error_estimate!r}")
    V = coeffs.potential
    W = float(x_window if x_window is not None else V.L)
    x_grid = np.linspace(-W, W, 201) if x_grid is None else np.asarray(x_grid, dtype=float)
    xw, ww = _window_nodes(V, W)
    kern = _kernel(coeffs, np.concatenate([x_grid, xw]))
    F = coeffs.density / (2 * coeffs.k_grid)
    rho_K = float(coeffs.density[-1])
    K = coeffs.K_max
    tail_mass = abs(coeffs.norm2 - coeffs.mass)
    times = np.asarray(t_list, dtype=float)
    if error_estimate == "refine":
        fine = survival_amplitudes(refine(coeffs), times)
    else:
        floor = _error_floor(coeffs)
    profiles, amps, masses, errs = [], [], [], []
    for i, t in enumerate(times):
        Wt = filon_weights(coeffs.eps_edges, coeffs.n_gauss, float(t))
        vals = Wt @ kern
        profiles.append(vals[:x_grid.size])
        masses.append(float(np.sum(ww * np.abs(vals[x_grid.size:]) ** 2)))
        amp = Wt @ F
        amps.append(amp)
        tail = tail_mass if t == 0 else min(tail_mass, rho_K / (2 * K * abs(t)))
        quad = abs(amp - fine[i]) if error_estimate == "refine" else floor
        errs.append(quad + tail)
    amps = np.array(amps)
    errs = np.array(errs)
    reliable = errs <= rel_tol * np.abs(amps)
    return EvolutionResult(times, x_grid, np.array(profiles), amps, np.array(masses), W,
                           coeffs.norm2, reliable, errs)


def survival_probability(result: EvolutionResult):
    """List of (t, P(t)) with P = |<psi, e^{-iHt} psi>|^2 / |psi|^4, so P(0) = 1."""
    P = np.abs(result.survival_amplitude) ** 2 / result.norm2 ** 2
    return list(zip(result.times.tolist(), P.tolist()))


def fit_decay_rate(times, values) -> float:
    """Least-squares slope of -log(values) against t."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    slope = np.polyfit(t, y, 1)[0]
    return float(-slope)


def loglog_slope(times, values) -> float:
    t = np.log(np.asarray(times, dtype=float))
    y = np.log(np.abs(np.asarray(values)))
    return float(np.polyfit(t, y, 1)[0])


def exponential_window(E: float, Gamma: float) -> tuple:
    """[5/E, 0.5/Gamma]: after a few oscillation periods, before the power-law tail."""
    return 5.0 / E, 0.5 / Gamma


def central_derivative(f, t0: float, h: float) -> float:
    return (f(t0 + h) - f(t0 - h)) / (2 * h)

