"""Pole (Breit-Wigner) picture of the decay next to the exact evolution.

Near a resonance z the generalised eigenfunctions are dominated by their
principal part, u±(k, x) ~ eta(k) G(x) with eta(k) = c / (k - z). Two
consequences are implemented here:

* the transform of a truncated Gamow state is close to conj(eta(k)) times
  its squared norm (a Lorentzian in k), and
* the evolution of such a state reduces to the Fourier transform of a
  Breit-Wigner line, an exponential c' e^{-iEt - Gamma t}.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import mpmath
import numpy as np

from . import _arith
from .errors import NotApplicable
from .resonance import GamowFunction, Resonance, gamow_from_resonance, truncated_norm2
from .sampled import panel_nodes
from .scattering import SQRT_2PI, double_well_coefficients, solve_scattering
from .spectral import (SpectralCoefficients, _kernel, _window_nodes, build_k_edges,
                       filon_weights, transform_at)


# --------------------------------------------------------------------------
# Breit-Wigner evolution

def pole_amplitude_constant(r: Resonance, tilde_f_at_roots, c: complex = 1.0) -> complex:
    """c' = c * pi / Gamma * (|f(+sqrt E)|^2 + |f(-sqrt E)|^2) / (2 sqrt E)."""
    fp, fm = tilde_f_at_roots
    E, Gamma = r.E, r.Gamma
    frozen = (abs(fp) ** 2 + abs(fm) ** 2) / (2 * math.sqrt(E))
    return complex(c) * frozen * math.pi / Gamma


def pole_approximation_evolution(r: Resonance, tilde_f_at_roots, t_list, c: complex = 1.0):
    """(t, c' e^{-iEt - Gamma t}) for each t.

    The Lorentzian in eps = k^2 is integrated over the whole real line,
    which is where the approximation needs Gamma << E.
    """
    E, Gamma = r.E, r.Gamma
    if Gamma / E > 0.1:
        warnings.warn(f"Gamma/E = {Gamma / E:.3g}: the pole approximation assumes Gamma << E")
    c_prime = pole_amplitude_constant(r, tilde_f_at_roots, c)
    t = np.asarray(t_list, dtype=float)
    amps = c_prime * np.exp((-1j * E - Gamma) * t)
    return list(zip(t.tolist(), amps.tolist()))


def gamow_projection(coeffs: SpectralCoefficients, G: GamowFunction, t: float,
                     window: float | None = None) -> complex:
    """<1_W G, psi(t)> / |1_W G|^2 from the exact spectral evolution."""
    V = coeffs.potential
    W = float(window if window is not None else V.L)
    x, w = _window_nodes(V, W)
    psi_t = filon_weights(coeffs.eps_edges, coeffs.n_gauss, float(t)) @ _kernel(coeffs, x)
    g = G(x)
    return complex(np.sum(w * np.conj(g) * psi_t) / np.sum(w * np.abs(g) ** 2))


class PoleCalibration(NamedTuple):
    c: complex
    tilde_f_at_roots: tuple
    c_prime: complex
    t_ref: float


def calibrate_pole(coeffs: SpectralCoefficients, G: GamowFunction, t_ref: float,
                   window: float | None = None) -> PoleCalibration:
    """Fix c' by matching the Gamow component of the exact evolution at ``t_ref``.

    f~ is not determined by the heuristic; it is taken real and equal at
    +-sqrt(E), and c carries the phase, so that c' e^{-iEt - Gamma t}
    reproduces the projection at t_ref.
    """
    r = G.resonance
    proj = gamow_projection(coeffs, G, t_ref, window)
    c_prime = proj * np.exp((1j * r.E + r.Gamma) * t_ref)
    phase = c_prime / abs(c_prime)
    f = math.sqrt(abs(c_prime) * r.Gamma * 2 * math.sqrt(r.E) / (2 * math.pi))
    return PoleCalibration(complex(phase), (f, f), complex(c_prime), float(t_ref))


def pole_window_mass(r: Resonance, cal: PoleCalibration, G: GamowFunction, t_list,
                     window: float | None = None) -> np.ndarray:
    """|pole amplitude|^2 * |1_W G|^2: the window mass predicted by the pole path."""
    W = float(window if window is not None else G.potential.L)
    n2 = truncated_norm2(G, W)
    amps = np.array([a for _, a in pole_approximation_evolution(r, cal.tilde_f_at_roots,
                                                                t_list, cal.c)])
    return np.abs(amps) ** 2 * n2


# --------------------------------------------------------------------------
# Laurent split

class LaurentSplit(NamedTuple):
    principal_mass: float
    remainder_mass: float
    outside_mass: float

    @property
    def ratio(self) -> float:
        return self.principal_mass / self.remainder_mass


def laurent_split_diagnostic(coeffs: SpectralCoefficients, gamow, interval,
                             window: float | None = None, n_panels: int | None = None) -> LaurentSplit:
    """L1 masses of the principal part and the remainder of the t = 0 integrand.

    On the k-interval ``interval`` the integrand psi_hat+ u+ + psi_hat- u-
    is split into (psi_hat+ + psi_hat-) eta(k) G(x) and the rest; both are
    integrated in |.| over I x [-W, W]. ``outside_mass`` is the full
    integrand's L1 mass over the grid outside I.

    ``gamow`` is a :class:`GamowFunction` or a :class:`Resonance`.

    Raises
    ------
    NotApplicable
        If there is no resonance (e.g. the free potential).
    """
    V = coeffs.potential
    if gamow is None or V.is_free:
        raise NotApplicable("no resonance: the Laurent split is undefined")
    G = gamow if isinstance(gamow, GamowFunction) else gamow_from_resonance(V, gamow)
    r = G.resonance
    lo, hi = map(float, interval)
    if not 0 < lo < hi:
        raise ValueError("interval must satisfy 0 < lo < hi")
    W = float(window if window is not None else V.L)
    x, wx = _window_nodes(V, W)
    zc = r.z_complex
    # graded k-panels on I
    edges = build_k_edges(hi, min(0.05, (hi - lo) / 4), [(zc.real, r.half_width)])
    edges = np.union1d([lo, hi], edges[(edges > lo) & (edges < hi)])
    if n_panels:
        edges = np.linspace(lo, hi, n_panels + 1)
    k, wk = panel_nodes(edges, 16)
    hp, hm = transform_at(coeffs.psi, V, k)
    sol = solve_scattering(V, k)
    norm = (SQRT_2PI * np.asarray(sol.a))[:, None]
    full = (hp[:, None] * sol.f_plus(x) + hm[:, None] * sol.f_minus(x)) / norm
    principal = ((hp + hm) * G.eta(k))[:, None] * G(x)[None, :]
    remainder = full - principal
    pm = float(wk @ (np.abs(principal) @ wx))
    rm = float(wk @ (np.abs(remainder) @ wx))
    kg = coeffs.k_grid
    out = (kg < lo) | (kg > hi)
    if np.any(out):
        sol_o = solve_scattering(V, kg[out])
        norm_o = (SQRT_2PI * np.asarray(sol_o.a))[:, None]
        g = (coeffs.psi_hat_plus[out, None] * sol_o.f_plus(x)
             + coeffs.psi_hat_minus[out, None] * sol_o.f_minus(x)) / norm_o
        om = float(coeffs.weights_k[out] @ (np.abs(g) @ wx))
    else:
        om = 0.0
    return LaurentSplit(pm, rm, om)


# --------------------------------------------------------------------------
# transform of the truncated Gamow function on the double well

def _require_double_well(G: GamowFunction):
    if G.potential.kind != "doublewell":
        raise NotApplicable("closed-form transform needs the symmetric double well")
    if G.resonance.channel not in ("even", "odd"):
        raise NotApplicable("closed-form transform needs a parity channel")


def gamow_transform_closed_form(G: GamowFunction, k, digits: int | None = None):
    """psi_hat+(k) of 1_ell G for real k, from the inner-region closed form.

    Even channel: 1_ell G = C cos(zx) and
        psi_hat+(k) = C / (sqrt(2 pi) conj(a2(k))) [sin((k-z)ell)/(k-z) + sin((k+z)ell)/(k+z)].
    Odd channel: 1_ell G = D sin(zx) and
        psi_hat+(k) = -i D / (sqrt(2 pi) conj(a1(k))) [sin((k-z)ell)/(k-z) - sin((k+z)ell)/(k+z)].
    """
    _require_double_well(G)
    p = G.potential.params
    ell = p["ell"]
    d = digits if digits is not None else G.resonance.digits
    dd = d or 30
    with mpmath.workdps(dd):
        z = mpmath.mpc(G.z)
        k = mpmath.mpf(k)
        alpha, beta = G.solution.region_amplitudes_plus[2]
        scale = mpmath.mpc(G.scale)
        alpha, beta = mpmath.mpc(alpha) * scale, mpmath.mpc(beta) * scale
        cf = double_well_coefficients(ell, p["delta"], p["lambda"], k, dd)
        s_m = mpmath.sin((k - z) * ell) / (k - z)
        s_p = mpmath.sin((k + z) * ell) / (k + z)
        root = mpmath.sqrt(2 * mpmath.pi)
        if G.resonance.channel == "even":
            val = (alpha + beta) / (root * mpmath.conj(cf["a2"])) * (s_m + s_p)
        else:
            D = 1j * (alpha - beta)
            val = -1j * D / (root * mpmath.conj(cf["a1"])) * (s_m - s_p)
        return val if d else complex(val)


def _region_value(alpha, beta, q, x):
    return alpha * mpmath.exp(1j * q * x) + beta * mpmath.exp(-1j * q * x)


def gamow_transform_numeric(G: GamowFunction, k, half_width: float | None = None,
                            digits: int | None = None):
    """psi_hat+(k) of 1_w G by adaptive quadrature at extended precision.

    Works for any potential; the integrand is assembled region by region
    from the amplitudes of G and of f+(k, .), so no closed form is used.
    """
    V = G.potential
    w = float(half_width if half_width is not None else (V.inner_half_width or V.L))
    dd = digits if digits is not None else (G.resonance.digits or 30)
    with mpmath.workdps(dd):
        k = mpmath.mpf(k)
        sol = solve_scattering(V, k, dd)
        scale = mpmath.mpc(G.scale)
        g_amps = G.solution.region_amplitudes_plus
        g_qs = G.solution.wavenumbers
        edges = [-w] + [b for b in V.breakpoints if -w < b < w] + [w]
        total = mpmath.mpc(0)
        for lo, hi in zip(edges[:-1], edges[1:]):
            r = int(V.region_index(np.array([0.5 * (lo + hi)]))[0])
            ga, gb = (mpmath.mpc(c) * scale for c in g_amps[r])
            gq = mpmath.mpc(g_qs[r])
            fa, fb = sol.region_amplitudes_plus[r]
            fq = sol.wavenumbers[r]

            def integrand(x):
                return _region_value(ga, gb, gq, x) * mpmath.conj(_region_value(fa, fb, fq, x))

            total += mpmath.quad(integrand, mpmath.linspace(lo, hi, 5))
        val = total / (mpmath.sqrt(2 * mpmath.pi) * mpmath.conj(sol.a))
        return val if digits is not None or G.resonance.digits else complex(val)


def pole_prediction_constant(G: GamowFunction, half_width: float | None = None) -> float:
    """|c| with |psi_hat+(k)| ~ |c| / |k - conj(z)|: |eta constant| * |1_w G|^2."""
    V = G.potential
    w = float(half_width if half_width is not None else (V.inner_half_width or V.L))
    with _arith.precision(G.resonance.digits):
        c_eta = abs(complex(G.eta_constant))
    return c_eta * truncated_norm2(G, w)


def pole_prediction(G: GamowFunction, k, half_width: float | None = None):
    """|c / (k - conj(z))| on real k (extended precision when the root has it)."""
    c = pole_prediction_constant(G, half_width)
    with _arith.precision(G.resonance.digits):
        if G.resonance.digits:
            zb = mpmath.conj(G.z)
            return [float(c / abs(mpmath.mpf(kk) - zb)) for kk in np.atleast_1d(k)]
        return c / np.abs(np.asarray(k, dtype=float) - np.conj(G.resonance.z_complex))
