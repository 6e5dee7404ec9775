"""Resonances (zeros of a(k) below the real axis) and their Gamow functions.

Roots are seeded from local minima of |a(k)| on a real-k scan and polished by
damped Newton iteration at the requested working precision. Narrow
resonances sit exponentially close to the real axis, so the real scan is a
sharp locator even when Im z is far below double precision; the argument
principle is only used to certify the result.

Sign convention: z^2 = E - i Gamma with E, Gamma > 0, i.e. Gamma = -Im z^2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from . import _arith
from .contour import count_zeros_disk, count_zeros_rectangle
from .errors import InconsistentRoot, PrecisionExhausted, ReslabError
from .potential import PiecewisePotential
from .sampled import SampledFunction, panel_nodes
from .scattering import SQRT_2PI, a_function, solve, solve_scattering
from .units import UnitScheme

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Resonance:
    """A root z of a(k) with Im z < 0.

    ``z`` and ``a_prime`` keep the working precision (mpmath values when
    ``digits`` is set). ``residue_scale`` is the residue of u± at z relative
    to f±(z, x), i.e. 1 / (sqrt(2 pi) a'(z)).
    """

    z: object
    a_prime: object
    digits: int | None
    channel: str
    newton_steps: tuple = field(default=(), compare=False)
    residual: float = 0.0

    @property
    def z_complex(self) -> complex:
        return complex(self.z)

    @property
    def E(self) -> float:
        with _arith.precision(self.digits):
            return float((self.z * self.z).real)

    @property
    def Gamma(self) -> float:
        with _arith.precision(self.digits):
            return float(-(self.z * self.z).imag)

    @property
    def half_width(self) -> float:
        """|Im z| = Gamma / (2 sqrt(E)) to leading order: the Lorentzian width in k."""
        with _arith.precision(self.digits):
            return float(-self.z.imag)

    @property
    def residue_scale(self) -> complex:
        with _arith.precision(self.digits):
            if self.digits:
                return complex(1 / (mpmath.sqrt(2 * mpmath.pi) * self.a_prime))
            return 1 / (SQRT_2PI * self.a_prime)


def _derivative(f, z, digits):
    h = (10.0 ** (-(digits or 16) / 2)) * max(abs(complex(z)), 1.0)
    if digits:
        h = mpmath.mpf(10) ** (-mpmath.mpf(digits) / 2) * max(abs(z), 1)
    return (f(z + h) - f(z - h)) / (2 * h)


def newton_refine(f, z0, digits=None, max_iter: int = 100):
    """Damped Newton iteration for a simple zero of an entire function.

    Returns ``(z, steps, converged)`` where ``steps`` holds |dz| per
    iteration. The derivative is a central difference with step
    10^(-digits/2) |z|.
    """
    op = _arith.ops(digits)
    tol = 10.0 ** (-((digits or 16) - 3))
    with _arith.precision(digits):
        z = op.asc(z0)
        fz = f(z)
        steps = []
        for _ in range(max_iter):
            if fz == 0:
                return z, tuple(steps), True
            dz = fz / _derivative(f, z, digits)
            lam = 1.0
            for _ in range(40):
                z_new = z - lam * dz
                f_new = f(z_new)
                if abs(f_new) < abs(fz):
                    break
                lam /= 2
            else:
                # no descent possible: we sit at the precision floor
                return z, tuple(steps), abs(dz) <= tol * 1e3 * abs(z)
            steps.append(float(abs(lam * dz)))
            z, fz = z_new, f_new
            if abs(lam * dz) <= tol * abs(z):
                return z, tuple(steps), True
    return z, tuple(steps), False


def _scan_minima(V, kmin, kmax, n_scan, backend):
    ks = np.linspace(kmin, kmax, n_scan)
    try:
        a = np.abs(np.asarray(a_function(V, None, backend)(ks)))
    except PrecisionExhausted:
        raise
    inner = (a[1:-1] < a[:-2]) & (a[1:-1] < a[2:])
    return ks[1:-1][inner]


def _auto_digits(f, seed) -> int:
    # On resonance |a(Re z)| >= 1, so |Im z| >~ 1 / |a'(Re z)|.
    deriv = abs(complex(_derivative(f, complex(seed), None)))
    return _arith.digits_for_ratio(1.0 / (deriv * abs(seed) + 1e-300))


def classify_channel(V: PiecewisePotential, z, digits=None) -> str:
    """'even' / 'odd' when f+(z, .) has definite parity on a symmetric V, else 'none'."""
    if not V.is_symmetric():
        return "none"
    sol = solve_scattering(V, z, digits)
    x = np.linspace(0.05, 1.0, 7) * V.L
    f_pos = np.array([complex(v) for v in np.ravel(sol.f_plus(x))])
    f_neg = np.array([complex(v) for v in np.ravel(sol.f_plus(-x))])
    scale = np.max(np.abs(f_pos)) + np.max(np.abs(f_neg))
    if np.max(np.abs(f_pos - f_neg)) < 1e-6 * scale:
        return "even"
    if np.max(np.abs(f_pos + f_neg)) < 1e-6 * scale:
        return "odd"
    return "none"


def find_resonances(V: PiecewisePotential, k_window, max_im: float, digits=None,
                    n_scan: int = 2000, max_iter: int = 100, backend: str = "transfer",
                    verify: bool = False) -> list[Resonance]:
    """Resonances z with Re z in ``k_window`` and -max_im < Im z < 0.

    Parameters
    ----------
    digits : int, "auto" or None
        Working precision. ``None`` is double precision; ``"auto"`` picks
        2 + log10(Re z / |Im z|) plus guard digits from the slope of a(k)
        at the seed.
    verify : bool
        Check with the argument principle that each root is simple.

    Seeds whose Newton iteration does not converge are dropped and logged.
    """
    kmin, kmax = map(float, k_window)
    if not 0 < kmin < kmax:
        raise ValueError("k_window must be an interval inside (0, inf)")
    if not max_im > 0:
        raise ValueError("max_im must be positive")
    if V.is_free:
        return []
    seeds = _scan_minima(V, kmin, kmax, n_scan, backend)
    found: list[Resonance] = []
    for seed in seeds:
        d = _auto_digits(a_function(V, None, backend), seed) if digits == "auto" else digits
        f = a_function(V, d, backend)
        try:
            z, steps, ok = newton_refine(f, seed, d, max_iter)
        except (ReslabError, ZeroDivisionError, ValueError) as exc:
            log.info("seed %.6g dropped: %s", seed, exc)
            continue
        if not ok:
            log.info("seed %.6g dropped: Newton did not converge", seed)
            continue
        zc = complex(z)
        if not (kmin <= zc.real <= kmax and -max_im < zc.imag < 0):
            continue
        with _arith.precision(d):
            a_prime = _derivative(f, z, d)
            residual = float(abs(f(z) / a_prime) / abs(z))
        root_tol = 10.0 ** (-((d or 16) - 6))
        if residual > root_tol:
            log.info("seed %.6g dropped: residual %.3g above %.3g", seed, residual, root_tol)
            continue
        cluster = 1e3 * root_tol * abs(zc)
        if any(abs(r.z_complex - zc) <= cluster for r in found):
            continue
        channel = classify_channel(V, z, d)
        found.append(Resonance(z, a_prime, d, channel, steps, residual))
    found.sort(key=lambda r: r.z_complex.real)
    if verify:
        for r in found:
            if count_simple(V, r, found) != 1:
                raise InconsistentRoot(f"root {r.z_complex} is not a simple zero")
    return found


def count_simple(V: PiecewisePotential, r: Resonance, others=()) -> int:
    """Number of zeros of a(k) in a small disk around ``r.z``."""
    zc = r.z_complex
    gaps = [abs(o.z_complex - zc) for o in others if o is not r and o.z_complex != zc]
    radius = min([0.25 * g for g in gaps] + [0.1 * abs(zc), 0.5])
    f = a_function(V)
    return count_zeros_disk(f, zc, radius)


def count_in_window(V: PiecewisePotential, k_window, max_im: float, top: float = 0.25) -> int:
    """Argument-principle count of zeros of a(k) in [kmin, kmax] x [-max_im, top]."""
    return count_zeros_rectangle(a_function(V), k_window[0], k_window[1], -max_im, top)


def gamma_monotone(resonances) -> bool:
    """Soft check: decay rates non-decreasing with Re z."""
    g = [r.Gamma for r in resonances]
    return all(b >= a for a, b in zip(g, g[1:]))


def decay_rate_si(r: Resonance, units: UnitScheme) -> float:
    """Gamma in 1/s."""
    return units.to_si_rate(r.Gamma)


@dataclass(frozen=True)
class GamowFunction:
    """G(x) = scale * f+(z, x): purely outgoing, normalised to max |G| = 1 on the inner region.

    ``amplitudes`` are double-precision region coefficients (already scaled);
    ``solution`` keeps the working-precision scattering solution.
    """

    resonance: Resonance
    potential: PiecewisePotential
    scale: object
    solution: object
    norm_interval: tuple

    @property
    def z(self):
        return self.resonance.z

    @property
    def amplitudes(self):
        s = self.scale
        return tuple((complex(al * s), complex(be * s))
                     for al, be in self.solution.region_amplitudes_plus)

    @property
    def wavenumbers(self):
        return tuple(complex(q) for q in self.solution.wavenumbers)

    def __call__(self, x, derivative: bool = False):
        x = np.asarray(x, dtype=float)
        regions = self.potential.region_index(x)
        amps = self.amplitudes
        qs = self.wavenumbers
        out = np.zeros(x.shape, dtype=complex)
        for r in np.unique(regions):
            sel = regions == r
            (alpha, beta), q = amps[r], qs[r]
            ep, em = np.exp(1j * q * x[sel]), np.exp(-1j * q * x[sel])
            out[sel] = 1j * q * (alpha * ep - beta * em) if derivative else alpha * ep + beta * em
        return out

    def evaluate_mp(self, x):
        """G at a single point with the working precision of the root."""
        with _arith.precision(self.resonance.digits):
            return self.solution.f_plus(x) * self.scale

    @property
    def eta_constant(self):
        """c in eta(k) = c / (k - z), the principal part of u± relative to this G."""
        with _arith.precision(self.resonance.digits):
            if self.resonance.digits:
                return 1 / (mpmath.sqrt(2 * mpmath.pi) * self.resonance.a_prime * self.scale)
            return 1 / (SQRT_2PI * self.resonance.a_prime * self.scale)

    def eta(self, k):
        """Principal part coefficient eta(k) = c / (k - z) (double precision)."""
        return complex(self.eta_constant) / (np.asarray(k) - self.resonance.z_complex)


def _b_tolerance(V, r: Resonance, backend) -> float:
    d = r.digits
    with _arith.precision(d):
        b_fn = lambda k: solve(V, k, d, backend).b_plus  # noqa: E731
        b_prime = _derivative(b_fn, r.z, d)
        scale = max(abs(complex(r.a_prime)), abs(complex(b_prime)), 1.0)
    return 1e-8 + 1e3 * r.residual * abs(r.z_complex) * scale


def b_sign(channel: str):
    """Value of b±(z) forced by parity: +1 even, -1 odd, None without symmetry."""
    return {"even": 1, "odd": -1}.get(channel)


def b_deviation(sol, channel: str = "none") -> float:
    """max(|b+ b- - 1|, |b± - sign|) at a root, the sign term only for a definite channel."""
    with _arith.precision(sol.digits):
        dev = abs(complex(sol.b_plus * sol.b_minus - 1))
        sign = b_sign(channel)
        if sign is not None:
            dev = max(dev, abs(complex(sol.b_plus - sign)), abs(complex(sol.b_minus - sign)))
    return dev


def gamow_from_resonance(V: PiecewisePotential, r: Resonance, backend: str = "transfer",
                         b_tol: float | None = None) -> GamowFunction:
    """Build the Gamow function f+(z, .) after checking the root through b±(z).

    At a zero of a the Wronskian vanishes, so f+ = b+ f- and therefore
    b+ b- = 1. For a symmetric potential parity fixes b+ = b- = +1 (even
    channel) or -1 (odd channel); both conditions are checked.

    Raises
    ------
    InconsistentRoot
        If the deviation exceeds the tolerance implied by the root accuracy.
    """
    d = r.digits
    sol = solve(V, r.z, d, backend)
    tol = _b_tolerance(V, r, backend) if b_tol is None else b_tol
    dev = b_deviation(sol, r.channel)
    if dev > tol:
        raise InconsistentRoot(f"b(z) deviates by {dev:.3g} (tolerance {tol:.3g}); root inaccurate")
    half = V.inner_half_width or V.L
    unit = GamowFunction(r, V, 1.0, sol, (-half, half))
    xs = np.linspace(-half, half, 2001)
    mags = np.abs(unit(xs))
    i = int(np.argmax(mags))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    res = minimize_scalar(lambda x: -abs(unit(np.array([x]))[0]), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    x_star = res.x if -res.fun > mags[i] else xs[i]
    with _arith.precision(d):
        peak = sol.f_plus(float(x_star))
        scale = 1 / peak
    return GamowFunction(r, V, scale, sol, (-half, half))


def _region_quadrature(V, a, b, n=24, max_width=0.25):
    edges = np.union1d([a, b], [p for p in V.breakpoints if a < p < b])
    fine = [edges[:1]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((hi - lo) / max_width)))
        fine.append(np.linspace(lo, hi, m + 1)[1:])
    return panel_nodes(np.concatenate(fine), n)


@dataclass(frozen=True)
class TruncatedGamow:
    """1_w G sampled on [-w, w] together with its squared norm."""

    function: SampledFunction
    norm2: float
    half_width: float


def truncated_norm2(G: GamowFunction, half_width: float) -> float:
    x, w = _region_quadrature(G.potential, -half_width, half_width)
    return float(np.sum(w * np.abs(G(x)) ** 2))


def truncate(G: GamowFunction, half_width: float, n_samples: int = 2001) -> TruncatedGamow:
    """The square-integrable truncation x -> G(x) on |x| <= half_width, 0 outside."""
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    f = SampledFunction.from_callable(G, -half_width, half_width, n_samples)
    return TruncatedGamow(f, truncated_norm2(G, half_width), float(half_width))


def smooth_truncate(G: GamowFunction, half_width: float, power: int = 8,
                    n_samples: int = 4001) -> SampledFunction:
    """G(x) exp(-(x/w)^power): a Gamow state with a smooth cut-off near |x| = w.

    Unlike 1_w G its transform decays fast in k, which is what grid
    propagators need to converge at their formal order.
    """
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    reach = half_width * (200.0 ** (1.0 / power))  # taper below e^-200 at the ends

    def f(x):
        return G(x) * np.exp(-(x / half_width) ** power)

    return SampledFunction.from_callable(f, -reach, reach, n_samples)
