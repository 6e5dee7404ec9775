"""Jost-type scattering solutions f±(k, x) for piecewise-constant potentials.

With the outgoing coefficient fixed to one (c± = 1) the solutions are

    f+(k, x) = a e^{ikx} + b+ e^{-ikx}  (x < -L),    e^{ikx}   (x > L)
    f-(k, x) = e^{-ikx}                 (x < -L),    a e^{-ikx} + b- e^{ikx}  (x > L)

On every region j they read alpha_j e^{i q_j x} + beta_j e^{-i q_j x} with
q_j = sqrt(k^2 - lambda_j) (principal branch; outer regions use q = k).
Everything here is entire in k away from k = 0, so complex k is allowed.

Two back ends produce the same :class:`ScatteringSolution`: a transfer-matrix
sweep that works for any :class:`~reslab.potential.PiecewisePotential`, and
the closed forms for the symmetric double well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np

from . import _arith
from .errors import AtResonance, DegeneratePoint, PrecisionExhausted
from .potential import PiecewisePotential

SQRT_2PI = math.sqrt(2 * math.pi)
EPS_FLOOR = 1e-300


@dataclass(frozen=True)
class ScatteringSolution:
    """Coefficients of f± at one k (mpmath) or a batch of k (numpy).

    ``region_amplitudes_plus[j] = (alpha_j, beta_j)`` on region ``j``, counted
    from the left outer region (0) to the right outer region (n + 1); the
    same for f-.
    """

    potential: PiecewisePotential
    k: object
    a: object
    a_minus: object
    b_plus: object
    b_minus: object
    region_amplitudes_plus: tuple
    region_amplitudes_minus: tuple
    wavenumbers: tuple
    digits: int | None = None

    @property
    def extended(self) -> bool:
        return bool(self.digits)

    def _evaluate(self, amplitudes, x, derivative=False):
        x = np.asarray(x, dtype=float)
        regions = self.potential.region_index(x)
        if self.extended:
            out = []
            with _arith.precision(self.digits):
                for xi, r in zip(x.ravel(), regions.ravel()):
                    alpha, beta = amplitudes[r]
                    q = self.wavenumbers[r]
                    ep = mpmath.exp(1j * q * xi)
                    em = mpmath.exp(-1j * q * xi)
                    out.append(1j * q * (alpha * ep - beta * em) if derivative
                               else alpha * ep + beta * em)
            return out[0] if x.ndim == 0 else np.array(out, dtype=object).reshape(x.shape)
        k = np.asarray(self.k)
        out = np.zeros(k.shape + x.shape, dtype=complex)
        with _arith.quiet():
            for r in np.unique(regions):
                sel = regions == r
                alpha, beta = (np.asarray(c)[..., None] for c in amplitudes[r])
                q = np.asarray(self.wavenumbers[r])[..., None]
                xs = x[sel]
                ep = np.exp(1j * q * xs)
                em = np.exp(-1j * q * xs)
                val = 1j * q * (alpha * ep - beta * em) if derivative else alpha * ep + beta * em
                out[..., sel] = val
        return out

    def f_plus(self, x, derivative=False):
        """f+(k, x); shape ``k.shape + x.shape`` on the numpy path."""
        return self._evaluate(self.region_amplitudes_plus, x, derivative)

    def f_minus(self, x, derivative=False):
        return self._evaluate(self.region_amplitudes_minus, x, derivative)


class EigenfunctionValue(NamedTuple):
    u_plus: object
    u_minus: object


def _wavenumbers(V: PiecewisePotential, k, op, branch_signs=None):
    signs = branch_signs if branch_signs is not None else (1,) * len(V.heights)
    qs = [k]
    for lam, sign in zip(V.heights, signs):
        qs.append(sign * op.sqrt(k * k - op.const(lam)))
    qs.append(k)
    return qs


def _sweep(V, qs, op, direction):
    """Match value and derivative across each breakpoint.

    direction = -1 sweeps right-to-left starting from (1, 0) on the right
    outer region (f+); +1 sweeps left-to-right from (0, 1) on the left
    outer region (f-).
    """
    n = len(qs)
    k = qs[0]
    alpha = [None] * n
    beta = [None] * n
    if direction < 0:
        alpha[-1], beta[-1] = op.one_like(k), op.zero_like(k)
        order = range(n - 2, -1, -1)
    else:
        alpha[0], beta[0] = op.zero_like(k), op.one_like(k)
        order = range(1, n)
    for j in order:
        src = j + 1 if direction < 0 else j - 1
        xb = V.breakpoints[j] if direction < 0 else V.breakpoints[j - 1]
        xb = op.const(xb)
        q_src, q_dst = qs[src], qs[j]
        ep = alpha[src] * op.exp(1j * q_src * xb)
        em = beta[src] * op.exp(-1j * q_src * xb)
        ratio = q_src / q_dst
        alpha[j] = op.exp(-1j * q_dst * xb) / 2 * (ep * (1 + ratio) + em * (1 - ratio))
        beta[j] = op.exp(1j * q_dst * xb) / 2 * (ep * (1 - ratio) + em * (1 + ratio))
    return list(zip(alpha, beta))


def _digits_needed(V, k) -> int:
    kk = complex(np.max(np.abs(np.asarray(_arith.to_complex(k)))))
    growth = sum(
        abs(complex(np.sqrt(kk * kk - lam + 0j)).imag) * (b - a)
        for lam, a, b in zip(V.heights, V.breakpoints, V.breakpoints[1:])
    ) + abs(kk.imag) * 2 * V.L
    return 16 + math.ceil(2 * growth / math.log(10))


def _check_k(k, op):
    if op.is_zero(k):
        raise DegeneratePoint("k = 0 is excluded: f± and a(k) are singular there")


def solve_scattering(V: PiecewisePotential, k, digits: int | None = None,
                     branch_signs=None) -> ScatteringSolution:
    """Transfer-matrix solution of the scattering problem at wavenumber(s) ``k``.

    Parameters
    ----------
    V : PiecewisePotential
    k : complex or array of complex
        Arrays are only accepted in double precision.
    digits : int, optional
        Work in mpmath with this many decimal digits instead of complex128.
    branch_signs : sequence of +1/-1, optional
        Per inner region, use -sqrt(k^2 - lambda_j) instead of the principal
        root. Results are branch invariant; the amplitude pair of a flipped
        region comes back swapped.

    Raises
    ------
    DegeneratePoint
        If k = 0 or k^2 equals one of the heights.
    PrecisionExhausted
        If the double-precision sweep overflows.
    """
    op = _arith.ops(digits)
    with _arith.precision(digits), _arith.quiet():
        k = op.asc(k)
        _check_k(k, op)
        qs = _wavenumbers(V, k, op, branch_signs)
        if any(op.is_zero(q) for q in qs[1:-1]):
            raise DegeneratePoint("k^2 coincides with a potential height")
        plus = _sweep(V, qs, op, -1)
        minus = _sweep(V, qs, op, +1)
        a_plus, b_plus = plus[0]
        b_minus, a_minus = minus[-1]
        if not op.finite(a_plus, b_plus, a_minus, b_minus):
            need = _digits_needed(V, k)
            raise PrecisionExhausted(
                f"double precision overflowed; rerun with digits >= {need}", need)
    return ScatteringSolution(V, k, a_plus, a_minus, b_plus, b_minus,
                              tuple(plus), tuple(minus), tuple(qs), digits)


def double_well_coefficients(ell, delta, lam, k, digits=None, kt_sign=1) -> dict:
    """The closed-form auxiliary functions of the double well.

    Returns a dict with ``a, a1, a2, A, A_bar, b_plus, c1, c2, c3, c4, kt``.
    ``A_bar`` is the analytic continuation of the complex conjugate of ``A``
    (equal to ``conj(A)`` for real k). ``kt_sign=-1`` selects the other
    branch of kt; every coefficient is even in kt except that c1 and c2
    (and c3, c4) trade places.
    """
    op = _arith.ops(digits)
    with _arith.precision(digits), _arith.quiet():
        k = op.asc(k)
        _check_k(k, op)
        ell, delta, lam = op.const(ell), op.const(delta), op.const(lam)
        kt = kt_sign * op.sqrt(k * k - lam)
        if op.is_zero(kt):
            raise DegeneratePoint("k^2 coincides with the barrier height")
        s = op.sin(kt * delta)
        plus = k / kt + kt / k
        minus = k / kt - kt / k
        A = op.cos(kt * delta) - 0.5j * plus * s
        A_bar = op.cos(kt * delta) + 0.5j * plus * s
        a1 = op.exp(1j * k * delta) * (A - 0.5j * op.exp(2j * k * ell) * minus * s)
        a2 = op.exp(1j * k * delta) * (A + 0.5j * op.exp(2j * k * ell) * minus * s)
        b_plus = -0.5j * minus * s * (A * op.exp(-2j * k * ell) + A_bar * op.exp(2j * k * ell))
        c1 = (op.exp(1j * kt * ell - 1j * k * (ell - delta)) * 0.5 * (1 + k / kt) * A
              - 0.25j * op.exp(1j * kt * ell + 1j * k * (3 * ell + delta)) * (1 - k / kt) * minus * s)
        c2 = (op.exp(-1j * kt * ell - 1j * k * (ell - delta)) * 0.5 * (1 - k / kt) * A
              - 0.25j * op.exp(-1j * kt * ell + 1j * k * (3 * ell + delta)) * (1 + k / kt) * minus * s)
        c3 = 0.5 * (1 + k / kt) * op.exp(1j * (k - kt) * (ell + delta))
        c4 = 0.5 * (1 - k / kt) * op.exp(1j * (k + kt) * (ell + delta))
        a = a1 * a2
    return dict(a=a, a1=a1, a2=a2, A=A, A_bar=A_bar, b_plus=b_plus,
                c1=c1, c2=c2, c3=c3, c4=c4, kt=kt, k=k)


def closed_form_double_well(ell, delta, lam, k, digits=None, potential=None) -> ScatteringSolution:
    """Closed-form :class:`ScatteringSolution` for the symmetric double well.

    f- follows from f+ by parity, f-(k, x) = f+(k, -x).
    """
    from .potential import make_double_well

    V = potential if potential is not None else make_double_well(ell, delta, lam)
    c = double_well_coefficients(ell, delta, lam, k, digits)
    k, kt = c["k"], c["kt"]
    one = _arith.ops(digits).one_like(k)
    zero = _arith.ops(digits).zero_like(k)
    with _arith.precision(digits):
        plus = (
            (c["a"], c["b_plus"]),
            (c["c1"], c["c2"]),
            ((c["a1"] + c["a2"]) / 2, (c["a1"] - c["a2"]) / 2),
            (c["c3"], c["c4"]),
            (one, zero),
        )
    minus = tuple((beta, alpha) for alpha, beta in reversed(plus))
    return ScatteringSolution(V, k, c["a"], c["a"], c["b_plus"], c["b_plus"],
                              plus, minus, (k, kt, k, kt, k), digits)


def solve(V: PiecewisePotential, k, digits=None, backend: str = "transfer"):
    """Dispatch to the transfer-matrix or closed-form back end."""
    if backend == "transfer":
        return solve_scattering(V, k, digits)
    if backend == "closed_form":
        if V.kind != "doublewell":
            raise ValueError("closed-form back end only covers the double well")
        p = V.params
        return closed_form_double_well(p["ell"], p["delta"], p["lambda"], k, digits, potential=V)
    raise ValueError(f"unknown backend {backend!r}")


def a_function(V: PiecewisePotential, digits=None, backend="transfer"):
    """Return k -> a(k) at the given precision."""
    if backend == "closed_form":
        p = V.params
        return lambda k: double_well_coefficients(p["ell"], p["delta"], p["lambda"], k, digits)["a"]

    def a_of_k(k):
        op = _arith.ops(digits)
        with _arith.precision(digits), _arith.quiet():
            k = op.asc(k)
            _check_k(k, op)
            qs = _wavenumbers(V, k, op)
            return _sweep(V, qs, op, -1)[0][0]

    return a_of_k


def eigenfunction_at(sol: ScatteringSolution, x) -> EigenfunctionValue:
    """Normalised generalised eigenfunctions u± = f± / (sqrt(2 pi) a)."""
    with _arith.precision(sol.digits):
        if sol.extended:
            if sol.a == 0:
                raise AtResonance(f"a(k) = 0 at k = {sol.k}")
            norm = mpmath.sqrt(2 * mpmath.pi) * sol.a
        else:
            if np.any(np.asarray(sol.a) == 0):
                raise AtResonance("a(k) = 0: u± have a pole here")
            norm = SQRT_2PI * np.asarray(sol.a)
            if np.ndim(x) > 0:
                norm = norm[..., None]
        return EigenfunctionValue(sol.f_plus(x) / norm, sol.f_minus(x) / norm)


def transmission_reflection(sol: ScatteringSolution):
    """(T, R+, R-) = (1, |b+|^2, |b-|^2) / |a|^2 for real k > 0."""
    k = _arith.to_complex(sol.k)
    if np.any(np.asarray(k).imag != 0) or np.any(np.asarray(k).real <= 0):
        raise ValueError("transmission/reflection are defined for real k > 0 only")
    a2 = np.abs(_arith.to_complex(sol.a)) ** 2
    T = 1 / a2
    R_plus = np.abs(_arith.to_complex(sol.b_plus)) ** 2 / a2
    R_minus = np.abs(_arith.to_complex(sol.b_minus)) ** 2 / a2
    return T, R_plus, R_minus


def wronskian(sol: ScatteringSolution, x):
    """W(f+, f-)(x) = f+ f-' - f+' f-."""
    return (sol.f_plus(x) * sol.f_minus(x, derivative=True)
            - sol.f_plus(x, derivative=True) * sol.f_minus(x))


def wronskian_residual(sol: ScatteringSolution, x_samples) -> float:
    """max_x |W(x) + 2ik a| / (|2ik a| + 1e-300); small means consistent."""
    x_samples = np.asarray(x_samples, dtype=float)
    if x_samples.size < 2:
        raise ValueError("need at least two sample points")
    with _arith.precision(sol.digits):
        W = wronskian(sol, x_samples)
        target = -2j * sol.k * sol.a
        if sol.extended:
            return float(max(abs(w - target) for w in W) / (abs(target) + EPS_FLOOR))
        target = np.asarray(target)[..., None]
        return float(np.max(np.abs(W - target) / (np.abs(target) + EPS_FLOOR)))


def bound_state_diagnostic(V: PiecewisePotential, n_scan: int = 4000) -> bool:
    """True if a(i kappa) changes sign on (0, kappa_max] (a bound state).

    kappa_max = sqrt(-min V); potentials without negative parts cannot bind.
    Advisory only: a zero closer than the grid spacing to another one may
    be missed.
    """
    vmin = min(V.heights)
    if vmin >= 0:
        return False
    kappa_max = math.sqrt(-vmin)
    kappa = np.linspace(kappa_max / n_scan, kappa_max, n_scan)
    # nudge off exact coincidences k^2 = lambda_j
    kappa = kappa * (1 + 1e-9)
    with _arith.quiet():
        a = np.asarray(a_function(V)(1j * kappa))
    if not np.all(np.isfinite(a)):
        return True
    re = a.real
    return bool(np.any(np.sign(re[1:]) != np.sign(re[:-1])) or np.any(re == 0))
