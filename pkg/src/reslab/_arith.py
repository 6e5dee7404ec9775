"""Arithmetic back ends shared by the double- and extended-precision paths.

``digits=None`` selects numpy complex128 (vectorised over k); an integer selects
mpmath with that many decimal digits (scalar k).
"""

from __future__ import annotations

import math
from contextlib import contextmanager, nullcontext

import mpmath
import numpy as np


class _NumpyOps:
    extended = False

    @staticmethod
    def asc(k):
        return np.asarray(k, dtype=complex)

    exp = staticmethod(np.exp)
    cos = staticmethod(np.cos)
    sin = staticmethod(np.sin)

    @staticmethod
    def sqrt(z):
        return np.sqrt(np.asarray(z, dtype=complex))

    @staticmethod
    def conj(z):
        return np.conj(z)

    @staticmethod
    def one_like(k):
        return np.ones_like(k)

    @staticmethod
    def zero_like(k):
        return np.zeros_like(k)

    @staticmethod
    def is_zero(z):
        return bool(np.any(z == 0))

    @staticmethod
    def finite(*vals):
        return all(np.all(np.isfinite(v)) for v in vals)

    @staticmethod
    def const(c):
        return complex(c)


class _MpOps:
    extended = True

    @staticmethod
    def asc(k):
        return mpmath.mpc(k)

    exp = staticmethod(mpmath.exp)
    cos = staticmethod(mpmath.cos)
    sin = staticmethod(mpmath.sin)
    sqrt = staticmethod(mpmath.sqrt)
    conj = staticmethod(mpmath.conj)

    @staticmethod
    def one_like(k):
        return mpmath.mpc(1)

    @staticmethod
    def zero_like(k):
        return mpmath.mpc(0)

    @staticmethod
    def is_zero(z):
        return z == 0

    @staticmethod
    def finite(*vals):
        return all(mpmath.isfinite(v) for v in vals)

    @staticmethod
    def const(c):
        return mpmath.mpmathify(c)


def ops(digits):
    return _MpOps if digits else _NumpyOps


def precision(digits):
    """Context manager setting mpmath's working precision (no-op for doubles)."""
    return mpmath.workdps(int(digits)) if digits else nullcontext()


@contextmanager
def quiet():
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        yield


def to_complex(z):
    """Convert an mpmath or numpy value (or array) to complex128."""
    if isinstance(z, (mpmath.mpc, mpmath.mpf)):
        return complex(z)
    return np.asarray(z, dtype=complex)


def digits_for_ratio(ratio: float, guard: int = 10) -> int:
    """Decimal digits needed to resolve a relative scale ``ratio`` << 1."""
    if ratio <= 0:
        return 16 + guard
    return max(16, 2 + math.ceil(-math.log10(ratio))) + guard
