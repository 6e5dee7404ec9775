"""Compactly supported functions given by samples on a uniform grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def gauss_legendre(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def panel_nodes(edges, n: int):
    """Gauss-Legendre nodes and weights on consecutive intervals ``edges``."""
    s, w = gauss_legendre(n)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    return (mid + half * s).ravel(), (half * w).ravel()


@dataclass(frozen=True)
class SampledFunction:
    """Samples ``values[i] = psi(x0 + i*dx)`` of a function supported on [x0, x_end].

    Between samples the function is the piecewise quadratic through each
    consecutive triple (i = 0, 2, 4, ...), so the number of samples must be
    odd. The function is zero outside [x0, x_end]; a jump at either end is
    allowed.
    """

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 3 or v.size % 2 == 0:
            raise ValueError("need an odd number (>= 3) of samples")
        if not self.dx > 0:
            raise ValueError("dx must be positive")

    @classmethod
    def from_callable(cls, f, a: float, b: float, n: int) -> "SampledFunction":
        if n % 2 == 0:
            n += 1
        x = np.linspace(a, b, n)
        return cls(a, (b - a) / (n - 1), np.asarray(f(x), dtype=complex))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    @property
    def x_end(self) -> float:
        return self.x0 + self.dx * (self.values.size - 1)

    @property
    def support(self) -> tuple:
        return self.x0, self.x_end

    def panel_edges(self) -> np.ndarray:
        return self.x0 + 2 * self.dx * np.arange((self.values.size - 1) // 2 + 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n_panels = (self.values.size - 1) // 2
        u = (x - self.x0) / (2 * self.dx)
        p = np.clip(np.floor(u).astype(int), 0, n_panels - 1)
        s = 2 * (u - p) - 1  # local coordinate in [-1, 1]
        f0 = self.values[2 * p]
        f1 = self.values[2 * p + 1]
        f2 = self.values[2 * p + 2]
        out = f0 * s * (s - 1) / 2 + f1 * (1 - s * s) + f2 * s * (s + 1) / 2
        inside = (x >= self.x0) & (x <= self.x_end)
        return np.where(inside, out, 0)

    def quadrature(self, breakpoints=(), n_gauss: int = 8, max_width: float | None = None):
        """Nodes and weights integrating the interpolant times a smooth factor.

        Panels are split at ``breakpoints`` (where the factor may have
        kinks) and at ``max_width``.
        """
        edges = self.panel_edges()
        extra = [b for b in breakpoints if self.x0 < b < self.x_end]
        edges = np.union1d(edges, extra)
        if max_width is not None:
            fine = [edges[:1]]
            for lo, hi in zip(edges[:-1], edges[1:]):
                m = max(1, int(np.ceil((hi - lo) / max_width)))
                fine.append(np.linspace(lo, hi, m + 1)[1:])
            edges = np.concatenate(fine)
        return panel_nodes(edges, n_gauss)

    def norm2(self) -> float:
        """Squared L2 norm of the interpolant (exact up to rounding)."""
        x, w = self.quadrature(n_gauss=4)
        return float(np.sum(w * np.abs(self(x)) ** 2))

    def normalized(self) -> "SampledFunction":
        return SampledFunction(self.x0, self.dx, self.values / np.sqrt(self.norm2()))
