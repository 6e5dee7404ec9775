"""Compactly supported piecewise-constant potentials."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PiecewisePotential:
    """V(x) = heights[j] on [breakpoints[j], breakpoints[j+1]), zero outside.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing positions x_0 < ... < x_n.
    heights : sequence of float
        The n values on the intervals between consecutive breakpoints.
    kind : str
        ``"doublewell"``, ``"rect"``, ``"free"`` or ``"custom"``.
    params : dict
        Construction parameters (``ell``, ``delta``, ``lambda``) for the
        canonical shapes; used by the closed-form backend.
    """

    breakpoints: tuple
    heights: tuple
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        bp = tuple(float(x) for x in self.breakpoints)
        hs = tuple(float(h) for h in self.heights)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "heights", hs)
        if len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if len(hs) != len(bp) - 1:
            raise ValueError(f"{len(bp)} breakpoints need {len(bp) - 1} heights, got {len(hs)}")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(np.isfinite(bp)) or not all(np.isfinite(hs)):
            raise ValueError("breakpoints and heights must be finite")
        if self.kind != "free" and not any(hs):
            raise ValueError("all heights are zero; use PiecewisePotential.free()")

    @classmethod
    def free(cls, L: float = 1.0) -> "PiecewisePotential":
        return cls((-L, L), (0.0,), kind="free", params={"L": L})

    @property
    def L(self) -> float:
        """Half-width of the smallest symmetric interval containing the support."""
        return max(abs(self.breakpoints[0]), abs(self.breakpoints[-1]))

    @property
    def region_heights(self) -> tuple:
        """Heights of all n + 2 regions, including the two free outer ones."""
        return (0.0, *self.heights, 0.0)

    @property
    def n_regions(self) -> int:
        return len(self.heights) + 2

    @property
    def is_free(self) -> bool:
        return not any(self.heights)

    @property
    def inner_half_width(self) -> float | None:
        """ell for the double well (the inner, potential-free region)."""
        return self.params.get("ell") if self.kind == "doublewell" else None

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        bp = np.asarray(self.breakpoints)
        return bool(np.allclose(bp, -bp[::-1], atol=tol)
                    and np.allclose(self.heights, self.heights[::-1], atol=tol))

    def region_index(self, x):
        """0 for x < x_0, j for x_{j-1} <= x < x_j, n + 1 for x >= x_n."""
        return np.searchsorted(self.breakpoints, x, side="right")

    def __call__(self, x):
        return evaluate(self, x)


def evaluate(V: PiecewisePotential, x):
    """Right-continuous piecewise lookup of V at ``x`` (scalar or array)."""
    table = np.asarray(V.region_heights)
    out = table[V.region_index(np.asarray(x, dtype=float))]
    return float(out) if np.ndim(out) == 0 else out


def _check_positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


def make_double_well(ell: float, delta: float, lam: float) -> PiecewisePotential:
    """Barriers of height ``lam`` on [-(ell+delta), -ell] and [ell, ell+delta]."""
    _check_positive(ell=ell, delta=delta, lam=lam)
    return PiecewisePotential(
        (-(ell + delta), -ell, ell, ell + delta),
        (lam, 0.0, lam),
        kind="doublewell",
        params={"ell": float(ell), "delta": float(delta), "lambda": float(lam)},
    )


def make_rectangular_well(ell: float, lam: float) -> PiecewisePotential:
    """Single step ``lam * 1_[-ell, ell]``."""
    _check_positive(ell=ell, lam=lam)
    return PiecewisePotential((-ell, ell), (lam,), kind="rect",
                              params={"ell": float(ell), "lambda": float(lam)})
