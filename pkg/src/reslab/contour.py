"""Zero counting by the argument principle (winding number of f along a contour)."""

from __future__ import annotations

import numpy as np


def winding_number(f, path, n_initial: int = 256, max_angle: float = np.pi / 4,
                   max_depth: int = 30) -> int:
    """Winding number of f(path(s)) around 0 for s in [0, 1].

    ``f`` and ``path`` must accept numpy arrays. Segments whose phase
    increment exceeds ``max_angle`` are bisected until the increments are
    unambiguous.
    """
    s = np.linspace(0.0, 1.0, n_initial + 1)
    vals = np.asarray(f(path(s)), dtype=complex)
    if np.any(vals == 0) or not np.all(np.isfinite(vals)):
        raise ValueError("f vanishes or is not finite on the contour")
    total = 0.0
    stack = [(s[i], s[i + 1], vals[i], vals[i + 1], 0) for i in range(n_initial)][::-1]
    while stack:
        s0, s1, f0, f1, depth = stack.pop()
        d = np.angle(f1 / f0)
        if abs(d) <= max_angle or depth >= max_depth:
            total += d
            continue
        sm = 0.5 * (s0 + s1)
        fm = complex(np.asarray(f(path(np.array([sm]))), dtype=complex)[0])
        if fm == 0:
            raise ValueError("f vanishes on the contour")
        stack.append((sm, s1, fm, f1, depth + 1))
        stack.append((s0, sm, f0, fm, depth + 1))
    return int(round(total / (2 * np.pi)))


def rectangle(re_lo: float, re_hi: float, im_lo: float, im_hi: float):
    """Counter-clockwise rectangle parametrised by s in [0, 1]."""
    corners = np.array([complex(re_lo, im_lo), complex(re_hi, im_lo),
                        complex(re_hi, im_hi), complex(re_lo, im_hi)])

    def path(s):
        s = np.asarray(s) * 4
        i = np.minimum(np.floor(s).astype(int), 3)
        t = s - i
        return corners[i] + t * (corners[(i + 1) % 4] - corners[i])

    return path


def circle(center: complex, radius: float):
    def path(s):
        return center + radius * np.exp(2j * np.pi * np.asarray(s))

    return path


def count_zeros_rectangle(f, re_lo, re_hi, im_lo, im_hi, **kw) -> int:
    return winding_number(f, rectangle(re_lo, re_hi, im_lo, im_hi), **kw)


def count_zeros_disk(f, center, radius, **kw) -> int:
    return winding_number(f, circle(center, radius), **kw)
