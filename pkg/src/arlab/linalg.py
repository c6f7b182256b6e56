"""Determinant helpers used by the curve and geometry modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERACY_RTOL = 1e-12


@dataclass(frozen=True)
class Determinant:
    value: float
    scale: float  # product of column norms (Hadamard bound)
    degenerate: bool

    @property
    def relative(self) -> float:
        """|det| / Hadamard bound, a cheap conditioning indicator in [0, 1]."""
        return abs(self.value) / self.scale if self.scale > 0 else 0.0


def det(m):
    """Determinant by LU with partial pivoting; broadcasts over leading axes."""
    return np.linalg.det(np.asarray(m, dtype=float))


def hadamard_scale(m):
    return np.prod(np.linalg.norm(np.asarray(m, dtype=float), axis=-2), axis=-1)


def det_detail(m) -> Determinant:
    """Determinant plus a degeneracy flag.

    A value below ``1e-12`` times the product of column norms is flagged as
    numerically degenerate instead of being reported as a clean zero or a
    trustworthy small number.
    """
    m = np.asarray(m, dtype=float)
    value = float(det(m))
    scale = float(hadamard_scale(m))
    degenerate = scale == 0.0 or abs(value) < DEGENERACY_RTOL * scale
    return Determinant(value, scale, degenerate)


def vandermonde(x, axis=-1):
    """prod_{i<j} (x_j - x_i) along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=float), axis, -1)
    n = x.shape[-1]
    out = np.ones(x.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (x[..., j] - x[..., i])
    return out if out.ndim else float(out)
