"""Dense complex matrix helpers for small gate maps.

Matrices are numpy ``complex128`` arrays of shape ``(n, n)``. Every function
here is pure: inputs are never mutated, results are fresh arrays, so values
can be shared freely between threads.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-10


class NotNormalError(ValueError):
    """The matrix does not commute with its adjoint within tolerance."""


def as_matrix(entries) -> np.ndarray:
    """Coerce to a square complex matrix, rejecting non-finite entries."""
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1:
        raise ValueError("matrix dimension must be at least 1")
    if not np.isfinite(m.real).all() or not np.isfinite(m.imag).all():
        raise ValueError("matrix entries must be finite")
    return m


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conjugate(np.asarray(m)).T


def trace(m: np.ndarray) -> complex:
    """Sum of diagonal entries."""
    return complex(np.trace(np.asarray(m)))


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product, requiring equal dimensions."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


@dataclass(frozen=True)
class StructureFlags:
    """Structural predicates of a matrix at a given tolerance."""

    hermitian: bool
    anti_hermitian: bool
    normal: bool
    unitary: bool


def classify(m: np.ndarray, tol: float = DEFAULT_TOL) -> StructureFlags:
    """Test Hermitian / anti-Hermitian / normal / unitary structure.

    All comparisons use the entrywise max-modulus norm against ``tol``
    (absolute).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(m)
    md = adjoint(m)
    eye = np.eye(m.shape[0])
    return StructureFlags(
        hermitian=float(np.abs(m - md).max()) <= tol,
        anti_hermitian=float(np.abs(m + md).max()) <= tol,
        normal=float(np.abs(m @ md - md @ m).max()) <= tol,
        unitary=float(np.abs(md @ m - eye).max()) <= tol,
    )


def check_selector(indices: Sequence[int], dim: int) -> tuple[int, ...]:
    """Validate a basis-index subset defining a subspace projector."""
    sel = tuple(int(i) for i in indices)
    if not sel:
        raise ValueError("subspace selector must be non-empty")
    if any(i < 0 or i >= dim for i in sel):
        raise ValueError(f"selector indices must lie in [0, {dim})")
    if any(b <= a for a, b in zip(sel, sel[1:])):
        raise ValueError("selector indices must be strictly increasing")
    return sel


def restrict(m: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    """Extract the square submatrix with the selected rows and columns."""
    m = as_matrix(m)
    sel = check_selector(indices, m.shape[0])
    return m[np.ix_(sel, sel)]


def projector(indices: Sequence[int], dim: int) -> np.ndarray:
    """Diagonal 0/1 projector onto the selected basis states."""
    sel = check_selector(indices, dim)
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[sel, sel] = 1.0
    return p


def _canonical_order(a: complex, b: complex) -> tuple[complex, complex]:
    # Sort by modulus; on exact ties, by principal argument in (-pi, pi].
    if abs(a) < abs(b):
        return a, b
    if abs(a) > abs(b):
        return b, a
    if cmath.phase(a) <= cmath.phase(b):
        return a, b
    return b, a


@dataclass(frozen=True)
class QubitSpectrum:
    """Eigenvalue pair of a 2x2 normal map, ordered |lambda0| <= |lambda1|."""

    lambda0: complex
    lambda1: complex

    def __post_init__(self):
        if not (cmath.isfinite(self.lambda0) and cmath.isfinite(self.lambda1)):
            raise ValueError("eigenvalues must be finite")
        if abs(self.lambda0) > abs(self.lambda1):
            raise ValueError("eigenvalues must be ordered |lambda0| <= |lambda1|")

    @classmethod
    def ordered(cls, a: complex, b: complex) -> "QubitSpectrum":
        lo, hi = _canonical_order(complex(a), complex(b))
        return cls(lo, hi)


def eig2_normal(m: np.ndarray, tol: float = DEFAULT_TOL) -> QubitSpectrum:
    """Both eigenvalues of a 2x2 normal matrix, by the closed-form quadratic.

    Raises :class:`NotNormalError` if the matrix is not normal within ``tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != 2:
        raise ValueError("eig2_normal requires a 2x2 matrix")
    if not classify(m, tol).normal:
        raise NotNormalError("matrix is not normal within tolerance")
    a, b = complex(m[0, 0]), complex(m[0, 1])
    c, d = complex(m[1, 0]), complex(m[1, 1])
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    r = cmath.sqrt(half_tr * half_tr - det)
    # Pick the root that avoids cancellation, recover the other from det.
    if (half_tr.conjugate() * r).real < 0.0:
        r = -r
    big = half_tr + r
    small = det / big if big != 0 else half_tr - r
    return QubitSpectrum.ordered(small, big)
