"""Local polynomial regression with an indicator kernel.

Fits a polynomial of bounded total degree by least squares over the
samples inside a closed ball around the query point.  Monomials are
centered at the query and scaled by the bandwidth, so the Gram matrix of
the design doubles as the conditioning diagnostic: a fit whose Gram
minimum eigenvalue falls below a tolerance is declared degenerate and
reports the value 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _multi_indices(d: int, degree: int) -> list[tuple[int, ...]]:
    """Multi-indices of exact total degree, first coordinate largest first."""
    if d == 1:
        return [(degree,)]
    out = []
    for head in range(degree, -1, -1):
        out.extend((head, *tail) for tail in _multi_indices(d - 1, degree - head))
    return out


@dataclass(frozen=True)
class MultiIndexBasis:
    """Monomial exponent vectors of total degree <= l in d variables."""

    d: int
    l: int
    indices: tuple[tuple[int, ...], ...]

    @property
    def M(self) -> int:
        return len(self.indices)

    @property
    def exponents(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)


def enumerate_basis(d: int, l: int) -> MultiIndexBasis:
    """All multi-indices with |r| <= l, zero index first, degree ascending."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if l < 0:
        raise ValueError(f"degree must be >= 0, got {l}")
    indices: list[tuple[int, ...]] = []
    for degree in range(l + 1):
        indices.extend(_multi_indices(d, degree))
    basis = MultiIndexBasis(d=d, l=l, indices=tuple(indices))
    assert basis.M == math.comb(d + l, d)
    return basis


def default_eig_tol(basis: MultiIndexBasis) -> float:
    """Degeneracy threshold, scaled with the basis size."""
    return 1e-8 * basis.M


def scaled_design(x: np.ndarray, points: np.ndarray, h: float, basis: MultiIndexBasis) -> np.ndarray:
    """Design matrix of scaled centered monomials ((p - x)/h)^r.

    Rows are points, columns follow the basis order.  Uses the 0^0 = 1
    convention so a point at the query contributes only to the constant.
    """
    u = (np.atleast_2d(points) - np.asarray(x, dtype=float)[None, :]) / h
    exps = basis.exponents  # (M, d)
    return np.prod(u[:, None, :] ** exps[None, :, :], axis=2)


def _in_ball(x: np.ndarray, points: np.ndarray, h: float) -> np.ndarray:
    diff = np.atleast_2d(points) - np.asarray(x, dtype=float)[None, :]
    return np.einsum("ij,ij->i", diff, diff) <= h * h


def gram_matrix(x: np.ndarray, points: np.ndarray, h: float, basis: MultiIndexBasis) -> np.ndarray:
    """Moment matrix of the scaled monomials over samples in B(x, h)."""
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    points = np.atleast_2d(points)
    if len(points) == 0:
        return np.zeros((basis.M, basis.M))
    U = scaled_design(x, points[_in_ball(x, points, h)], h, basis)
    return U.T @ U


def min_eigenvalue(m: np.ndarray, sym_tol: float = 1e-10) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Closed form for 1x1 and 2x2, a symmetric eigensolver otherwise.
    Raises if the input is not symmetric to within ``sym_tol`` entrywise.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > sym_tol:
        raise ValueError("matrix is not symmetric within tolerance")
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        tr = m[0, 0] + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        disc = max(tr * tr - 4.0 * det, 0.0)
        return float((tr - math.sqrt(disc)) / 2.0)
    sym = (m + m.T) / 2.0
    return float(np.linalg.eigvalsh(sym)[0])


@dataclass(frozen=True)
class LocalPolyFit:
    """One local polynomial fit at a query point.

    Coefficients are reported in the scaled basis ((u - x)/h)^r; the
    estimate at the query is the coefficient of the zero index.  A
    degenerate fit (Gram minimum eigenvalue below tolerance) carries zero
    coefficients and estimate 0.
    """

    query: np.ndarray
    bandwidth: float
    coefficients: np.ndarray
    gram: np.ndarray
    min_eigenvalue: float
    n_in_ball: int
    degenerate: bool


def local_poly_estimate(
    x: np.ndarray,
    points: np.ndarray,
    rewards: np.ndarray,
    h: float,
    basis: MultiIndexBasis,
    eig_tol: float | None = None,
) -> tuple[float, LocalPolyFit]:
    """Least-squares polynomial value at ``x`` from samples within B(x, h).

    Solves the normal equations on the scaled-monomial Gram system; the
    returned value is independent of the scaling.  Returns 0 with
    ``degenerate=True`` when the system is rank deficient at tolerance
    ``eig_tol`` (default ``1e-8 * M``), including the empty-ball case.
    """
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    x = np.asarray(x, dtype=float).reshape(-1)
    points = np.atleast_2d(points)
    rewards = np.asarray(rewards, dtype=float).reshape(-1)
    if len(points) != len(rewards):
        raise ValueError("points and rewards must have equal length")
    if rewards.size and not np.all(np.isfinite(rewards)):
        raise ValueError("rewards must be finite")
    if eig_tol is None:
        eig_tol = default_eig_tol(basis)

    if len(points):
        mask = _in_ball(x, points, h)
        U = scaled_design(x, points[mask], h, basis)
        y = rewards[mask]
    else:
        U = np.zeros((0, basis.M))
        y = np.zeros(0)
    gram = U.T @ U
    lam = min_eigenvalue(gram)
    if lam < eig_tol:
        fit = LocalPolyFit(x, h, np.zeros(basis.M), gram, lam, len(y), True)
        return 0.0, fit
    coef = np.linalg.solve(gram, U.T @ y)
    fit = LocalPolyFit(x, h, coef, gram, lam, len(y), False)
    return float(coef[0]), fit
