"""Numerically stable linear algebra for invertible real matrices.

Provides the Cartan projection (sorted log singular values), the Jordan
projection (sorted log moduli of eigenvalues), top singular subspaces,
principal angles between subspaces, and exterior (compound) powers.

Long matrix products are handled through :class:`ScaledMatrix`, which stores
a matrix as an operator-norm-normalized unit part together with a log-scale
offset, so that products of hundreds of factors neither overflow nor
underflow doubles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EigenSolverFailure, GapTooSmall, SingularMatrix

# Ratio sigma_1/sigma_d beyond which a matrix is treated as numerically singular.
CONDITION_LIMIT = 1e13

# Default gap tolerance, relative to (||mu|| + 1).
GAP_TOL = 1e-8

# Tolerance for angle computations and orthonormality checks.
ANGLE_TOL = 1e-9


def as_matrix(g) -> np.ndarray:
    """Coerce input to a square float matrix (no invertibility check)."""
    m = np.asarray(g, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_invertible(g: np.ndarray, condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """Validate that ``g`` is numerically invertible.

    Raises SingularMatrix when the singular-value ratio exceeds the
    conditioning limit (this covers exact singularity, where the ratio is
    infinite).
    """
    m = as_matrix(g)
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= 0.0 or s[0] / s[-1] > condition_limit:
        ratio = math.inf if s[-1] <= 0.0 else s[0] / s[-1]
        raise SingularMatrix(f"singular-value ratio {ratio:.3e} exceeds limit {condition_limit:.1e}")
    return m


@dataclass(frozen=True)
class ScaledMatrix:
    """An invertible matrix stored as ``exp(log_scale) * unit`` where the
    unit part has largest singular value 1.

    The factored form survives products of arbitrarily many well-conditioned
    factors: the unit part stays representable while the scalar magnitude
    accumulates in ``log_scale`` (natural-log units).
    """

    unit: np.ndarray
    log_scale: float

    @classmethod
    def from_matrix(cls, g) -> "ScaledMatrix":
        m = as_matrix(g)
        top = np.linalg.norm(m, 2)
        if top <= 0.0 or not np.isfinite(top):
            raise SingularMatrix("cannot normalize a zero or non-finite matrix")
        return cls(unit=m / top, log_scale=math.log(top))

    @classmethod
    def identity(cls, dim: int) -> "ScaledMatrix":
        return cls(unit=np.eye(dim), log_scale=0.0)

    @property
    def dim(self) -> int:
        return self.unit.shape[0]

    def matmul(self, other: "ScaledMatrix") -> "ScaledMatrix":
        """Product self @ other, renormalized."""
        raw = self.unit @ other.unit
        top = np.linalg.norm(raw, 2)
        if top <= 0.0 or not np.isfinite(top):
            raise SingularMatrix("product collapsed to zero or non-finite matrix")
        return ScaledMatrix(unit=raw / top, log_scale=self.log_scale + other.log_scale + math.log(top))

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return self.matmul(other)

    def power(self, exponent: int) -> "ScaledMatrix":
        """Integer power by binary squaring (exponent >= 0)."""
        if exponent < 0:
            raise ValueError("negative powers not supported; invert first")
        result = ScaledMatrix.identity(self.dim)
        base = self
        e = exponent
        while e > 0:
            if e & 1:
                result = result @ base
            base = base @ base
            e >>= 1
        return result

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; may overflow for large log_scale."""
        return math.exp(self.log_scale) * self.unit


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^d given by an orthonormal basis (d x k)."""

    basis: np.ndarray

    @property
    def dim_ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim_sub(self) -> int:
        return self.basis.shape[1]

    def __post_init__(self):
        b = self.basis
        gram = b.T @ b
        if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-8):
            raise ValueError("subspace basis columns are not orthonormal")

    @classmethod
    def span(cls, vectors) -> "Subspace":
        """Orthonormalize the given column vectors."""
        m = np.atleast_2d(np.asarray(vectors, dtype=float))
        if m.shape[0] < m.shape[1]:
            m = m.T
        q, _ = np.linalg.qr(m)
        return cls(basis=q)


def _unit_and_scale(g) -> tuple[np.ndarray, float]:
    if isinstance(g, ScaledMatrix):
        return g.unit, g.log_scale
    return as_matrix(g), 0.0


def cartan_projection(g, condition_limit: float = CONDITION_LIMIT) -> np.ndarray:
    """Sorted (descending) logarithms of the singular values of ``g``.

    For a ScaledMatrix the log-scale offset is added to every component.
    Raises SingularMatrix when the singular-value ratio exceeds the
    conditioning limit.
    """
    unit, off = _unit_and_scale(g)
    s = np.linalg.svd(unit, compute_uv=False)
    if s[-1] <= 0.0 or s[0] / s[-1] > condition_limit:
        ratio = math.inf if s[-1] <= 0.0 else s[0] / s[-1]
        raise SingularMatrix(f"singular-value ratio {ratio:.3e} exceeds limit {condition_limit:.1e}")
    return np.log(s) + off


def jordan_projection(g) -> np.ndarray:
    """Sorted (descending) logarithms of the moduli of the eigenvalues.

    Complex eigenvalues contribute their moduli only.  For a ScaledMatrix the
    eigenvalues of the unit part are computed and the log-scale offset is
    added componentwise (eigenvalue moduli scale linearly with a scalar
    factor).
    """
    unit, off = _unit_and_scale(g)
    try:
        ev = np.linalg.eigvals(unit)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
        raise EigenSolverFailure(str(exc)) from exc
    moduli = np.abs(ev)
    if np.any(moduli <= 0.0):
        raise SingularMatrix("zero eigenvalue modulus; matrix is singular")
    return np.sort(np.log(moduli))[::-1] + off


def xi_subspace(g, j: int, gap_tol: float = GAP_TOL) -> Subspace:
    """Span of the top-``j`` left singular directions of ``g``.

    Requires 1 <= j <= d-1 and a singular-value gap
    ``mu_j - mu_{j+1}`` above ``gap_tol`` (relative to ||mu|| + 1), otherwise
    the subspace is ill-defined and GapTooSmall is raised.
    """
    unit, off = _unit_and_scale(g)
    d = unit.shape[0]
    if not 1 <= j <= d - 1:
        raise ValueError(f"j must be in [1, {d - 1}], got {j}")
    u, s, _ = np.linalg.svd(unit)
    mu = np.log(s) + off
    gap = mu[j - 1] - mu[j]
    if gap <= gap_tol * (np.linalg.norm(mu) + 1.0):
        raise GapTooSmall(gap)
    return Subspace(basis=u[:, :j])


def xi_subspace_of_inverse(g, j: int, gap_tol: float = GAP_TOL) -> Subspace:
    """Top-``j`` left singular subspace of ``g^{-1}``, computed without
    forming the inverse.

    If g = U S V^t then g^{-1} = V S^{-1} U^t, so the top-j left singular
    directions of the inverse are the right singular directions of g for its
    j smallest singular values.
    """
    unit, off = _unit_and_scale(g)
    d = unit.shape[0]
    if not 1 <= j <= d - 1:
        raise ValueError(f"j must be in [1, {d - 1}], got {j}")
    _, s, vt = np.linalg.svd(unit)
    mu = np.log(s) + off
    # gap of the inverse at index j equals mu_{d-j} - mu_{d-j+1} of g
    gap = mu[d - j - 1] - mu[d - j]
    if gap <= gap_tol * (np.linalg.norm(mu) + 1.0):
        raise GapTooSmall(gap)
    return Subspace(basis=vt[d - j:, :].T[:, ::-1])


def principal_angle(u: Subspace, v: Subspace) -> float:
    """Smallest principal angle between two subspaces, in [0, pi/2].

    Symmetric in its arguments.  Raises DimensionMismatch when the ambient
    dimensions differ.
    """
    if u.dim_ambient != v.dim_ambient:
        raise DimensionMismatch(
            f"ambient dimensions differ: {u.dim_ambient} vs {v.dim_ambient}"
        )
    overlap = u.basis.T @ v.basis
    s = np.linalg.svd(overlap, compute_uv=False)
    c = min(1.0, float(s[0])) if s.size else 0.0
    return math.acos(c)


def exterior_power(g, i: int) -> np.ndarray:
    """Matrix of the i-th exterior power of ``g`` in the lexicographic wedge
    basis e_{k1} ^ ... ^ e_{ki}, k1 < ... < ki.

    Entries are the i x i minors of g; the top log singular value of the
    result is mu_1(g) + ... + mu_i(g).
    """
    m = as_matrix(g)
    d = m.shape[0]
    if not 1 <= i <= d:
        raise ValueError(f"i must be in [1, {d}], got {i}")
    if i == 1:
        return m.copy()
    subsets = list(itertools.combinations(range(d), i))
    k = len(subsets)
    blocks = np.empty((k, k, i, i))
    for a, rows in enumerate(subsets):
        sub = m[np.ix_(rows, range(d))]
        for b, cols in enumerate(subsets):
            blocks[a, b] = sub[:, cols]
    return np.linalg.det(blocks)


def principal_angles_all(u: Subspace, v: Subspace) -> np.ndarray:
    """All principal angles (ascending) between two subspaces."""
    if u.dim_ambient != v.dim_ambient:
        raise DimensionMismatch(
            f"ambient dimensions differ: {u.dim_ambient} vs {v.dim_ambient}"
        )
    s = np.linalg.svd(u.basis.T @ v.basis, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def subspace_distance(u: Subspace, v: Subspace) -> float:
    """Largest principal angle between equal-dimension subspaces (a metric on
    the Grassmannian)."""
    if u.dim_sub != v.dim_sub:
        raise DimensionMismatch(f"subspace dimensions differ: {u.dim_sub} vs {v.dim_sub}")
    angles = principal_angles_all(u, v)
    return float(angles[-1]) if angles.size else 0.0
