"""Dense operator algebra on a bipartite space H1 (x) H2.

Every composite operator uses row-major tensor indexing: the basis vector
|i1>|i2> sits at position ``i1 * d2 + i2``. This matches ``np.kron`` and
``reshape(d1, d2, d1, d2)``, and every other module relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from .errors import InternalConsistencyError, ValidationError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "BipartiteDensity",
    "HermitianObservable",
    "OrthogonalProjector",
    "PureBipartiteState",
    "OrthogonalityCertificate",
    "opnorm",
    "hermitian_part",
    "tensor_product",
    "lift",
    "partial_trace",
    "range_basis",
    "range_projector",
    "hs_inner",
    "hs_norm",
    "states_orthogonal",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds used throughout the package.

    zero_tol
        Operator-norm threshold below which a matrix counts as zero.
    rank_tol
        Relative eigenvalue/singular-value cutoff (times the largest one).
    degeneracy_tol
        Two eigenvalues closer than this are treated as one.
    """

    zero_tol: float = 1e-10
    rank_tol: float = 1e-12
    degeneracy_tol: float = 1e-8

    def __post_init__(self):
        for name in ("zero_tol", "rank_tol", "degeneracy_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be strictly positive")
        if not self.rank_tol < self.zero_tol < 1:
            raise ValidationError("tolerances must satisfy rank_tol < zero_tol < 1")


DEFAULT_TOL = ToleranceConfig()


def opnorm(a) -> float:
    """Spectral norm (largest singular value); 0 for empty arrays."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim == 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a, 2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _as_square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def _check_dims(d1, d2):
    for name, d in (("d1", d1), ("d2", d2)):
        if int(d) != d or d < 1:
            raise ValidationError(f"{name} must be a positive integer, got {d!r}")


@dataclass(frozen=True)
class BipartiteDensity:
    """Statistical operator on a d1*d2 dimensional composite space."""

    d1: int
    d2: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_dims(self.d1, self.d2)
        m = _as_square(self.matrix, "density matrix")
        if m.shape[0] != self.d1 * self.d2:
            raise ValidationError(
                f"density matrix has size {m.shape[0]}, expected d1*d2 = {self.d1 * self.d2}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix, d1, d2, tol: ToleranceConfig = DEFAULT_TOL, clean=True):
        """Validate ``matrix`` as a density and return it.

        With ``clean`` the Hermitian part is taken and eigenvalues in
        ``[-zero_tol, 0)`` are clipped to zero; larger violations raise.
        """
        m = _as_square(matrix, "density matrix")
        if opnorm(m - m.conj().T) > tol.zero_tol:
            raise ValidationError("density matrix is not Hermitian")
        m = hermitian_part(m)
        evals, evecs = np.linalg.eigh(m)
        if evals.min() < -tol.zero_tol:
            raise ValidationError(
                f"density matrix has negative eigenvalue {evals.min():.3e}"
            )
        if abs(np.trace(m).real - 1.0) > tol.zero_tol:
            raise ValidationError(f"density matrix has trace {np.trace(m).real!r}, expected 1")
        if clean and evals.min() < 0:
            evals = np.clip(evals, 0.0, None)
            m = (evecs * evals) @ evecs.conj().T
            m = m / np.trace(m).real
        return cls(d1, d2, m)

    @classmethod
    def from_pure(cls, state: "PureBipartiteState"):
        v = state.vector
        return cls(state.d1, state.d2, np.outer(v, v.conj()))

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    def reduced(self, keep: int) -> np.ndarray:
        return partial_trace(self.matrix, self.d1, self.d2, keep)


@dataclass(frozen=True)
class HermitianObservable:
    subsystem: int
    matrix: np.ndarray = field(repr=False)
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        if self.subsystem not in (1, 2):
            raise ValidationError("subsystem must be 1 or 2")
        m = _as_square(self.matrix, "observable")
        if opnorm(m - m.conj().T) > self.tol.zero_tol * max(1.0, opnorm(m)):
            raise ValidationError("observable is not Hermitian")
        m = hermitian_part(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class OrthogonalProjector:
    """Hermitian idempotent; ``subsystem`` is None for composite-space projectors."""

    subsystem: int | None
    matrix: np.ndarray = field(repr=False)
    rank: int = -1
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        if self.subsystem not in (1, 2, None):
            raise ValidationError("subsystem must be 1, 2 or None")
        m = _as_square(self.matrix, "projector")
        if opnorm(m - m.conj().T) > self.tol.zero_tol:
            raise ValidationError("projector is not Hermitian")
        m = hermitian_part(m)
        if opnorm(m @ m - m) > self.tol.zero_tol:
            raise ValidationError("projector is not idempotent")
        rank = int(round(np.trace(m).real))
        if self.rank not in (-1, rank):
            raise ValidationError(f"declared rank {self.rank} differs from trace {rank}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rank", rank)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_zero(self) -> bool:
        return self.rank == 0

    def complement(self) -> "OrthogonalProjector":
        return OrthogonalProjector(
            self.subsystem, np.eye(self.dim) - self.matrix, self.dim - self.rank, self.tol
        )


@dataclass(frozen=True)
class PureBipartiteState:
    d1: int
    d2: int
    vector: np.ndarray = field(repr=False)
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        _check_dims(self.d1, self.d2)
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        if v.shape[0] != self.d1 * self.d2:
            raise ValidationError(
                f"state vector has length {v.shape[0]}, expected {self.d1 * self.d2}"
            )
        if abs(np.linalg.norm(v) - 1.0) > self.tol.zero_tol:
            raise ValidationError(f"state vector has norm {np.linalg.norm(v)!r}, expected 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    def density(self) -> BipartiteDensity:
        return BipartiteDensity.from_pure(self)


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b`` in row-major tensor order."""
    a = _as_square(a, "first factor")
    b = _as_square(b, "second factor")
    return np.kron(a, b)


def lift(a, subsystem: int, d1: int, d2: int) -> np.ndarray:
    """Embed a one-sided operator: ``A1 -> A1 (x) I2`` or ``A2 -> I1 (x) A2``."""
    a = _as_square(a)
    if subsystem == 1:
        if a.shape[0] != d1:
            raise ValidationError(f"operator on subsystem 1 must be {d1}x{d1}")
        return np.kron(a, np.eye(d2))
    if subsystem == 2:
        if a.shape[0] != d2:
            raise ValidationError(f"operator on subsystem 2 must be {d2}x{d2}")
        return np.kron(np.eye(d1), a)
    raise ValidationError("subsystem must be 1 or 2")


def partial_trace(w, d1: int, d2: int, keep: int) -> np.ndarray:
    """Trace out the subsystem not listed in ``keep``.

    >>> partial_trace(np.eye(4) / 4, 2, 2, keep=1)
    array([[0.5+0.j, 0. +0.j],
           [0. +0.j, 0.5+0.j]])
    """
    w = _as_square(w)
    _check_dims(d1, d2)
    if w.shape[0] != d1 * d2:
        raise ValidationError(
            f"matrix of size {w.shape[0]} does not factor as {d1}x{d2}"
        )
    t = w.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.einsum("ajbj->ab", t)
    if keep == 2:
        return np.einsum("iaib->ab", t)
    raise ValidationError("keep must be 1 or 2")


def range_basis(w, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of the range and its complement for a PSD matrix.

    Returns ``(B, C)`` with ``B`` spanning the eigenvectors whose eigenvalue
    exceeds ``rank_tol * lambda_max`` and ``C`` spanning the rest. Columns of
    ``B`` are ordered by decreasing eigenvalue.
    """
    w = hermitian_part(_as_square(w))
    evals, evecs = np.linalg.eigh(w)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    lmax = evals[0] if evals.size else 0.0
    if lmax <= 0:
        return evecs[:, :0], evecs
    keep = evals > tol.rank_tol * lmax
    return evecs[:, keep], evecs[:, ~keep]


def range_projector(w, tol: ToleranceConfig = DEFAULT_TOL, subsystem=None) -> OrthogonalProjector:
    """Orthogonal projector onto the range of a positive semidefinite matrix.

    A (numerically) zero input yields the zero projector with rank 0.
    """
    w = _as_square(w)
    if opnorm(w - w.conj().T) > tol.zero_tol * max(1.0, opnorm(w)):
        raise ValidationError("range_projector requires a Hermitian matrix")
    evals = np.linalg.eigvalsh(hermitian_part(w))
    if evals.size and evals.min() < -tol.zero_tol * max(1.0, abs(evals).max()):
        raise ValidationError("range_projector requires a positive semidefinite matrix")
    if opnorm(w) <= tol.zero_tol:
        return OrthogonalProjector(subsystem, np.zeros_like(w), 0, tol)
    b, _ = range_basis(w, tol)
    return OrthogonalProjector(subsystem, b @ b.conj().T, b.shape[1], tol)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt scalar product ``Tr(a^dagger b)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


@dataclass(frozen=True)
class OrthogonalityCertificate:
    """Outcome of the three equivalent orthogonality tests for two states.

    ``product_norm`` is ``||rho' rho''|| / (||rho'|| ||rho''||)``;
    ``projector_norm`` is ``||Q' Q''||``; ``min_angle`` is the smallest
    principal angle between the two ranges (pi/2 when orthogonal).
    """

    product_test: bool
    projector_test: bool
    range_test: bool
    product_norm: float
    projector_norm: float
    min_angle: float

    @property
    def orthogonal(self) -> bool:
        return self.product_test


def states_orthogonal(rho_a, rho_b, tol: ToleranceConfig = DEFAULT_TOL):
    """Decide whether two positive operators are orthogonal.

    Computes ``rho' rho'' = 0``, ``Q' Q'' = 0`` and orthogonality of the
    ranges independently. They are mathematically equivalent, so any
    disagreement raises :class:`InternalConsistencyError`.

    Returns
    -------
    (bool, OrthogonalityCertificate)
    """
    rho_a = _as_square(rho_a)
    rho_b = _as_square(rho_b)
    if rho_a.shape != rho_b.shape:
        raise ValidationError("states act on different spaces")
    na, nb = opnorm(rho_a), opnorm(rho_b)
    if na == 0 or nb == 0:
        # the zero operator is orthogonal to everything
        cert = OrthogonalityCertificate(True, True, True, 0.0, 0.0, np.pi / 2)
        return True, cert
    prod = opnorm(rho_a @ rho_b) / (na * nb)
    qa = range_projector(rho_a, tol).matrix
    qb = range_projector(rho_b, tol).matrix
    qprod = opnorm(qa @ qb)
    ba, _ = range_basis(rho_a, tol)
    bb, _ = range_basis(rho_b, tol)
    angle = float(np.min(subspace_angles(ba, bb)))
    tests = (
        prod <= tol.zero_tol,
        qprod <= tol.zero_tol,
        np.pi / 2 - angle <= tol.zero_tol,
    )
    if len(set(tests)) != 1:
        raise InternalConsistencyError(
            "orthogonality tests disagree (product %.3e, projector %.3e, angle deficit %.3e); "
            "check tolerance configuration" % (prod, qprod, np.pi / 2 - angle)
        )
    cert = OrthogonalityCertificate(*tests, prod, qprod, angle)
    return tests[0], cert
