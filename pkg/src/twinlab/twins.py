"""Twin observables and twin projectors of a bipartite density.

Opposite-subsystem Hermitian operators ``A1``, ``A2`` are twins for
``rho`` when ``(A1 (x) I) rho == (I (x) A2) rho``. This module solves that
equation, splits solutions into spectral projector pairs, classifies them
as strong (commuting with ``rho``) or weak, and builds the decompositions
each kind induces.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import subspace_angles

from .basis import from_hermitian_coords, hermitian_basis
from .core import (
    DEFAULT_TOL,
    BipartiteDensity,
    HermitianObservable,
    OrthogonalProjector,
    ToleranceConfig,
    hs_inner,
    hs_norm,
    lift,
    opnorm,
    range_basis,
    range_projector,
    states_orthogonal,
)
from .errors import (
    DegenerateSplitError,
    InternalConsistencyError,
    TwinRejection,
    ValidationError,
)
from .schmidt import OperatorSchmidt, degenerate_blocks, operator_schmidt_complex

__all__ = [
    "Strength",
    "ObservableStrength",
    "TwinPair",
    "TwinProjectorPair",
    "TwinSpace",
    "TwinSpectralData",
    "BiorthogonalDecomposition",
    "WeakSplit",
    "CommutationReport",
    "BiorthogonalityError",
    "twin_residual",
    "twin_check",
    "is_twin",
    "verify_reduced_commutation",
    "twin_solve",
    "twin_space_from_basis",
    "detectable_part",
    "twin_spectral_projectors",
    "classify_projector",
    "classify_observable",
    "decompose_by_projector",
    "biorthogonal_from_mixture",
    "strong_mixture",
    "weak_split_expansion",
    "hs_orthogonality_equiv",
    "principal_angles",
]


class Strength(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


class ObservableStrength(enum.Enum):
    STRONG = "strong"
    PARTIALLY_STRONG = "partially strong"
    WEAK = "weak"


class BiorthogonalityError(ValidationError):
    """The reduced states of two mixture components overlap on ``subsystem``."""

    def __init__(self, message, subsystem):
        super().__init__(message)
        self.subsystem = subsystem


@dataclass(frozen=True)
class TwinPair:
    A1: HermitianObservable
    A2: HermitianObservable
    residual: float


@dataclass(frozen=True)
class TwinProjectorPair:
    """Twin projectors with their strong/weak classification.

    ``commutator_norm`` is ``||[P1 (x) I, rho]||``; ``detectable_ranks`` are
    the ranks of the projectors compressed to the reduced-state ranges.
    """

    P1: OrthogonalProjector
    P2: OrthogonalProjector
    strength: Strength
    commutator_norm: float
    residual: float = 0.0
    detectable_ranks: tuple = (-1, -1)

    @property
    def is_strong(self) -> bool:
        return self.strength is Strength.STRONG


@dataclass(frozen=True)
class CommutationReport:
    norm1: float
    norm2: float


def _matrix(a):
    if isinstance(a, (HermitianObservable, OrthogonalProjector)):
        return a.matrix
    return np.asarray(a, dtype=complex)


def _pair_matrices(pair):
    if isinstance(pair, TwinPair):
        return pair.A1.matrix, pair.A2.matrix
    if isinstance(pair, TwinProjectorPair):
        return pair.P1.matrix, pair.P2.matrix
    a1, a2 = pair
    return _matrix(a1), _matrix(a2)


def _density(rho) -> BipartiteDensity:
    if not isinstance(rho, BipartiteDensity):
        raise ValidationError("expected a BipartiteDensity")
    return rho


def _act1(a, rho: BipartiteDensity) -> np.ndarray:
    """``(a (x) I) rho`` without forming the Kronecker product."""
    d1, d2 = rho.d1, rho.d2
    t = rho.matrix.reshape(d1, d2, d1 * d2)
    return np.einsum("ab,bjx->ajx", a, t).reshape(d1 * d2, d1 * d2)


def _act2(a, rho: BipartiteDensity) -> np.ndarray:
    d1, d2 = rho.d1, rho.d2
    t = rho.matrix.reshape(d1, d2, d1 * d2)
    return np.einsum("ab,ibx->iax", a, t).reshape(d1 * d2, d1 * d2)


def _commutator1(a, rho):
    left = _act1(a, rho)
    return opnorm(left - left.conj().T)


def twin_residual(a1, a2, rho: BipartiteDensity) -> float:
    """``||(A1 (x) I) rho - (I (x) A2) rho||`` in operator norm."""
    rho = _density(rho)
    a1, a2 = _matrix(a1), _matrix(a2)
    if a1.shape != (rho.d1, rho.d1) or a2.shape != (rho.d2, rho.d2):
        raise ValidationError(
            f"operator shapes {a1.shape}, {a2.shape} do not match dims ({rho.d1}, {rho.d2})"
        )
    return opnorm(_act1(a1, rho) - _act2(a2, rho))


def _twin_limit(a1, a2, tol):
    return tol.zero_tol * max(1.0, opnorm(a1), opnorm(a2))


def twin_check(a1, a2, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> TwinPair:
    """Return the pair as a :class:`TwinPair` or raise :class:`TwinRejection`.

    The residual threshold is ``zero_tol`` scaled by ``max(1, ||A1||, ||A2||)``.
    """
    obs1 = a1 if isinstance(a1, HermitianObservable) else HermitianObservable(1, _matrix(a1), tol)
    obs2 = a2 if isinstance(a2, HermitianObservable) else HermitianObservable(2, _matrix(a2), tol)
    res = twin_residual(obs1.matrix, obs2.matrix, rho)
    if res > _twin_limit(obs1.matrix, obs2.matrix, tol):
        raise TwinRejection(f"not a twin pair: residual {res:.3e}", res)
    return TwinPair(obs1, obs2, res)


def is_twin(a1, a2, rho, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    try:
        twin_check(a1, a2, rho, tol)
    except TwinRejection:
        return False
    return True


def verify_reduced_commutation(pair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> CommutationReport:
    """Check ``[A1, rho1] = 0`` and ``[A2, rho2] = 0`` for an accepted twin pair."""
    a1, a2 = _pair_matrices(pair)
    r1, r2 = rho.reduced(1), rho.reduced(2)
    n1 = opnorm(a1 @ r1 - r1 @ a1)
    n2 = opnorm(a2 @ r2 - r2 @ a2)
    limit = 10 * _twin_limit(a1, a2, tol)
    if max(n1, n2) > limit:
        raise InternalConsistencyError(
            f"twin pair does not commute with reduced states ({n1:.3e}, {n2:.3e})"
        )
    return CommutationReport(n1, n2)


# --------------------------------------------------------------------------
# solution space of the twin equation


@dataclass(frozen=True)
class TwinSpace:
    """Orthonormal basis of all twin pairs of a state.

    Each column of ``basis`` holds the real Gell-Mann coordinates of
    ``(A1, A2)`` stacked; the Euclidean product of columns equals the
    Hilbert-Schmidt product ``Tr A1 B1 + Tr A2 B2``. ``trivial[k]`` marks
    pairs whose detectable parts are multiples of the identity.
    """

    d1: int
    d2: int
    basis: np.ndarray = field(repr=False)
    pairs: tuple = field(repr=False)
    trivial: tuple = ()

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def nontrivial_pairs(self) -> list[TwinPair]:
        return [p for p, t in zip(self.pairs, self.trivial) if not t]

    @property
    def trivial_pairs(self) -> list[TwinPair]:
        return [p for p, t in zip(self.pairs, self.trivial) if t]

    @property
    def has_nontrivial(self) -> bool:
        return not all(self.trivial)

    def operator_vectors(self) -> np.ndarray:
        """Basis as complex vectors ``(vec A1, vec A2)``, one per column."""
        cols = [np.concatenate([p.A1.matrix.reshape(-1), p.A2.matrix.reshape(-1)]) for p in self.pairs]
        return np.array(cols).T.reshape(self.d1**2 + self.d2**2, -1)


def principal_angles(a, b) -> np.ndarray:
    """Principal angles between two twin spaces (or raw column bases)."""
    a = a.basis if isinstance(a, TwinSpace) else np.asarray(a)
    b = b.basis if isinstance(b, TwinSpace) else np.asarray(b)
    if a.shape[1] == 0 and b.shape[1] == 0:
        return np.zeros(0)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.full(max(a.shape[1], b.shape[1]), np.pi / 2)
    return subspace_angles(a, b)


def _pair_from_coords(x, d1, d2):
    return from_hermitian_coords(x[: d1 * d1], d1), from_hermitian_coords(x[d1 * d1 :], d2)


def _twin_system(rho: BipartiteDensity) -> np.ndarray:
    """Real matrix of the map ``(a, b) -> (A1 (x) I) rho - (I (x) A2) rho``."""
    d1, d2 = rho.d1, rho.d2
    g1, g2 = hermitian_basis(d1), hermitian_basis(d2)
    t = rho.matrix.reshape(d1, d2, d1 * d2)
    left = np.einsum("kab,bjx->kajx", g1, t).reshape(len(g1), -1)
    right = np.einsum("kab,ibx->kiax", g2, t).reshape(len(g2), -1)
    cols = np.concatenate([left, -right]).T
    return np.concatenate([cols.real, cols.imag])


def _null_columns(m, cutoff_rel=None, cutoff_abs=None):
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    thr = cutoff_abs if cutoff_abs is not None else cutoff_rel * smax
    rank = int(np.sum(s > thr))
    return vt[rank:].T, vt[:rank].T


def _sign_fix(cols, rel=1e-8):
    cols = cols.copy()
    for k in range(cols.shape[1]):
        c = cols[:, k]
        idx = int(np.argmax(np.abs(c) > rel * np.abs(c).max()))
        if c[idx] < 0:
            cols[:, k] = -c
    return cols


def _detectable_defect(x, d1, d2, b1, b2):
    """Traceless parts of both detectable parts, as one real vector."""
    out = []
    for a, b in zip(_pair_from_coords(x, d1, d2), (b1, b2)):
        c = b.conj().T @ a @ b
        if c.size:
            c = c - np.trace(c) / c.shape[0] * np.eye(c.shape[0])
        out.extend([c.real.reshape(-1), c.imag.reshape(-1)])
    return np.concatenate(out)


def twin_space_from_basis(null, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> TwinSpace:
    """Split an orthonormal basis of twin coordinates into trivial and nontrivial parts."""
    d1, d2 = rho.d1, rho.d2
    b1, _ = range_basis(rho.reduced(1), tol)
    b2, _ = range_basis(rho.reduced(2), tol)
    if null.shape[1] == 0:
        return TwinSpace(d1, d2, null, (), ())
    k = np.array([_detectable_defect(null[:, j], d1, d2, b1, b2) for j in range(null.shape[1])]).T
    triv_coords, nontriv_coords = _null_columns(k, cutoff_abs=tol.zero_tol)
    trivial = _sign_fix(null @ triv_coords)
    nontrivial = _sign_fix(null @ nontriv_coords)
    basis = np.concatenate([trivial, nontrivial], axis=1)
    pairs = []
    for j in range(basis.shape[1]):
        a1, a2 = _pair_from_coords(basis[:, j], d1, d2)
        pairs.append(
            TwinPair(HermitianObservable(1, a1, tol), HermitianObservable(2, a2, tol),
                     twin_residual(a1, a2, rho))
        )
    flags = (True,) * trivial.shape[1] + (False,) * nontrivial.shape[1]
    return TwinSpace(d1, d2, basis, tuple(pairs), flags)


def twin_solve(rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> TwinSpace:
    """All twin pairs of ``rho`` as an orthonormal basis of the solution space.

    The twin equation is real-linear in the ``d1**2 + d2**2`` real
    coordinates of ``(A1, A2)``; its null space is read off an SVD with
    relative cutoff ``rank_tol``. Trivial directions (scalar detectable
    parts) come first, followed by the nontrivial sector.
    """
    rho = _density(rho)
    null, _ = _null_columns(_twin_system(rho), cutoff_rel=tol.rank_tol)
    return twin_space_from_basis(null, rho, tol)


# --------------------------------------------------------------------------
# detectable parts and spectral projectors


def detectable_part(a, rho_i, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Compression of ``a`` to the range of the reduced state ``rho_i``.

    Expressed in the orthonormal range basis returned by
    :func:`twinlab.core.range_basis`.
    """
    a = _matrix(a)
    rho_i = np.asarray(rho_i, dtype=complex)
    comm = opnorm(a @ rho_i - rho_i @ a)
    if comm > 10 * tol.zero_tol * max(1.0, opnorm(a)):
        raise ValidationError(
            f"operator does not commute with the reduced state ({comm:.3e}); not a twin component"
        )
    b, _ = range_basis(rho_i, tol)
    c = b.conj().T @ a @ b
    return 0.5 * (c + c.conj().T)


@dataclass(frozen=True)
class TwinSpectralData:
    """Common detectable spectrum of a twin pair and its projector pairs.

    ``multiplicities[n]`` is ``(m1, m2)``, the multiplicity of ``eigenvalues[n]``
    in each detectable part. Projectors are full-space: each includes the
    eigenvectors of the undetectable block that share the eigenvalue.
    """

    eigenvalues: np.ndarray
    projector_pairs: tuple
    multiplicities: tuple


def _cluster(values, tol):
    order = np.argsort(values)
    groups, current = [], [order[0]]
    for prev, nxt in zip(order[:-1], order[1:]):
        if values[nxt] - values[prev] <= tol:
            current.append(nxt)
        else:
            groups.append(current)
            current = [nxt]
    groups.append(current)
    return groups


def _make_projector_pair(p1, p2, rho, tol, residual=None, detectable_ranks=(-1, -1)):
    p1 = p1 if isinstance(p1, OrthogonalProjector) else OrthogonalProjector(1, p1, tol=tol)
    p2 = p2 if isinstance(p2, OrthogonalProjector) else OrthogonalProjector(2, p2, tol=tol)
    c1 = _commutator1(p1.matrix, rho)
    left2 = _act2(p2.matrix, rho)
    c2 = opnorm(left2 - left2.conj().T)
    strong = c1 <= tol.zero_tol
    if (c2 <= tol.zero_tol) != strong:
        raise InternalConsistencyError(
            f"strength differs between the two projectors ({c1:.3e} vs {c2:.3e})"
        )
    if residual is None:
        residual = twin_residual(p1.matrix, p2.matrix, rho)
    return TwinProjectorPair(
        p1, p2, Strength.STRONG if strong else Strength.WEAK, c1, residual, detectable_ranks
    )


def twin_spectral_projectors(pair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> TwinSpectralData:
    """Characteristic projector pairs of a twin pair, one per common eigenvalue."""
    rho = _density(rho)
    mats = _pair_matrices(pair)
    sides = []
    for i, a in enumerate(mats, start=1):
        ri = rho.reduced(i)
        b, c = range_basis(ri, tol)
        dvals, dvecs = np.linalg.eigh(detectable_part(a, ri, tol))
        comp = c.conj().T @ a @ c
        cvals, cvecs = np.linalg.eigh(0.5 * (comp + comp.conj().T))
        sides.append((b, c, dvals, dvecs, cvals, cvecs))
    values = np.concatenate([sides[0][2], sides[1][2]])
    owner = np.array([0] * len(sides[0][2]) + [1] * len(sides[1][2]))
    offset = len(sides[0][2])
    groups = _cluster(values, tol.degeneracy_tol)
    eigenvalues, pairs, mults = [], [], []
    for g in sorted(groups, key=lambda g: -values[g].mean()):
        if set(owner[g]) != {0, 1}:
            raise InternalConsistencyError(
                f"detectable spectra differ: value {values[g].mean():.6g} appears on one side only"
            )
        projs, ranks = [], []
        for side in (0, 1):
            b, c, dvals, dvecs, cvals, cvecs = sides[side]
            idx = [j - side * offset for j in g if owner[j] == side]
            vd = b @ dvecs[:, idx]
            p = vd @ vd.conj().T
            near = [j for j, v in enumerate(cvals) if np.min(np.abs(values[g] - v)) <= tol.degeneracy_tol]
            if near:
                vc = c @ cvecs[:, near]
                p = p + vc @ vc.conj().T
            projs.append(p)
            ranks.append(len(idx))
        tp = _make_projector_pair(projs[0], projs[1], rho, tol, detectable_ranks=tuple(ranks))
        if tp.residual > tol.zero_tol:
            raise InternalConsistencyError(
                f"characteristic projectors are not twins (residual {tp.residual:.3e})"
            )
        eigenvalues.append(float(values[g].mean()))
        pairs.append(tp)
        mults.append(tuple(ranks))
    return TwinSpectralData(np.array(eigenvalues), tuple(pairs), tuple(mults))


# --------------------------------------------------------------------------
# classification


def _partner(p1: OrthogonalProjector, rho: BipartiteDensity, tol) -> np.ndarray:
    """Least-squares Hermitian ``P2`` with ``(I (x) P2) rho = (P1 (x) I) rho``.

    Minimum-norm, so the block outside the range of ``rho2`` is zero.
    """
    d2 = rho.d2
    g2 = hermitian_basis(d2)
    t = rho.matrix.reshape(rho.d1, d2, -1)
    cols = np.einsum("kab,ibx->kiax", g2, t).reshape(len(g2), -1).T
    target = _act1(p1.matrix, rho).reshape(-1)
    a = np.concatenate([cols.real, cols.imag])
    y = np.concatenate([target.real, target.imag])
    x, *_ = np.linalg.lstsq(a, y, rcond=None)
    return from_hermitian_coords(x, d2)


def classify_projector(p1, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL, partner=None) -> TwinProjectorPair:
    """Pair ``P1`` with its twin partner and classify it strong or weak.

    Without ``partner`` the partner projector is recovered by least squares
    and checked for idempotency. Raises :class:`TwinRejection` when no twin
    partner exists.
    """
    rho = _density(rho)
    p1 = p1 if isinstance(p1, OrthogonalProjector) else OrthogonalProjector(1, _matrix(p1), tol=tol)
    if partner is None:
        p2 = _partner(p1, rho, tol)
        res = twin_residual(p1.matrix, p2, rho)
        if res > tol.zero_tol:
            raise TwinRejection(f"projector has no twin partner (residual {res:.3e})", res)
        p2 = 0.5 * (p2 + p2.conj().T)
        idem = opnorm(p2 @ p2 - p2)
        if idem > 10 * tol.zero_tol:
            raise TwinRejection(f"twin partner is not a projector (idempotency defect {idem:.3e})", res)
        evals, evecs = np.linalg.eigh(p2)
        v = evecs[:, evals > 0.5]
        p2 = v @ v.conj().T
    else:
        p2 = _matrix(partner)
    p2 = OrthogonalProjector(2, p2, tol=tol)
    res = twin_residual(p1.matrix, p2.matrix, rho)
    if res > tol.zero_tol:
        raise TwinRejection(f"not a twin projector pair (residual {res:.3e})", res)
    b1, _ = range_basis(rho.reduced(1), tol)
    b2, _ = range_basis(rho.reduced(2), tol)
    ranks = (
        int(round(np.trace(b1.conj().T @ p1.matrix @ b1).real)),
        int(round(np.trace(b2.conj().T @ p2.matrix @ b2).real)),
    )
    tp = _make_projector_pair(p1, p2, rho, tol, res, ranks)
    # the two terms of rho = P1 rho + P1' rho are Hermitian exactly for strong P1
    left = _act1(p1.matrix, rho)
    herm = opnorm(left - left.conj().T) <= tol.zero_tol
    if herm != tp.is_strong:
        raise InternalConsistencyError("Hermiticity of P1 rho disagrees with the strength test")
    return tp


def classify_observable(pair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> ObservableStrength:
    """Strong, partially strong or weak, from the characteristic projector pairs.

    Cross-checked against commutation of the operators themselves with rho.
    """
    rho = _density(rho)
    data = twin_spectral_projectors(pair, rho, tol)
    strong = [tp.is_strong for tp in data.projector_pairs]
    a1, a2 = _pair_matrices(pair)
    spread = float(np.ptp(data.eigenvalues)) if len(data.eigenvalues) > 1 else 0.0
    left2 = _act2(a2, rho)
    comm = max(_commutator1(a1, rho), opnorm(left2 - left2.conj().T))
    commutes = comm <= tol.zero_tol * spread if spread > 0 else True
    if commutes != all(strong):
        raise InternalConsistencyError(
            f"operator commutator {comm:.3e} disagrees with per-projector strengths {strong}"
        )
    if all(strong):
        return ObservableStrength.STRONG
    if not any(strong):
        return ObservableStrength.WEAK
    return ObservableStrength.PARTIALLY_STRONG


# --------------------------------------------------------------------------
# decompositions


@dataclass(frozen=True)
class BiorthogonalDecomposition:
    """``rho = sum_n weights[n] * terms[n]`` with pairwise orthogonal reductions.

    ``certificates[(m, n)]`` holds the orthogonality certificates of the
    subsystem-1 and subsystem-2 reductions of terms m and n.
    ``product_terms[n]`` is True when term n was verified to be a product
    ``|psi><psi| (x) rho2``.
    """

    weights: np.ndarray
    terms: tuple = field(repr=False)
    certificates: dict = field(repr=False, default_factory=dict)
    projector_pairs: tuple = field(repr=False, default=())
    product_terms: tuple = ()

    @property
    def biorthogonal(self) -> bool:
        return all(c1.orthogonal and c2.orthogonal for c1, c2 in self.certificates.values())

    def reconstruct(self) -> np.ndarray:
        return sum(w * t.matrix for w, t in zip(self.weights, self.terms))


def _certify(terms, tol):
    certs = {}
    for m, n in combinations(range(len(terms)), 2):
        pair = []
        for i in (1, 2):
            _, cert = states_orthogonal(terms[m].reduced(i), terms[n].reduced(i), tol)
            pair.append(cert)
        certs[(m, n)] = tuple(pair)
    return certs


def _check_reconstruction(dec, rho, tol):
    err = opnorm(dec.reconstruct() - rho.matrix)
    if err > 10 * tol.zero_tol:
        raise InternalConsistencyError(f"decomposition does not reassemble the state ({err:.3e})")


def decompose_by_projector(tp: TwinProjectorPair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL):
    """Split ``rho = P1 rho + P1' rho`` along a twin projector.

    A strong projector yields a :class:`BiorthogonalDecomposition` (a
    mixture of two states); a weak one a :class:`WeakSplit`.
    """
    rho = _density(rho)
    if not tp.is_strong:
        return weak_split_expansion(tp, rho, tol)
    p = lift(tp.P1.matrix, 1, rho.d1, rho.d2)
    q = np.eye(rho.dim) - p
    w = float(np.trace(p @ rho.matrix).real)
    if w <= tol.zero_tol or w >= 1 - tol.zero_tol:
        raise DegenerateSplitError(f"projector carries weight {w!r}; the split is trivial")
    t1 = BipartiteDensity.from_matrix(p @ rho.matrix @ p / w, rho.d1, rho.d2, tol)
    t2 = BipartiteDensity.from_matrix(q @ rho.matrix @ q / (1 - w), rho.d1, rho.d2, tol)
    terms = (t1, t2)
    dec = BiorthogonalDecomposition(
        np.array([w, 1 - w]), terms, _certify(terms, tol), (tp,), (False, False)
    )
    _check_reconstruction(dec, rho, tol)
    return dec


def biorthogonal_from_mixture(rho_a, rho_b, w, tol: ToleranceConfig = DEFAULT_TOL) -> TwinProjectorPair:
    """Strong twin projectors induced by a biorthogonal mixture.

    For ``rho = w rho_a + (1 - w) rho_b`` with orthogonal reductions on both
    sides, the range projectors of ``rho_a``'s reductions are strong twins.
    """
    rho_a, rho_b = _density(rho_a), _density(rho_b)
    if (rho_a.d1, rho_a.d2) != (rho_b.d1, rho_b.d2):
        raise ValidationError("mixture components have different dimensions")
    if not 0 < w < 1:
        raise ValidationError(f"mixing weight must lie in (0, 1), got {w!r}")
    for i in (1, 2):
        ok, cert = states_orthogonal(rho_a.reduced(i), rho_b.reduced(i), tol)
        if not ok:
            raise BiorthogonalityError(
                f"reduced states on subsystem {i} are not orthogonal "
                f"(relative product norm {cert.product_norm:.3e})", i,
            )
    mix = BipartiteDensity(rho_a.d1, rho_a.d2, w * rho_a.matrix + (1 - w) * rho_b.matrix)
    p1 = range_projector(rho_a.reduced(1), tol, subsystem=1)
    p2 = range_projector(rho_a.reduced(2), tol, subsystem=2)
    res = twin_residual(p1.matrix, p2.matrix, mix)
    if res > tol.zero_tol:
        raise InternalConsistencyError(f"range projectors are not twins (residual {res:.3e})")
    tp = _make_projector_pair(p1, p2, mix, tol, res, (p1.rank, p2.rank))
    if not tp.is_strong:
        raise InternalConsistencyError("twins induced by a biorthogonal mixture are not strong")
    return tp


def strong_mixture(pair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> BiorthogonalDecomposition:
    """Biorthogonal mixture with one term per detectable eigenvalue of a strong twin."""
    rho = _density(rho)
    if classify_observable(pair, rho, tol) is not ObservableStrength.STRONG:
        raise ValidationError("strong_mixture requires a strong twin observable")
    data = twin_spectral_projectors(pair, rho, tol)
    b1, _ = range_basis(rho.reduced(1), tol)
    q1 = b1 @ b1.conj().T
    weights, terms, kept, products = [], [], [], []
    for a_n, tp in zip(data.eigenvalues, data.projector_pairs):
        p = lift(tp.P1.matrix, 1, rho.d1, rho.d2)
        w = float(np.trace(p @ rho.matrix).real)
        if w <= tol.zero_tol:
            warnings.warn(f"eigenvalue {a_n:.6g} carries no weight; term dropped", stacklevel=2)
            continue
        term = BipartiteDensity.from_matrix(p @ rho.matrix @ p / w, rho.d1, rho.d2, tol)
        for i, proj in ((1, tp.P1.matrix), (2, tp.P2.matrix)):
            red = term.reduced(i)
            defect = opnorm(proj @ red - red)
            if defect > 10 * tol.zero_tol:
                raise InternalConsistencyError(
                    f"term reduction escapes its characteristic projector ({defect:.3e})"
                )
        product = False
        if tp.detectable_ranks[0] == 1:
            psi = q1 @ tp.P1.matrix @ q1
            defect = opnorm(term.matrix - np.kron(psi, term.reduced(2)))
            if defect > 10 * tol.zero_tol:
                raise InternalConsistencyError(
                    f"rank-one characteristic projector gave a non-product term ({defect:.3e})"
                )
            product = True
        weights.append(w)
        terms.append(term)
        kept.append(tp)
        products.append(product)
    terms = tuple(terms)
    dec = BiorthogonalDecomposition(
        np.array(weights), terms, _certify(terms, tol), tuple(kept), tuple(products)
    )
    _check_reconstruction(dec, rho, tol)
    if not dec.biorthogonal:
        raise InternalConsistencyError("strong twin produced a non-biorthogonal mixture")
    return dec


@dataclass(frozen=True)
class WeakSplit:
    """``rho = P1 rho + P1' rho`` for a weak twin projector, with expansions.

    ``combined`` concatenates both parts' expansions into one expansion of
    rho. ``purity_sum`` is ``Tr(rho P1 rho) + Tr(rho P1' rho)``.
    """

    part_in: np.ndarray = field(repr=False)
    part_out: np.ndarray = field(repr=False)
    expansions: tuple = field(repr=False)
    combined: OperatorSchmidt = field(repr=False)
    cross_orthogonality: bool = True
    max_cross: float = 0.0
    invariance_defect: float = 0.0
    purity_sum: float = 0.0


def _concatenate(exp_a: OperatorSchmidt, exp_b: OperatorSchmidt, total_norm, tol) -> OperatorSchmidt:
    s = np.concatenate([exp_a.weights, exp_b.weights])
    f1 = np.concatenate([exp_a.factors1, exp_b.factors1])
    f2 = np.concatenate([exp_a.factors2, exp_b.factors2])
    order = np.argsort(-s, kind="stable")
    coeffs = s[order] / total_norm
    return OperatorSchmidt(
        exp_a.d1, exp_a.d2, total_norm, coeffs, f1[order], f2[order], False,
        degenerate_blocks(coeffs, tol.degeneracy_tol),
    )


def weak_split_expansion(tp: TwinProjectorPair, rho: BipartiteDensity, tol: ToleranceConfig = DEFAULT_TOL) -> WeakSplit:
    """Continue a weak-twin split into a nonhermitian operator Schmidt expansion."""
    rho = _density(rho)
    if tp.is_strong:
        raise ValidationError("projector is strong; use decompose_by_projector")
    d1, d2 = rho.d1, rho.d2
    part_in = _act1(tp.P1.matrix, rho)
    part_out = rho.matrix - part_in
    exp_in = operator_schmidt_complex(part_in, d1, d2, tol)
    exp_out = operator_schmidt_complex(part_out, d1, d2, tol)
    p1, p2 = tp.P1.matrix, tp.P2.matrix
    q1, q2 = np.eye(d1) - p1, np.eye(d2) - p2
    inv = 0.0
    for exp, (proj1, proj2) in ((exp_in, (p1, p2)), (exp_out, (q1, q2))):
        for f in exp.factors1:
            inv = max(inv, opnorm(proj1 @ f - f))
        for f in exp.factors2:
            inv = max(inv, opnorm(proj2 @ f - f))
    cross = 0.0
    for fa, fb in ((exp_in.factors1, exp_out.factors1), (exp_in.factors2, exp_out.factors2)):
        if len(fa) and len(fb):
            cross = max(cross, float(np.abs(fa.reshape(len(fa), -1).conj() @ fb.reshape(len(fb), -1).T).max()))
    purity = float(
        np.trace(rho.matrix @ part_in).real + np.trace(rho.matrix @ part_out).real
    )
    combined = _concatenate(exp_in, exp_out, hs_norm(rho.matrix), tol)
    limit = 10 * tol.zero_tol
    recon = opnorm(combined.reconstruct() - rho.matrix)
    gram = max(
        opnorm(combined.gram(1) - np.eye(len(combined))),
        opnorm(combined.gram(2) - np.eye(len(combined))),
    )
    if inv > limit or cross > limit or recon > limit or gram > limit or purity > 1 + tol.zero_tol:
        raise InternalConsistencyError(
            f"weak split expansion inconsistent: invariance {inv:.3e}, cross {cross:.3e}, "
            f"reconstruction {recon:.3e}, orthonormality {gram:.3e}, purity {purity:.6g}"
        )
    return WeakSplit(part_in, part_out, (exp_in, exp_out), combined, True, cross, inv, purity)


def hs_orthogonality_equiv(rho_a, rho_b, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, bool]:
    """Orthogonality of two states, as states and as HS supervectors.

    The HS test is ``|Tr(rho_a rho_b)| <= zero_tol * ||rho_a|| ||rho_b||``.
    The two answers must agree; a mismatch raises.
    """
    rho_a, rho_b = np.asarray(rho_a, complex), np.asarray(rho_b, complex)
    ortho, _ = states_orthogonal(rho_a, rho_b, tol)
    hs = abs(hs_inner(rho_a, rho_b)) <= tol.zero_tol * opnorm(rho_a) * opnorm(rho_b)
    if ortho != hs:
        raise InternalConsistencyError(
            f"state orthogonality ({ortho}) disagrees with HS orthogonality ({hs})"
        )
    return ortho, hs
