"""Schmidt canonical expansions of state vectors and of operators.

Operators on H1 (x) H2 are treated as Hilbert-Schmidt supervectors, so an
operator ``W`` expands as ``c * sum_k s_k F1_k (x) F2_k`` with HS-orthonormal
factor families and ``sum_k s_k**2 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import hermitian_basis
from .core import (
    DEFAULT_TOL,
    BipartiteDensity,
    PureBipartiteState,
    ToleranceConfig,
    hs_norm,
    opnorm,
)
from .errors import ValidationError

__all__ = [
    "StateSchmidt",
    "AntilinearMap",
    "OperatorSchmidt",
    "AdjointInvarianceReport",
    "schmidt_state",
    "correlation_map",
    "compose_state",
    "operator_schmidt_hermitian",
    "operator_schmidt_complex",
    "pure_nonhermitian_expansion",
    "adjoint_invariance_check",
    "reshuffle",
    "degenerate_blocks",
]


def degenerate_blocks(values, tol: float) -> tuple[tuple[int, ...], ...]:
    """Single-linkage clusters of a descending sequence; consecutive gaps > tol split."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return ()
    blocks, current = [], [0]
    for i in range(1, values.size):
        if abs(values[i - 1] - values[i]) <= tol:
            current.append(i)
        else:
            blocks.append(tuple(current))
            current = [i]
    blocks.append(tuple(current))
    return tuple(blocks)


def _canonical_order(values, keys, tol):
    """Descending by value; within a degenerate block, lexicographic by key."""
    order = list(np.argsort(-np.asarray(values), kind="stable"))
    sorted_vals = np.asarray(values)[order]
    out = []
    for block in degenerate_blocks(sorted_vals, tol):
        members = [order[i] for i in block]
        members.sort(key=lambda m: tuple(np.round(keys[m], 8)))
        out.extend(members)
    return out


def _lead_phase(vec, rel=1e-8):
    """Unit phase of the first entry that is not negligible relative to the max."""
    mags = np.abs(vec)
    idx = int(np.argmax(mags > rel * mags.max()))
    return vec[idx] / mags[idx]


def _unpack(w, d1, d2):
    if isinstance(w, BipartiteDensity):
        return w.matrix, w.d1, w.d2
    w = np.asarray(w, dtype=complex)
    if d1 is None or d2 is None:
        raise ValidationError("subsystem dimensions d1, d2 are required for raw matrices")
    if w.shape != (d1 * d2, d1 * d2):
        raise ValidationError(f"matrix shape {w.shape} does not match d1*d2 = {d1 * d2}")
    return w, d1, d2


def reshuffle(w, d1, d2) -> np.ndarray:
    """Realignment ``R[(i1,j1),(i2,j2)] = W[(i1,i2),(j1,j2)]``, shape (d1**2, d2**2)."""
    return np.asarray(w).reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)


# --------------------------------------------------------------------------
# pure states


@dataclass(frozen=True)
class StateSchmidt:
    """``|phi> = sum_i sqrt(r_i) |i>_1 (x) |i>_2``; columns of basis1/basis2 are the vectors."""

    d1: int
    d2: int
    coefficients: np.ndarray
    basis1: np.ndarray = field(repr=False)
    basis2: np.ndarray = field(repr=False)
    blocks: tuple = ()

    def __len__(self):
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return sum(
            np.sqrt(r) * np.kron(self.basis1[:, i], self.basis2[:, i])
            for i, r in enumerate(self.coefficients)
        )


def _state_vector(phi, d1=None, d2=None):
    if isinstance(phi, PureBipartiteState):
        return phi.vector, phi.d1, phi.d2
    v = np.asarray(phi, dtype=complex).reshape(-1)
    if d1 is None or d2 is None or v.size != d1 * d2:
        raise ValidationError("raw state vectors need matching d1, d2")
    return v, d1, d2


def schmidt_state(phi, tol: ToleranceConfig = DEFAULT_TOL, d1=None, d2=None) -> StateSchmidt:
    """Schmidt canonical expansion of a normalized bipartite vector.

    The coefficients ``r_i`` are the common positive spectrum of both
    reduced density operators, in descending order.
    """
    v, d1, d2 = _state_vector(phi, d1, d2)
    u, s, vh = np.linalg.svd(v.reshape(d1, d2), full_matrices=False)
    r = s**2
    keep = r > tol.rank_tol * r[0]
    u, r, b2 = u[:, keep], r[keep], vh[keep].T.copy()
    b1 = u.copy()
    for i in range(b1.shape[1]):
        ph = _lead_phase(b1[:, i])
        b1[:, i] *= ph.conjugate()
        b2[:, i] *= ph
    keys = [np.concatenate([b1[:, i].real, b1[:, i].imag]) for i in range(len(r))]
    order = _canonical_order(r, keys, tol.degeneracy_tol)
    r, b1, b2 = r[order], b1[:, order], b2[:, order]
    return StateSchmidt(d1, d2, r, b1, b2, degenerate_blocks(r, tol.degeneracy_tol))


@dataclass(frozen=True)
class AntilinearMap:
    """Antilinear map ``v -> matrix @ conj(v)`` from H1 to H2.

    ``degenerate`` marks input states with repeated Schmidt coefficients,
    where the Schmidt bases (but not this map) depend on a basis choice.
    """

    matrix: np.ndarray = field(repr=False)
    degenerate: bool = False

    def __call__(self, v):
        return self.matrix @ np.conj(np.asarray(v))


def correlation_map(phi, tol: ToleranceConfig = DEFAULT_TOL, d1=None, d2=None) -> AntilinearMap:
    """Correlation operator of a pure state, mapping ``|i>_1`` to ``|i>_2``."""
    sch = schmidt_state(phi, tol, d1, d2)
    m = sch.basis2 @ sch.basis1.T
    return AntilinearMap(m, degenerate=any(len(b) > 1 for b in sch.blocks))


def compose_state(rho1, amap: AntilinearMap, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Rebuild ``|phi>`` from its first reduced state and its correlation operator."""
    evals, evecs = np.linalg.eigh(np.asarray(rho1))
    keep = evals > tol.rank_tol * evals.max()
    return sum(
        np.sqrt(r) * np.kron(evecs[:, i], amap(evecs[:, i]))
        for i, r in zip(np.flatnonzero(keep), evals[keep])
    )


# --------------------------------------------------------------------------
# operators as supervectors


@dataclass(frozen=True)
class OperatorSchmidt:
    """``W = normalization * sum_k coefficients[k] * factors1[k] (x) factors2[k]``.

    ``blocks`` lists index groups of (numerically) equal coefficients; the
    factors inside a block are one arbitrary orthonormal choice.
    """

    d1: int
    d2: int
    normalization: float
    coefficients: np.ndarray
    factors1: np.ndarray = field(repr=False)
    factors2: np.ndarray = field(repr=False)
    hermitian_factors: bool
    blocks: tuple = ()

    def __len__(self):
        return len(self.coefficients)

    @property
    def weights(self) -> np.ndarray:
        """Unnormalized coefficients ``normalization * coefficients``."""
        return self.normalization * self.coefficients

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.d1 * self.d2,) * 2, dtype=complex)
        for s, f1, f2 in zip(self.weights, self.factors1, self.factors2):
            out += s * np.kron(f1, f2)
        return out

    def gram(self, which: int) -> np.ndarray:
        f = self.factors1 if which == 1 else self.factors2
        flat = f.reshape(len(f), -1)
        return flat.conj() @ flat.T


def _empty(d1, d2, hermitian):
    return OperatorSchmidt(
        d1, d2, 0.0, np.zeros(0),
        np.zeros((0, d1, d1), complex), np.zeros((0, d2, d2), complex), hermitian, (),
    )


def _finish(d1, d2, norm, s, f1, f2, keys, hermitian, tol):
    order = _canonical_order(s, keys, tol.degeneracy_tol)
    coeffs = np.asarray(s)[order] / norm
    return OperatorSchmidt(
        d1, d2, norm, coeffs, f1[order], f2[order], hermitian,
        degenerate_blocks(coeffs, tol.degeneracy_tol),
    )


def operator_schmidt_complex(w, d1=None, d2=None, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSchmidt:
    """Operator Schmidt expansion via the SVD of the realigned matrix.

    Works for any operator; factors are general (nonhermitian) matrices.
    """
    w, d1, d2 = _unpack(w, d1, d2)
    if opnorm(w) <= tol.zero_tol:
        return _empty(d1, d2, False)
    u, s, vh = np.linalg.svd(reshuffle(w, d1, d2), full_matrices=False)
    keep = s > tol.rank_tol * s[0]
    u, s, vh = u[:, keep], s[keep], vh[keep]
    f1 = u.T.reshape(-1, d1, d1).copy()
    f2 = vh.reshape(-1, d2, d2).copy()
    for k in range(len(s)):
        ph = _lead_phase(f1[k].reshape(-1))
        f1[k] *= ph.conjugate()
        f2[k] *= ph
    keys = [np.concatenate([f.reshape(-1).real, f.reshape(-1).imag]) for f in f1]
    return _finish(d1, d2, hs_norm(w), s, f1, f2, keys, False, tol)


def operator_schmidt_hermitian(w, d1=None, d2=None, tol: ToleranceConfig = DEFAULT_TOL) -> OperatorSchmidt:
    """Operator Schmidt expansion whose factors are all Hermitian.

    ``W`` is expanded in products of normalized Gell-Mann matrices. For
    Hermitian ``W`` the coefficient matrix is real, and its real SVD
    recombines the basis elements with real weights, which keeps every
    factor Hermitian.
    """
    w, d1, d2 = _unpack(w, d1, d2)
    if opnorm(w - w.conj().T) > tol.zero_tol * max(1.0, opnorm(w)):
        raise ValidationError(
            "operator is not Hermitian; use operator_schmidt_complex instead"
        )
    if opnorm(w) <= tol.zero_tol:
        return _empty(d1, d2, True)
    g1, g2 = hermitian_basis(d1), hermitian_basis(d2)
    t = np.einsum("aij,bkl,jlik->ab", g1, g2, w.reshape(d1, d2, d1, d2)).real
    u, s, vt = np.linalg.svd(t, full_matrices=False)
    keep = s > tol.rank_tol * s[0]
    u, s, vt = u[:, keep], s[keep], vt[keep]
    for k in range(len(s)):
        sign = np.sign(_lead_phase(u[:, k]).real)
        u[:, k] *= sign
        vt[k] *= sign
    f1 = np.tensordot(u.T, g1, axes=1)
    f2 = np.tensordot(vt, g2, axes=1)
    keys = [u[:, k] for k in range(len(s))]
    return _finish(d1, d2, hs_norm(w), s, f1, f2, keys, True, tol)


def pure_nonhermitian_expansion(phi, tol: ToleranceConfig = DEFAULT_TOL, d1=None, d2=None) -> OperatorSchmidt:
    """Expansion of ``|phi><phi|`` built from the state's Schmidt expansion.

    One term per ordered pair ``(i, i')`` with coefficient
    ``sqrt(r_i r_i')`` and factors ``|i><i'|_1`` and ``|i><i'|_2``.
    """
    sch = schmidt_state(phi, tol, d1, d2)
    n = len(sch)
    s, f1, f2 = [], [], []
    for i in range(n):
        for j in range(n):
            s.append(np.sqrt(sch.coefficients[i] * sch.coefficients[j]))
            f1.append(np.outer(sch.basis1[:, i], sch.basis1[:, j].conj()))
            f2.append(np.outer(sch.basis2[:, i], sch.basis2[:, j].conj()))
    # the pairs are already in a deterministic order; keep it within ties
    keys = [np.array([k], float) for k in range(len(s))]
    return _finish(sch.d1, sch.d2, 1.0, np.array(s), np.array(f1), np.array(f2), keys, False, tol)


# --------------------------------------------------------------------------
# invariance under the adjoint involution


@dataclass(frozen=True)
class AdjointInvarianceReport:
    """Clauses: (a) W is self-adjoint; (b) each coefficient block's factor
    span is closed under adjoints; (c) the factors themselves are Hermitian
    (``None`` when the expansion does not claim Hermitian factors)."""

    hermitian_input: bool
    spectra_invariant: bool
    factors_hermitian: bool | None
    input_residual: float
    span_residual: float
    factor_residual: float

    @property
    def failures(self) -> list[str]:
        out = []
        if not self.hermitian_input:
            out.append("a: operator is not self-adjoint")
        if not self.spectra_invariant:
            out.append("b: a coefficient subspace is not closed under adjoints")
        if self.factors_hermitian is False:
            out.append("c: a factor differs from its adjoint")
        return out

    @property
    def ok(self) -> bool:
        return not self.failures


def _span_residual(factors, blocks):
    worst = 0.0
    for block in blocks:
        fam = factors[list(block)].reshape(len(block), -1)
        for f in factors[list(block)]:
            adj = f.conj().T.reshape(-1)
            proj = fam.T @ (fam.conj() @ adj)
            worst = max(worst, float(np.linalg.norm(adj - proj)))
    return worst


def adjoint_invariance_check(w, expansion: OperatorSchmidt, tol: ToleranceConfig = DEFAULT_TOL) -> AdjointInvarianceReport:
    """Check an operator expansion against invariance under operator adjoining."""
    w, _, _ = _unpack(w, expansion.d1, expansion.d2)
    limit = 10 * tol.zero_tol
    in_res = opnorm(w - w.conj().T)
    span_res = max(
        _span_residual(expansion.factors1, expansion.blocks),
        _span_residual(expansion.factors2, expansion.blocks),
    )
    if expansion.hermitian_factors and len(expansion):
        fac_res = max(
            max(opnorm(f - f.conj().T) for f in expansion.factors1),
            max(opnorm(f - f.conj().T) for f in expansion.factors2),
        )
        fac_ok = fac_res <= limit
    else:
        fac_res, fac_ok = 0.0, (None if not expansion.hermitian_factors else True)
    return AdjointInvarianceReport(
        in_res <= limit * max(1.0, opnorm(w)), span_res <= limit, fac_ok,
        in_res, span_res, fac_res,
    )
