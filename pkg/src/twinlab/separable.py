"""Separable mixtures and the twins they admit.

A separable mixture ``sum_k w_k rho1_k (x) rho2_k`` has nontrivial twin
projectors exactly when its terms fall into two or more groups whose
factor states are orthogonal across groups on *both* subsystems. Grouping
is done with the connected components of the "overlaps on some side"
graph, which is the finest such partition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import (
    DEFAULT_TOL,
    BipartiteDensity,
    ToleranceConfig,
    range_projector,
    states_orthogonal,
)
from .errors import InternalConsistencyError, ValidationError
from .twins import (
    Strength,
    TwinProjectorPair,
    TwinSpace,
    _make_projector_pair,
    _null_columns,
    twin_residual,
    twin_solve,
    twin_space_from_basis,
)

__all__ = [
    "SeparableMixture",
    "PartitionResult",
    "assemble",
    "partition_biorthogonal",
    "bipartition_twins",
    "sharp_values",
    "mixture_twin_intersection",
]


def _check_factor(m, d, name, tol):
    m = np.asarray(m, dtype=complex)
    if m.shape != (d, d):
        raise ValidationError(f"{name} must be {d}x{d}, got {m.shape}")
    if np.linalg.norm(m - m.conj().T, 2) > tol.zero_tol:
        raise ValidationError(f"{name} is not Hermitian")
    m = 0.5 * (m + m.conj().T)
    evals = np.linalg.eigvalsh(m)
    if evals.min() < -tol.zero_tol:
        raise ValidationError(f"{name} has negative eigenvalue {evals.min():.3e}")
    if abs(np.trace(m).real - 1) > tol.zero_tol:
        raise ValidationError(f"{name} does not have unit trace")
    return m


@dataclass(frozen=True)
class SeparableMixture:
    """``terms`` is a sequence of ``(w, rho1, rho2)`` triples."""

    d1: int
    d2: int
    terms: tuple = field(repr=False)
    tol: ToleranceConfig = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("a separable mixture needs at least one term")
        clean = []
        for k, (w, r1, r2) in enumerate(self.terms):
            if not w > 0:
                raise ValidationError(f"terms[{k}].w must be positive, got {w!r}")
            clean.append((
                float(w),
                _check_factor(r1, self.d1, f"terms[{k}].rho1", self.tol),
                _check_factor(r2, self.d2, f"terms[{k}].rho2", self.tol),
            ))
        total = sum(w for w, _, _ in clean)
        if abs(total - 1) > self.tol.zero_tol:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "terms", tuple(clean))

    def __len__(self):
        return len(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _, _ in self.terms])

    def term_density(self, k) -> BipartiteDensity:
        _, r1, r2 = self.terms[k]
        return BipartiteDensity(self.d1, self.d2, np.kron(r1, r2))


def assemble(mix: SeparableMixture) -> BipartiteDensity:
    """The density ``sum_k w_k rho1_k (x) rho2_k``."""
    m = sum(w * np.kron(r1, r2) for w, r1, r2 in mix.terms)
    return BipartiteDensity.from_matrix(m, mix.d1, mix.d2, mix.tol)


@dataclass(frozen=True)
class PartitionResult:
    """Groups of mutually biorthogonal terms and the twins they induce.

    ``group_projectors[g]`` holds the support projectors of group g on both
    subsystems; ``induced_twins[g]`` is the strong twin pair separating
    group g from the rest (empty with a single group).
    """

    groups: tuple
    group_projectors: tuple = field(repr=False)
    induced_twins: tuple = field(repr=False)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def has_nontrivial_twins(self) -> bool:
        return self.n_groups >= 2


def _overlap_graph(mix, tol):
    n = len(mix)
    adj = np.zeros((n, n), dtype=bool)
    for k, l in combinations(range(n), 2):
        _, a1, a2 = mix.terms[k]
        _, b1, b2 = mix.terms[l]
        ortho1, _ = states_orthogonal(a1, b1, tol)
        ortho2, _ = states_orthogonal(a2, b2, tol)
        adj[k, l] = adj[l, k] = not (ortho1 and ortho2)
    return adj


def partition_biorthogonal(mix: SeparableMixture, tol: ToleranceConfig = DEFAULT_TOL) -> PartitionResult:
    """Group mixture terms into biorthogonal classes and build the induced twins."""
    adj = _overlap_graph(mix, tol)
    n_comp, labels = connected_components(csr_matrix(adj), directed=False)
    # order groups by their smallest term index
    firsts = sorted(range(n_comp), key=lambda c: int(np.flatnonzero(labels == c)[0]))
    groups = tuple(tuple(int(k) for k in np.flatnonzero(labels == c)) for c in firsts)
    projectors = []
    for g in groups:
        s1 = sum(mix.terms[k][1] for k in g)
        s2 = sum(mix.terms[k][2] for k in g)
        projectors.append((range_projector(s1, tol, 1), range_projector(s2, tol, 2)))
    twins = ()
    if len(groups) >= 2:
        rho = assemble(mix)
        twins = tuple(_induced_pair(p1.matrix, p2.matrix, rho, tol) for p1, p2 in projectors)
    return PartitionResult(groups, tuple(projectors), twins)


def _induced_pair(p1, p2, rho, tol) -> TwinProjectorPair:
    res = twin_residual(p1, p2, rho)
    if res > tol.zero_tol:
        raise InternalConsistencyError(f"group support projectors are not twins ({res:.3e})")
    tp = _make_projector_pair(p1, p2, rho, tol, res)
    if tp.strength is not Strength.STRONG:
        raise InternalConsistencyError("twin projectors of a separable mixture must be strong")
    return tp


def bipartition_twins(result: PartitionResult, mix: SeparableMixture, tol: ToleranceConfig = DEFAULT_TOL) -> list:
    """Strong twin pairs for every proper bipartition of the groups.

    Each bipartition is listed once, by the side containing group 0.
    """
    n = result.n_groups
    if n < 2:
        return []
    rho = assemble(mix)
    out = []
    for size in range(1, n):
        for subset in combinations(range(n), size):
            if 0 not in subset:
                continue
            p1 = sum(result.group_projectors[g][0].matrix for g in subset)
            p2 = sum(result.group_projectors[g][1].matrix for g in subset)
            out.append((subset, _induced_pair(p1, p2, rho, tol)))
    return out


def sharp_values(result: PartitionResult, mix: SeparableMixture, tol: ToleranceConfig = DEFAULT_TOL) -> list[int]:
    """For each term, the unique group projector that leaves it invariant.

    Raises when a term is invariant under no group projector or several.
    """
    out = []
    for k in range(len(mix)):
        t = mix.term_density(k).matrix
        hits = [
            g for g, (p1, _) in enumerate(result.group_projectors)
            if np.linalg.norm(np.kron(p1.matrix, np.eye(mix.d2)) @ t - t, 2) <= 10 * tol.zero_tol
        ]
        if len(hits) != 1:
            raise InternalConsistencyError(f"term {k} has no sharp group value (hits {hits})")
        out.append(hits[0])
    return out


def mixture_twin_intersection(terms, tol: ToleranceConfig = DEFAULT_TOL) -> TwinSpace:
    """Twin pairs shared by every term state, by intersecting their twin spaces.

    Triviality is judged against the equal-weight mixture of the terms,
    whose reduced ranges match those of any strictly positive mixture.
    """
    terms = list(terms)
    if not terms:
        raise ValidationError("need at least one term state")
    d1, d2 = terms[0].d1, terms[0].d2
    if any((t.d1, t.d2) != (d1, d2) for t in terms):
        raise ValidationError("term states have different dimensions")
    n = d1 * d1 + d2 * d2
    stack = []
    for t in terms:
        basis = twin_solve(t, tol).basis
        stack.append(np.eye(n) - basis @ basis.T)
    # distance of a direction from each term space; exact members give ~1e-15
    null, _ = _null_columns(np.concatenate(stack), cutoff_abs=tol.degeneracy_tol)
    ref = BipartiteDensity(d1, d2, sum(t.matrix for t in terms) / len(terms))
    return twin_space_from_basis(null, ref, tol)
