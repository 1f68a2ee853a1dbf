"""Random states for sweeps, demos and tests."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .core import BipartiteDensity, PureBipartiteState


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_unitary(d, rng=None) -> np.ndarray:
    rng = _rng(rng)
    if d == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(d, random_state=rng)


def random_psd(d, rank=None, rng=None) -> np.ndarray:
    """Unit-trace positive matrix of the given rank (Ginibre ensemble)."""
    rng = _rng(rng)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_density(d1, d2, rank=None, rng=None) -> BipartiteDensity:
    return BipartiteDensity(d1, d2, random_psd(d1 * d2, rank, rng))


def random_pure(d1, d2, rng=None) -> PureBipartiteState:
    rng = _rng(rng)
    v = rng.normal(size=d1 * d2) + 1j * rng.normal(size=d1 * d2)
    return PureBipartiteState(d1, d2, v / np.linalg.norm(v))


def random_supported_psd(basis, rank=None, rng=None) -> np.ndarray:
    """Unit-trace positive matrix whose range lies in the span of ``basis`` columns."""
    k = basis.shape[1]
    inner = random_psd(k, rank, rng)
    return basis @ inner @ basis.conj().T


def random_separable(d1, d2, n_terms, rng=None, n_blocks=None):
    """Random separable mixture with planted block structure.

    A random orthonormal frame on each subsystem is cut into ``n_blocks``
    disjoint blocks (random by default, at most ``min(d1, d2, n_terms)``).
    Each term picks a block and is supported on a random nonempty subset of
    that block's frame vectors on both sides. Terms in different blocks are
    thus biorthogonal; terms in the same block may or may not overlap.
    """
    from .separable import SeparableMixture

    rng = _rng(rng)
    cap = min(d1, d2, n_terms)
    n_blocks = int(rng.integers(1, cap + 1)) if n_blocks is None else n_blocks
    if not 1 <= n_blocks <= cap:
        raise ValueError(f"n_blocks must lie in [1, {cap}]")
    frames, cuts = [], []
    for d in (d1, d2):
        frames.append(random_unitary(d, rng))
        perm = rng.permutation(d)
        edges = np.sort(rng.choice(np.arange(1, d), size=n_blocks - 1, replace=False))
        cuts.append(np.split(perm, edges))
    # every block gets at least one term
    labels = np.concatenate([np.arange(n_blocks), rng.integers(0, n_blocks, n_terms - n_blocks)])
    rng.shuffle(labels)
    weights = rng.dirichlet(np.ones(n_terms))
    terms = []
    for w, b in zip(weights, labels):
        factors = []
        for frame, blocks in zip(frames, cuts):
            block = blocks[b]
            size = int(rng.integers(1, len(block) + 1))
            cols = np.sort(rng.choice(block, size=size, replace=False))
            factors.append(random_supported_psd(frame[:, cols], rng=rng))
        terms.append((w, *factors))
    return SeparableMixture(d1, d2, tuple(terms))
