"""Hilbert-Schmidt orthonormal Hermitian operator bases."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """Normalized generalized Gell-Mann matrices, identity first.

    Returns an array of shape ``(d*d, d, d)`` whose slices are Hermitian and
    satisfy ``Tr(G_a G_b) = delta_ab``. Order: ``I/sqrt(d)``, the symmetric
    off-diagonal elements, the antisymmetric ones, then the traceless
    diagonal ones. For d = 2 this is ``(I, X, Y, Z) / sqrt(2)``.
    """
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        mats.append(m)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -l
        mats.append(m / np.sqrt(l * (l + 1)))
    out = np.array(mats)
    out.setflags(write=False)
    return out


def hermitian_coords(a: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in :func:`hermitian_basis`."""
    g = hermitian_basis(a.shape[0])
    return np.einsum("kij,ji->k", g, a).real


def from_hermitian_coords(x: np.ndarray, d: int) -> np.ndarray:
    return np.tensordot(np.asarray(x, dtype=float), hermitian_basis(d), axes=1)
