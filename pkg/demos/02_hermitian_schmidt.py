"""
Operator Schmidt expansions
===========================

Any bipartite operator W can be written as sum_k s_k F1_k (x) F2_k with
Hilbert-Schmidt orthonormal factors. When W is Hermitian the factors can be
chosen Hermitian, and the coefficients agree with the singular values of
the realigned matrix.
"""

import numpy as np

import twinlab as tl
from twinlab.sampling import random_psd

rng = np.random.default_rng(3)

# The Bell state: four equal coefficients.
bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
exp = tl.operator_schmidt_hermitian(np.outer(bell, bell), 2, 2)
print("Bell weights:", np.round(exp.weights, 12))

# A random qubit-qutrit density.
w = random_psd(6, rank=3, rng=rng)
herm = tl.operator_schmidt_hermitian(w, 2, 3)
comp = tl.operator_schmidt_complex(w, 2, 3)
print("Hermitian path:", np.round(herm.weights, 10))
print("complex path:  ", np.round(comp.weights, 10))
print("reconstruction error:", np.linalg.norm(herm.reconstruct() - w, 2))
print("factor Gram matrix is identity:", np.allclose(herm.gram(1), np.eye(len(herm))))

# The adjoint check: a Hermitian input has a Hermitian expansion.
report = tl.adjoint_invariance_check(w, herm)
print("adjoint invariance ok:", report.ok)
