"""
Twins of a measured singlet
===========================

A singlet whose first spin has been measured along z is the equal mixture
of |up, down> and |down, up>. Measuring s_z on one side then fixes s_z on
the other: (s_z, -s_z) is a pair of twin observables, and its spectral
projectors split the state into two biorthogonal pieces.
"""

import numpy as np

import twinlab as tl

up, down = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
rho = tl.BipartiteDensity(2, 2, 0.5 * (np.kron(up, down) + np.kron(down, up)))

# Solve the twin equation A1 rho = A2 rho over all Hermitian pairs.
space = tl.twin_solve(rho)
print("twin space dimension:", space.dimension, "trivial flags:", space.trivial)

pair = space.nontrivial_pairs[0]
print("A1 =\n", np.round(pair.A1.matrix.real, 6))
print("A2 =\n", np.round(pair.A2.matrix.real, 6))

# Spectral projectors of the twin pair; both are strong (commute with rho).
data = tl.twin_spectral_projectors(pair, rho)
for a, tp in zip(data.eigenvalues, data.projector_pairs):
    print(f"eigenvalue {a:+.3f}: {tp.strength.value}, commutator {tp.commutator_norm:.1e}")
    print("  P1 diag", np.diag(tp.P1.matrix).real, " P2 diag", np.diag(tp.P2.matrix).real)

# The strong projector |up><up| splits rho into a biorthogonal mixture.
dec = tl.decompose_by_projector(tl.classify_projector(up, rho), rho)
print("weights:", dec.weights, "biorthogonal:", dec.biorthogonal)
