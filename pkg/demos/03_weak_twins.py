"""
Weak twins of a pure entangled state
====================================

On the Bell state, (|0><0|, |0><0|) is a twin pair that does not commute
with the state: a weak twin event. The projector splits the state into two
non-Hermitian pieces whose operator Schmidt expansions are mutually
orthogonal, and together they form one expansion of the whole state.
"""

import numpy as np

import twinlab as tl

bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
rho = tl.BipartiteDensity(2, 2, np.outer(bell, bell))
p0 = np.diag([1.0, 0.0])

tp = tl.classify_projector(p0, rho)
print("strength:", tp.strength.value, "commutator norm:", round(tp.commutator_norm, 6))

ws = tl.weak_split_expansion(tp, rho)
print("pieces expanded into", [len(e) for e in ws.expansions], "terms")
print("max cross HS product:", ws.max_cross)
print("combined coefficients:", np.round(ws.combined.weights, 12))

# The same count follows from expanding the pure state directly.
direct = tl.pure_nonhermitian_expansion(bell, d1=2, d2=2)
print("direct expansion:", np.round(direct.weights, 12))
