"""twinlab: twin observables, biorthogonal mixtures and operator Schmidt
expansions of bipartite quantum states.

>>> import numpy as np, twinlab as tl
>>> up, down = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
>>> rho = tl.BipartiteDensity(2, 2, 0.5 * (np.kron(up, down) + np.kron(down, up)))
>>> tl.twin_solve(rho).has_nontrivial
True
"""

from .core import (
    DEFAULT_TOL,
    BipartiteDensity,
    HermitianObservable,
    OrthogonalityCertificate,
    OrthogonalProjector,
    PureBipartiteState,
    ToleranceConfig,
    hs_inner,
    hs_norm,
    lift,
    partial_trace,
    range_basis,
    range_projector,
    states_orthogonal,
    tensor_product,
)
from .errors import (
    DegenerateSplitError,
    InternalConsistencyError,
    TwinlabError,
    TwinRejection,
    ValidationError,
)
from .schmidt import (
    AntilinearMap,
    OperatorSchmidt,
    StateSchmidt,
    adjoint_invariance_check,
    compose_state,
    correlation_map,
    operator_schmidt_complex,
    operator_schmidt_hermitian,
    pure_nonhermitian_expansion,
    schmidt_state,
)
from .separable import (
    PartitionResult,
    SeparableMixture,
    assemble,
    bipartition_twins,
    mixture_twin_intersection,
    partition_biorthogonal,
    sharp_values,
)
from .twins import (
    BiorthogonalDecomposition,
    BiorthogonalityError,
    ObservableStrength,
    Strength,
    TwinPair,
    TwinProjectorPair,
    TwinSpace,
    TwinSpectralData,
    WeakSplit,
    biorthogonal_from_mixture,
    classify_observable,
    classify_projector,
    decompose_by_projector,
    detectable_part,
    hs_orthogonality_equiv,
    is_twin,
    principal_angles,
    strong_mixture,
    twin_check,
    twin_solve,
    twin_spectral_projectors,
    verify_reduced_commutation,
    weak_split_expansion,
)

__version__ = "0.1.0"
