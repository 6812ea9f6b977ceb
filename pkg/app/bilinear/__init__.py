from app.bilinear.decomposition import (
    Decomposition,
    blend_positive_subbundle,
    decompose,
    pencil,
    restricted_eigenvalues,
    validate_decomposition,
)
from app.bilinear.form import (
    FormField,
    constant_form,
    hyperbolic_matrix,
    hyperbolic_space,
    negate,
    on_common_cover,
    orthogonal_sum,
    pullback_form,
    reindex_on,
    reindexed_form,
    standard_positive_form,
    symmetric,
    tensor_form,
    validate_form,
)
from app.bilinear.gram_schmidt import (
    LocalTrivialization,
    SignatureType,
    gram_schmidt_frame,
    local_trivializing_cover,
    matrix_signature,
    signature,
)
from app.bilinear.isometry import (
    IsometryWitness,
    canonical_root,
    check_isometry,
    identity_isometry,
    positive_isometry,
    transversal_isometry,
    transversal_map,
)

__all__ = (
    "Decomposition",
    "FormField",
    "IsometryWitness",
    "LocalTrivialization",
    "SignatureType",
    "blend_positive_subbundle",
    "canonical_root",
    "check_isometry",
    "constant_form",
    "decompose",
    "gram_schmidt_frame",
    "hyperbolic_matrix",
    "hyperbolic_space",
    "identity_isometry",
    "local_trivializing_cover",
    "matrix_signature",
    "negate",
    "on_common_cover",
    "orthogonal_sum",
    "pencil",
    "positive_isometry",
    "pullback_form",
    "reindex_on",
    "reindexed_form",
    "restricted_eigenvalues",
    "signature",
    "standard_positive_form",
    "symmetric",
    "tensor_form",
    "transversal_isometry",
    "transversal_map",
    "validate_decomposition",
    "validate_form",
)
