from app.bundle.cocycle import (
    BundleRep,
    Refinement,
    common_cover,
    dual,
    hom,
    pullback,
    refine,
    reindexed,
    tensor,
    trivial_bundle,
    validate_cocycle,
    whitney_sum,
    zero_bundle,
)
from app.bundle.invariants import s1_line_class
from app.bundle.morphism import (
    MorphismField,
    check_isomorphism,
    identity_morphism,
)
from app.bundle.projector import (
    ProjectorField,
    bundle_from_projector,
    complement,
    gauss_embedding,
    projector_isomorphism,
    projector_rank,
    splitting_isomorphism,
    validate_projector,
)
from app.bundle.sections import (
    SectionRep,
    coefficients,
    evaluate_section,
    generating_sections,
    generator_matrix,
    reconstruct,
    validate_section,
)

__all__ = (
    "BundleRep",
    "MorphismField",
    "ProjectorField",
    "Refinement",
    "SectionRep",
    "bundle_from_projector",
    "check_isomorphism",
    "coefficients",
    "common_cover",
    "complement",
    "dual",
    "evaluate_section",
    "gauss_embedding",
    "generating_sections",
    "generator_matrix",
    "hom",
    "identity_morphism",
    "projector_isomorphism",
    "projector_rank",
    "pullback",
    "reconstruct",
    "refine",
    "reindexed",
    "s1_line_class",
    "splitting_isomorphism",
    "tensor",
    "trivial_bundle",
    "validate_cocycle",
    "validate_projector",
    "validate_section",
    "whitney_sum",
    "zero_bundle",
)
