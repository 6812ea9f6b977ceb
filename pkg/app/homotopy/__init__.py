from app.homotopy.cylinder import (
    cylinder_base,
    cylinder_pullback,
    occupied_pullback,
    product_cover,
    pullback_to_cylinder,
    restrict,
    restrict_form,
    restrict_with_index,
    slice_points,
)
from app.homotopy.retraction import (
    CylinderIsomorphism,
    cylinder_isomorphism,
    homotopy_isometry,
    homotopy_isomorphism,
)
from app.homotopy.strips import (
    StripDecomposition,
    Trivialization,
    clutch,
    strip_subdivision,
)
from app.homotopy.transport import (
    Transport,
    contraction,
    induced_iso_from_homotopy,
    transport_along,
    trivialize_contractible,
)

__all__ = (
    "CylinderIsomorphism",
    "StripDecomposition",
    "Transport",
    "Trivialization",
    "clutch",
    "contraction",
    "cylinder_base",
    "cylinder_isomorphism",
    "cylinder_pullback",
    "homotopy_isometry",
    "homotopy_isomorphism",
    "induced_iso_from_homotopy",
    "occupied_pullback",
    "product_cover",
    "pullback_to_cylinder",
    "restrict",
    "restrict_form",
    "restrict_with_index",
    "slice_points",
    "strip_subdivision",
    "transport_along",
    "trivialize_contractible",
)
