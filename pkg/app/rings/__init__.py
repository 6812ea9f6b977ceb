from app.rings.k0 import (
    K0Class,
    circle_bundle,
    det_class,
    k0_add,
    k0_mul,
    k0_neg,
)
from app.rings.witt import (
    Truth,
    Verdict,
    WittClass,
    cancellation_witness,
    delta,
    nabla,
    roundtrip_check,
    witt_add,
    witt_is_zero,
    witt_mul,
    witt_neg,
)

__all__ = (
    "K0Class",
    "Truth",
    "Verdict",
    "WittClass",
    "cancellation_witness",
    "circle_bundle",
    "delta",
    "det_class",
    "k0_add",
    "k0_mul",
    "k0_neg",
    "nabla",
    "roundtrip_check",
    "witt_add",
    "witt_is_zero",
    "witt_mul",
    "witt_neg",
)
