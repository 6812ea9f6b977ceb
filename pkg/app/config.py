from dataclasses import dataclass, replace

IDENTITY_TOLERANCE = 1e-9
WITNESS_TOLERANCE = 1e-6
GRAM_SCHMIDT_TOLERANCE = 1e-8
PIVOT_FACTOR = 1e-10
NEAR_SINGULAR = 1e-12
MINOR_THRESHOLD = 1e-6
RANK_THRESHOLD = 1e-6
GUARD_EPSILON = 1e-12
EQUALITY_TOLERANCE = 1e-9

DEFAULT_SAMPLES = 1000
DEFAULT_SEED = 0
DEFAULT_SMOOTHNESS = 1
COVER_MEMO_SIZE = 256


@dataclass(frozen=True)
class Tolerances:
    identity: float = IDENTITY_TOLERANCE
    witness: float = WITNESS_TOLERANCE
    gram_schmidt: float = GRAM_SCHMIDT_TOLERANCE
    pivot: float = PIVOT_FACTOR
    singular: float = NEAR_SINGULAR
    minor: float = MINOR_THRESHOLD
    rank: float = RANK_THRESHOLD

    def replace(self, **changes) -> "Tolerances":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
