import numpy as np

from app.bilinear import SignatureType


def eigen_signature(s: np.ndarray) -> SignatureType:
    """Sylvester oracle: signs of the eigenvalues."""
    values = np.linalg.eigvalsh(0.5 * (s + s.T))
    return SignatureType(int((values > 0).sum()), int((values < 0).sum()))


def random_symmetric(rng, d: int, min_det: float = 0.1) -> np.ndarray:
    """Symmetric d x d matrix with |det| > min_det."""
    while True:
        a = rng.standard_normal((d, d))
        s = a + a.T
        if abs(np.linalg.det(s)) > min_det:
            return s


def random_invertible(rng, d: int, min_det: float = 0.1) -> np.ndarray:
    while True:
        t = rng.standard_normal((d, d))
        if abs(np.linalg.det(t)) > min_det:
            return t


def diagonal_with(positive: int, negative: int) -> np.ndarray:
    return np.diag([1.0] * positive + [-1.0] * negative)
