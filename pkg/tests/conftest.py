import numpy as np

from nikave.poly import BasisSpec, TrigPoly
from nikave.quadrature import QuadConfig

# coarse settings keep norm-heavy tests fast; ratios of shared norms do not need more
LOOSE_QUAD = QuadConfig(oversample=8, rel_tol=1e-6, max_doublings=2)
COARSE_QUAD = QuadConfig(oversample=4, rel_tol=1e-3, max_doublings=1)


def random_poly(basis: BasisSpec, seed: int = 0) -> TrigPoly:
    """Gaussian coefficients from numpy's default generator, for deterministic fixtures."""
    rng = np.random.default_rng(seed)
    return TrigPoly(basis, rng.standard_normal(basis.size))


def shifted_cosine(shift: float) -> TrigPoly:
    """cos(x - shift) in the real-1d basis of degree 1; sup norm 1, attained at x = shift."""
    c = 1 / np.sqrt(2.0)
    return TrigPoly(
        BasisSpec(1, 1), np.array([0.0, c * np.cos(shift), c * np.sin(shift)])
    )
