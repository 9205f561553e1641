"""Reproducible random coefficient vectors.

Sample i of a run with seed s draws from its own substream: a Philox
(counter-based) bit generator keyed by SeedSequence(s, spawn_key=(i,)). The
stream depends only on (s, i), never on which worker consumes it.
Gaussian variates come from numpy's Generator.standard_normal (ziggurat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .errors import BasisError, DomainError
from .poly import BasisKind, canonical_grid, evaluate

if TYPE_CHECKING:
    from .poly import ComplexArray, FloatArray, TrigPoly

# bump when the bit generator, key derivation or variate transform changes
GENERATOR_VERSION = "philox4x64/seedsequence-spawn-key/ziggurat:1"

_SEED_LIMIT = 2**64


class Law(Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"

    def __repr__(self) -> str:
        return str(self.value)


def parse_seed(text: str | int) -> int:
    """Seed from an int, a decimal string or a 0x-prefixed hex string."""
    if isinstance(text, int):
        seed = text
    else:
        token = text.strip().lower()
        try:
            seed = int(token, 16) if token.startswith("0x") else int(token, 10)
        except ValueError as e:
            msg = f"seed must be decimal or 0x-hex, provided {text!r}"
            raise DomainError(msg) from e
    if not 0 <= seed < _SEED_LIMIT:
        msg = f"seed must be a 64-bit unsigned integer, provided {seed}"
        raise DomainError(msg)
    return seed


@dataclass(frozen=True, slots=True)
class RandomSpec:
    """Coefficient law. sigma applies to the Gaussian law only."""

    law: Law = Law.GAUSSIAN
    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            msg = f"sigma must be positive, provided {self.sigma=}"
            raise DomainError(msg)
        parse_seed(self.seed)

    @property
    def scale(self) -> float:
        return self.sigma if self.law is Law.GAUSSIAN else 1.0


@dataclass(frozen=True, slots=True)
class StreamHandle:
    seed: int
    index: int

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this substream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.index,))
        return np.random.Generator(np.random.Philox(sequence))


def derive_stream(seed: int, index: int) -> StreamHandle:
    if index < 0:
        msg = f"stream index must be non-negative, provided {index=}"
        raise DomainError(msg)
    return StreamHandle(seed=parse_seed(seed), index=index)


def sample_unit(stream: StreamHandle, size: int, law: Law) -> FloatArray:
    """size i.i.d. unit-scale draws: N(0, 1) or uniform signs."""
    if size < 1:
        msg = f"need at least one coefficient, provided {size=}"
        raise DomainError(msg)
    generator = stream.generator()
    if law is Law.GAUSSIAN:
        return generator.standard_normal(size)
    return generator.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0


def sample_coeffs(stream: StreamHandle, size: int, spec: RandomSpec) -> FloatArray:
    """Unit draws multiplied by sigma, so sigma * (sigma=1 sample) holds exactly."""
    unit = sample_unit(stream, size, spec.law)
    if spec.scale == 1.0:
        return unit
    return spec.scale * unit


def grid_samples(poly: TrigPoly) -> FloatArray | ComplexArray:
    """X_k = T(x_k) / sqrt(N) over the canonical (2n+1)-per-axis grid, flattened."""
    if poly.basis.kind is BasisKind.REAL_TENSOR:
        msg = "grid samples are defined for real-1d and complex-exponential bases"
        raise BasisError(msg)
    values = evaluate(poly, canonical_grid(poly.basis))
    return values.ravel() / math.sqrt(poly.basis.size)
