"""Monte Carlo estimates of expectations over random coefficient vectors.

Sample i always uses the stream derive_stream(seed, i). Every statistic is
evaluated on the unit-scale draw and multiplied by sigma**h, h being its
homogeneity degree, so ratios of degree 0 do not depend on sigma at all.
Per-sample values are reduced in index order with math.fsum, which makes
the result independent of the worker count.
"""

from __future__ import annotations

import logging
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import TYPE_CHECKING

from .errors import DegenerateInputError, DomainError
from .oracles import chi_moment, moment_ratio_factor, recip_moment_factor
from .poly import TrigPoly
from .quadrature import DEFAULT_QUAD, L2, SUP, NormSpec, QuadConfig, format_number, norm
from .sampling import Law, RandomSpec, derive_stream, sample_coeffs, sample_unit

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from .poly import BasisSpec

logger = logging.getLogger(__name__)

Z_95 = 1.96
# sampled identities pass within this many paired standard errors
IDENTITY_Z = 3.0
# draws with any required norm below this are rejected and counted
DEGENERATE_NORM = 1e-300
# relative agreement required of closed-form (q = 2) identity checks
EXACT_IDENTITY_RTOL = 1e-10
# homogeneity check of the norms under coefficient scaling
SCALING_RTOL = 1e-9
_SCALING_DRAWS = 16


# --- statistics ---------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class Nikolskii:
    """|T|_q / |T|_p."""

    p: NormSpec
    q: NormSpec

    @property
    def norms(self) -> tuple[NormSpec, ...]:
        return tuple(dict.fromkeys((self.p, self.q)))

    @property
    def homogeneity(self) -> float:
        return 0.0

    @property
    def denominator(self) -> NormSpec | None:
        return self.p

    @property
    def numerator(self) -> NormSpec | None:
        return self.q

    def validate(self, N: int) -> None:
        pass

    def value(self, norms: Mapping[NormSpec, float]) -> float:
        return norms[self.q] / norms[self.p]

    def __str__(self) -> str:
        return f"nikolskii(p={self.p},q={self.q})"


@dataclass(frozen=True, slots=True)
class MomentRatio:
    """|T|_q^k / |T|_2^l."""

    q: NormSpec
    k: int
    l: int  # noqa: E741

    @property
    def norms(self) -> tuple[NormSpec, ...]:
        return tuple(dict.fromkeys((self.q, L2)))

    @property
    def homogeneity(self) -> float:
        return float(self.k - self.l)

    @property
    def denominator(self) -> NormSpec | None:
        return L2

    @property
    def numerator(self) -> NormSpec | None:
        return self.q

    def validate(self, N: int) -> None:
        if self.k < 1 or self.l < 1:
            msg = f"moment ratio needs k, l >= 1, provided k={self.k} l={self.l}"
            raise DomainError(msg)
        if self.l >= self.k + N:
            msg = f"moment ratio needs l < k + N, provided k={self.k} l={self.l} N={N}"
            raise DomainError(msg)

    def value(self, norms: Mapping[NormSpec, float]) -> float:
        return norms[self.q] ** self.k / norms[L2] ** self.l

    def __str__(self) -> str:
        return f"moment_ratio(q={self.q},k={self.k},l={self.l})"


@dataclass(frozen=True, slots=True)
class NormMoment:
    """|T|_q^s."""

    q: NormSpec
    s: float

    @property
    def norms(self) -> tuple[NormSpec, ...]:
        return (self.q,)

    @property
    def homogeneity(self) -> float:
        return float(self.s)

    @property
    def denominator(self) -> NormSpec | None:
        return None

    @property
    def numerator(self) -> NormSpec | None:
        return self.q

    def validate(self, N: int) -> None:
        if not math.isfinite(self.s):
            msg = f"moment order must be finite, provided s={self.s}"
            raise DomainError(msg)

    def value(self, norms: Mapping[NormSpec, float]) -> float:
        return norms[self.q] ** self.s

    def __str__(self) -> str:
        return f"norm_moment(q={self.q},s={format_number(self.s)})"


@dataclass(frozen=True, slots=True)
class RecipSupMoment:
    """|T|_inf^-r."""

    r: float

    @property
    def norms(self) -> tuple[NormSpec, ...]:
        return (SUP,)

    @property
    def homogeneity(self) -> float:
        return -float(self.r)

    @property
    def denominator(self) -> NormSpec | None:
        return None

    @property
    def numerator(self) -> NormSpec | None:
        return SUP

    def validate(self, N: int) -> None:
        if not (self.r > 0 and math.isfinite(self.r)):
            msg = f"reciprocal moment needs finite r > 0, provided r={self.r}"
            raise DomainError(msg)

    def value(self, norms: Mapping[NormSpec, float]) -> float:
        return norms[SUP] ** -self.r

    def __str__(self) -> str:
        return f"recip_sup_moment(r={format_number(self.r)})"


type Statistic = Nikolskii | MomentRatio | NormMoment | RecipSupMoment

_DESCRIPTOR = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")
_FIELDS: dict[str, tuple[str, ...]] = {
    "nikolskii": ("p", "q"),
    "moment_ratio": ("q", "k", "l"),
    "norm_moment": ("q", "s"),
    "recip_sup_moment": ("r",),
}


def parse_statistic(descriptor: str) -> Statistic:
    """Inverse of str(statistic).

    >>> parse_statistic("nikolskii(p=1,q=inf)")
    Nikolskii(p=NormSpec(exponent=1.0), q=NormSpec(exponent=inf))
    """
    match = _DESCRIPTOR.match(descriptor)
    if match is None or match.group(1) not in _FIELDS:
        msg = f"unknown statistic descriptor {descriptor!r}"
        raise DomainError(msg)
    name, body = match.groups()
    args: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in body.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            msg = f"statistic arguments must be key=value, provided {part!r}"
            raise DomainError(msg)
        args[key.strip()] = value.strip()
    if set(args) != set(_FIELDS[name]):
        msg = f"{name} takes {', '.join(_FIELDS[name])}, provided {', '.join(args)}"
        raise DomainError(msg)
    try:
        match name:
            case "nikolskii":
                return Nikolskii(NormSpec.parse(args["p"]), NormSpec.parse(args["q"]))
            case "moment_ratio":
                return MomentRatio(
                    NormSpec.parse(args["q"]), int(args["k"]), int(args["l"])
                )
            case "norm_moment":
                return NormMoment(NormSpec.parse(args["q"]), float(args["s"]))
            case _:
                return RecipSupMoment(float(args["r"]))
    except DomainError:
        raise
    except ValueError as e:
        msg = f"bad statistic argument in {descriptor!r}: {e}"
        raise DomainError(msg) from e


# --- tasks and estimates ------------------------------------------------------
@dataclass(frozen=True, slots=True)
class EstimatorTask:
    basis: BasisSpec
    random: RandomSpec
    statistic: Statistic
    samples: int
    quad: QuadConfig = DEFAULT_QUAD

    def __post_init__(self) -> None:
        if self.samples < 2:
            msg = f"need at least 2 samples for a variance, provided {self.samples=}"
            raise DomainError(msg)
        self.statistic.validate(self.basis.size)


@dataclass(frozen=True, slots=True)
class MCEstimate:
    mean: float
    stderr: float
    ci95: tuple[float, float]
    samples: int
    seed: int
    rejected: int = 0
    exact: bool = False  # closed form, not sampled

    @classmethod
    def exact_value(cls, value: float, samples: int, seed: int) -> MCEstimate:
        return cls(value, 0.0, (value, value), samples, seed, exact=True)


def summarize(values: Sequence[float], samples: int, seed: int) -> MCEstimate:
    """Mean, stderr and normal 95% interval of the accepted values, in index order."""
    if not values:
        msg = f"all {samples} draws were rejected as degenerate"
        raise DegenerateInputError(msg)
    count = len(values)
    mean = math.fsum(values) / count
    variance = math.fsum((v - mean) ** 2 for v in values) / (count - 1) if count > 1 else 0.0
    stderr = math.sqrt(variance / count)
    return MCEstimate(
        mean=mean,
        stderr=stderr,
        ci95=(mean - Z_95 * stderr, mean + Z_95 * stderr),
        samples=samples,
        seed=seed,
        rejected=samples - count,
    )


def _draw_norms(
    basis: BasisSpec,
    law: Law,
    seed: int,
    specs: tuple[NormSpec, ...],
    quad: QuadConfig,
    index: int,
) -> dict[NormSpec, float] | None:
    """Unit-scale norms of draw `index`, or None when the draw is degenerate."""
    coeffs = sample_unit(derive_stream(seed, index), basis.size, law)
    poly = TrigPoly(basis, coeffs)
    norms = {spec: norm(poly, spec, quad).value for spec in specs}
    if min(norms.values()) < DEGENERATE_NORM:
        return None
    return norms


def collect_norms(
    basis: BasisSpec,
    random: RandomSpec,
    specs: tuple[NormSpec, ...],
    samples: int,
    quad: QuadConfig = DEFAULT_QUAD,
    *,
    workers: int | None = None,
) -> list[dict[NormSpec, float] | None]:
    """Unit-scale norms of every draw, in sample-index order."""
    draw = partial(_draw_norms, basis, random.law, random.seed, specs, quad)
    if workers == 1:
        return [draw(i) for i in range(samples)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(draw, range(samples)))


def _statistic_values(
    statistic: Statistic,
    draws: Sequence[Mapping[NormSpec, float] | None],
    scale: float,
) -> list[float]:
    factor = scale**statistic.homogeneity
    return [statistic.value(d) * factor for d in draws if d is not None]


def sample_statistics(task: EstimatorTask, *, workers: int | None = None) -> list[float]:
    """Per-sample statistic values of the accepted draws, in index order."""
    draws = collect_norms(
        task.basis,
        task.random,
        task.statistic.norms,
        task.samples,
        task.quad,
        workers=workers,
    )
    return _statistic_values(task.statistic, draws, task.random.scale)


def run_estimator(task: EstimatorTask, *, workers: int | None = None) -> MCEstimate:
    start = time.perf_counter()
    values = sample_statistics(task, workers=workers)
    estimate = summarize(values, task.samples, task.random.seed)
    logger.info(
        "estimate: %s d=%d n=%d N=%d samples=%d rejected=%d %.1fms",
        task.statistic,
        task.basis.dimension,
        task.basis.degree,
        task.basis.size,
        task.samples,
        estimate.rejected,
        (time.perf_counter() - start) * 1000,
    )
    return estimate


# --- identity checks ----------------------------------------------------------
@dataclass(frozen=True, slots=True)
class IdentityReport:
    """Both sides of E(lhs) = E(rhs), estimated on common random numbers."""

    name: str
    lhs: MCEstimate
    rhs: MCEstimate
    stderr: float  # of the paired per-sample differences lhs_i - rhs_i
    passed: bool

    @property
    def difference(self) -> float:
        return self.lhs.mean - self.rhs.mean

    @property
    def exact(self) -> bool:
        return self.lhs.exact and self.rhs.exact


def _compare_exact(name: str, lhs: float, rhs: float, samples: int, seed: int) -> IdentityReport:
    passed = abs(lhs - rhs) <= EXACT_IDENTITY_RTOL * max(abs(lhs), abs(rhs))
    return IdentityReport(
        name,
        MCEstimate.exact_value(lhs, samples, seed),
        MCEstimate.exact_value(rhs, samples, seed),
        0.0,
        passed,
    )


def _compare_paired(
    name: str,
    lhs_values: Sequence[float],
    rhs_values: Sequence[float],
    samples: int,
    seed: int,
) -> IdentityReport:
    """Passes when |mean(lhs) - mean(rhs)| <= 3 stderr of the paired differences."""
    lhs = summarize(lhs_values, samples, seed)
    rhs = summarize(rhs_values, samples, seed)
    paired = summarize(
        [a - b for a, b in zip(lhs_values, rhs_values, strict=True)], samples, seed
    )
    passed = abs(lhs.mean - rhs.mean) <= IDENTITY_Z * paired.stderr
    return IdentityReport(name, lhs, rhs, paired.stderr, passed)


def verify_moment_ratio_identity(
    q: NormSpec,
    k: int,
    l: int,  # noqa: E741
    basis: BasisSpec,
    samples: int,
    seed: int,
    *,
    quad: QuadConfig = DEFAULT_QUAD,
    workers: int | None = None,
) -> IdentityReport:
    """E(|T|_q^k / |T|_2^l) against moment_ratio_factor(k, l, N) * E|T|_q^k.

    For q = 2 both sides are chi moments and are taken in closed form.
    """
    if q.is_sup:
        msg = "moment ratio identity needs a finite exponent q"
        raise DomainError(msg)
    N = basis.size
    statistic = MomentRatio(q, k, l)
    statistic.validate(N)
    factor = moment_ratio_factor(k, l, N).value
    name = f"{statistic} N={N}"
    if q == L2:
        lhs = chi_moment(N, k - l).value
        rhs = factor * chi_moment(N, k).value
        return _compare_exact(name, lhs, rhs, samples, seed)
    draws = collect_norms(
        basis, RandomSpec(seed=seed), statistic.norms, samples, quad, workers=workers
    )
    accepted = [d for d in draws if d is not None]
    lhs_values = [d[q] ** k / d[L2] ** l for d in accepted]
    rhs_values = [factor * d[q] ** k for d in accepted]
    return _compare_paired(name, lhs_values, rhs_values, samples, seed)


def verify_reciprocal_identity(
    p: NormSpec,
    k: int,
    l: int,  # noqa: E741
    basis: BasisSpec,
    samples: int,
    seed: int,
    *,
    quad: QuadConfig = DEFAULT_QUAD,
    workers: int | None = None,
) -> IdentityReport:
    """E(|T|_2^k / |T|_p^l) against recip_moment_factor(k, l, N) * E|T|_p^-l."""
    N = basis.size
    factor = recip_moment_factor(k, l, N).value
    name = f"recip_ratio(p={p},k={k},l={l}) N={N}"
    if p == L2:
        lhs = chi_moment(N, k - l).value
        rhs = factor * chi_moment(N, -l).value
        return _compare_exact(name, lhs, rhs, samples, seed)
    specs = tuple(dict.fromkeys((p, L2)))
    draws = collect_norms(basis, RandomSpec(seed=seed), specs, samples, quad, workers=workers)
    accepted = [d for d in draws if d is not None]
    lhs_values = [d[L2] ** k / d[p] ** l for d in accepted]
    rhs_values = [factor * d[p] ** -l for d in accepted]
    return _compare_paired(name, lhs_values, rhs_values, samples, seed)


@dataclass(frozen=True, slots=True)
class SigmaReport:
    sigmas: tuple[float, ...]
    estimates: tuple[MCEstimate, ...]
    # per-sample statistics of every sigma equal those of the first
    bitwise_equal: bool
    # max relative gap between the ratio on sampled sigma-scaled draws and on unit draws
    scaling_deviation: float
    # sample_coeffs returned exactly sigma times the unit draw
    sampler_equivariant: bool = True
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "passed",
            self.bitwise_equal
            and self.sampler_equivariant
            and self.scaling_deviation <= SCALING_RTOL,
        )


def verify_sigma_invariance(
    p: NormSpec,
    q: NormSpec,
    basis: BasisSpec,
    sigmas: Sequence[float],
    samples: int,
    seed: int,
    *,
    law: Law = Law.GAUSSIAN,
    quad: QuadConfig = DEFAULT_QUAD,
    workers: int | None = None,
) -> SigmaReport:
    """Runs nikolskii(p, q) once per sigma and compares the per-sample values bit for bit.

    Estimates scale unit draws through the homogeneity degree, so the bitwise
    comparison guards that path. The first few draws are also taken from
    sample_coeffs at every sigma, and the ratio on those sigma-scaled
    polynomials must match the unit-draw ratio to SCALING_RTOL.
    """
    if not sigmas or any(not s > 0 for s in sigmas):
        msg = f"sigmas must be a non-empty list of positive scalars, provided {sigmas}"
        raise DomainError(msg)
    statistic = Nikolskii(p, q)
    per_sigma: list[list[float]] = []
    estimates: list[MCEstimate] = []
    for sigma in sigmas:
        task = EstimatorTask(
            basis, RandomSpec(law=law, sigma=sigma, seed=seed), statistic, samples, quad
        )
        values = sample_statistics(task, workers=workers)
        per_sigma.append(values)
        estimates.append(summarize(values, samples, seed))
    bitwise = all(values == per_sigma[0] for values in per_sigma[1:])

    deviation = 0.0
    equivariant = True
    for i in range(min(samples, _SCALING_DRAWS)):
        stream = derive_stream(seed, i)
        unit_coeffs = sample_unit(stream, basis.size, law)
        unit = TrigPoly(basis, unit_coeffs)
        reference = norm(unit, q, quad).value / norm(unit, p, quad).value
        for sigma in sigmas:
            spec = RandomSpec(law=law, sigma=sigma, seed=seed)
            coeffs = sample_coeffs(stream, basis.size, spec)
            equivariant = equivariant and bool((coeffs == spec.scale * unit_coeffs).all())
            scaled = TrigPoly(basis, coeffs)
            ratio = norm(scaled, q, quad).value / norm(scaled, p, quad).value
            deviation = max(deviation, abs(ratio - reference) / reference)
    return SigmaReport(
        tuple(sigmas),
        tuple(estimates),
        bitwise,
        deviation,
        sampler_equivariant=equivariant,
    )
