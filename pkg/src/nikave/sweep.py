"""Estimator sweeps over degree and dimension grids, with band and slope fits."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from contextvars import ContextVar, copy_context
from dataclasses import dataclass, field
from enum import Enum
from functools import partial, reduce
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError, SweepPointError
from .estimators import EstimatorTask, run_estimator
from .poly import BasisKind, default_basis, fejer_poly
from .quadrature import DEFAULT_QUAD, NormSpec, QuadConfig, format_number, norm
from .sampling import RandomSpec

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .estimators import MCEstimate, Statistic

logger = logging.getLogger(__name__)

MIN_SLOPE_DEGREES = 3


@dataclass(frozen=True, slots=True)
class SweepPoint:
    d: int
    n: int
    N: int


sweep_point: ContextVar[SweepPoint] = ContextVar("sweep_point")

type PointRunner = Callable[[EstimatorTask], MCEstimate]
type Middleware = Callable[[PointRunner], PointRunner]


@dataclass(frozen=True, slots=True)
class Thresholds:
    """Acceptance bands. Empirical choices; the asymptotics only fix orders."""

    flat_band: float = 1.5  # constant regimes, normalizer one
    log_band: float = 2.0  # (ln N)^(+-1/2) regimes and E|T|_inf / sqrt(N ln N)
    recip_band: float = 2.5  # E|T|_inf^-2 * N ln N
    dimension_band: float = 1.5  # equal N across d
    flat_slope: float = 0.05
    probe_slope: tuple[float, float] = (0.40, 0.60)
    separation: float = 5.0  # Fejer probe over random average


DEFAULT_THRESHOLDS = Thresholds()


# --- normalizers --------------------------------------------------------------
class NormalizerKind(Enum):
    ONE = "one"
    SQRT_LOG_N = "sqrt_log_N"
    INV_SQRT_LOG_N = "inv_sqrt_log_N"
    N_POW = "N_pow"
    N_LOG_N_POW = "N_log_N_pow"

    def __repr__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Normalizer:
    """Divisor g(N) applied to sweep means; alpha is used by the power kinds only.

    >>> Normalizer.parse("N_pow(0.5)")(9)
    3.0
    """

    kind: NormalizerKind = NormalizerKind.ONE
    alpha: float = 0.0

    def __call__(self, N: int) -> float:
        if self.kind is NormalizerKind.SQRT_LOG_N:
            return math.sqrt(math.log(N))
        if self.kind is NormalizerKind.INV_SQRT_LOG_N:
            return 1.0 / math.sqrt(math.log(N))
        if self.kind is NormalizerKind.N_POW:
            return float(N) ** self.alpha
        if self.kind is NormalizerKind.N_LOG_N_POW:
            return (N * math.log(N)) ** self.alpha
        return 1.0

    @classmethod
    def parse(cls, text: str) -> Normalizer:
        name, _, rest = text.strip().partition("(")
        try:
            kind = NormalizerKind(name.strip())
        except ValueError as e:
            choices = ", ".join(k.value for k in NormalizerKind)
            msg = f"unknown normalizer {text!r}, expected one of {choices}"
            raise DomainError(msg) from e
        has_alpha = kind in (NormalizerKind.N_POW, NormalizerKind.N_LOG_N_POW)
        if has_alpha != bool(rest):
            msg = f"normalizer {kind.value} {'needs' if has_alpha else 'takes no'} alpha, provided {text!r}"
            raise DomainError(msg)
        if not has_alpha:
            return cls(kind)
        try:
            return cls(kind, float(rest.rstrip(")").strip()))
        except ValueError as e:
            msg = f"normalizer alpha must be a decimal, provided {text!r}"
            raise DomainError(msg) from e

    def __str__(self) -> str:
        if self.kind in (NormalizerKind.N_POW, NormalizerKind.N_LOG_N_POW):
            return f"{self.kind.value}({format_number(self.alpha)})"
        return self.kind.value


# --- plans and results --------------------------------------------------------
@dataclass(frozen=True, slots=True)
class SweepPlan:
    statistic: Statistic
    degrees: tuple[int, ...]
    samples: int
    seed: int = 0
    dimensions: tuple[int, ...] = (1,)
    normalizer: Normalizer = field(default_factory=Normalizer)
    random: RandomSpec | None = None  # seed is taken from the plan
    kind: BasisKind | None = None  # None: real-1d for d = 1, real-tensor above
    quad: QuadConfig = DEFAULT_QUAD
    max_band: float | None = None
    max_abs_slope: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "degrees", tuple(self.degrees))
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if len(self.degrees) < MIN_SLOPE_DEGREES:
            msg = f"≥{MIN_SLOPE_DEGREES} degrees required for slope, provided {list(self.degrees)}"
            raise DomainError(msg)
        if any(n < 1 for n in self.degrees) or any(
            a >= b for a, b in zip(self.degrees, self.degrees[1:], strict=False)
        ):
            msg = f"degrees must be ascending positive integers, provided {list(self.degrees)}"
            raise DomainError(msg)
        if not self.dimensions or any(d < 1 for d in self.dimensions):
            msg = f"dimensions must be positive integers, provided {list(self.dimensions)}"
            raise DomainError(msg)

    @property
    def random_spec(self) -> RandomSpec:
        if self.random is None:
            return RandomSpec(seed=self.seed)
        return RandomSpec(self.random.law, self.random.sigma, self.seed)


@dataclass(frozen=True, slots=True)
class SweepRow:
    d: int
    n: int
    N: int
    estimate: MCEstimate
    normalized: float


@dataclass(frozen=True, slots=True)
class SlopeFit:
    """Least-squares line through (ln N, ln y); residual is the RMS misfit."""

    slope: float
    intercept: float
    residual: float


def fit_slope(sizes: Sequence[int], values: Sequence[float]) -> SlopeFit:
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.asarray(values, dtype=np.float64)
    if np.unique(x).size < 2 or np.any(y <= 0):
        return SlopeFit(math.nan, math.nan, math.nan)
    y = np.log(y)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return SlopeFit(float(slope), float(intercept), residual)


def band_ratio(values: Sequence[float]) -> float:
    """max / min, or inf when a value is not positive."""
    low = min(values)
    if low <= 0:
        return math.inf
    return max(values) / low


@dataclass(frozen=True, slots=True)
class SweepResult:
    plan: SweepPlan
    rows: tuple[SweepRow, ...]
    band: float
    fit: SlopeFit

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def passed(self) -> bool | None:
        """None when the plan states no expectation."""
        if self.plan.max_band is None and self.plan.max_abs_slope is None:
            return None
        ok = True
        if self.plan.max_band is not None:
            ok = ok and self.band <= self.plan.max_band
        if self.plan.max_abs_slope is not None:
            ok = ok and abs(self.slope) <= self.plan.max_abs_slope
        return ok


def _point_runner(
    workers: int | None, middleware: tuple[Middleware, ...]
) -> PointRunner:
    runner: PointRunner = partial(run_estimator, workers=workers)
    return reduce(lambda h, m: m(h), reversed(middleware), runner)


def _run_point(
    runner: PointRunner,
    statistic: Statistic,
    d: int,
    n: int,
    *,
    random: RandomSpec,
    samples: int,
    kind: BasisKind | None,
    quad: QuadConfig,
) -> tuple[int, MCEstimate]:
    token = None
    try:
        basis = default_basis(d, n, kind)
        token = sweep_point.set(SweepPoint(d, n, basis.size))
        task = EstimatorTask(basis, random, statistic, samples, quad)
        return basis.size, runner(task)
    except Exception as e:
        raise SweepPointError(d, n, e) from e
    finally:
        if token is not None:
            sweep_point.reset(token)


def _run_points(
    runner: PointRunner,
    statistic: Statistic,
    pairs: Sequence[tuple[int, int]],
    *,
    random: RandomSpec,
    samples: int,
    kind: BasisKind | None,
    quad: QuadConfig,
    point_workers: int | None,
) -> list[tuple[int, MCEstimate]]:
    """Runs every (d, n) point; results come back in the order of pairs.

    With point_workers != 1 the points run on a thread pool, each inside a
    copy of the caller's context so context variables reach the middleware.
    """
    run = partial(
        _run_point, runner, statistic, random=random, samples=samples, kind=kind, quad=quad
    )
    if point_workers == 1 or len(pairs) < 2:
        return [run(d, n) for d, n in pairs]
    with ThreadPoolExecutor(max_workers=point_workers) as pool:
        futures = [pool.submit(copy_context().run, run, d, n) for d, n in pairs]
        # the first failing point in (d, n) order is the one raised
        return [future.result() for future in futures]


def run_sweep(
    plan: SweepPlan,
    *,
    workers: int | None = None,
    point_workers: int | None = 1,
    middleware: tuple[Middleware, ...] = (),
) -> SweepResult:
    """Estimates at every (d, n), normalizes by g(N), fits band and log-log slope.

    workers parallelises the samples of one point, point_workers the points
    themselves. Neither changes the result.
    """
    start = time.perf_counter()
    runner = _point_runner(workers, middleware)
    pairs = [(d, n) for d in plan.dimensions for n in plan.degrees]
    outcomes = _run_points(
        runner,
        plan.statistic,
        pairs,
        random=plan.random_spec,
        samples=plan.samples,
        kind=plan.kind,
        quad=plan.quad,
        point_workers=point_workers,
    )
    rows = [
        SweepRow(d, n, size, estimate, estimate.mean / plan.normalizer(size))
        for (d, n), (size, estimate) in zip(pairs, outcomes, strict=True)
    ]
    rows.sort(key=lambda row: (row.N, row.d))
    result = SweepResult(
        plan=plan,
        rows=tuple(rows),
        band=band_ratio([row.normalized for row in rows]),
        fit=fit_slope([row.N for row in rows], [row.estimate.mean for row in rows]),
    )
    logger.info(
        "sweep: %s normalizer=%s points=%d band=%.4g slope=%.4g %.1fms",
        plan.statistic,
        plan.normalizer,
        len(rows),
        result.band,
        result.slope,
        (time.perf_counter() - start) * 1000,
    )
    return result


# --- worst-case probe ---------------------------------------------------------
@dataclass(frozen=True, slots=True)
class ProbeRow:
    n: int
    N: int
    factor: float


@dataclass(frozen=True, slots=True)
class ProbeResult:
    p: NormSpec
    q: NormSpec
    dimension: int
    rows: tuple[ProbeRow, ...]
    fit: SlopeFit

    @property
    def target(self) -> float:
        """Worst-case exponent (1/p - 1/q)_+ in N."""
        return max(1.0 / self.p.exponent - 1.0 / self.q.exponent, 0.0)

    @property
    def slope(self) -> float:
        return self.fit.slope


def worst_case_probe(
    p: NormSpec,
    q: NormSpec,
    degrees: Sequence[int],
    *,
    dimension: int = 1,
    quad: QuadConfig = DEFAULT_QUAD,
) -> ProbeResult:
    """Nikolskii factor |F_n|_q / |F_n|_p of the Fejer kernel at each degree."""
    if len(degrees) < MIN_SLOPE_DEGREES:
        msg = f"≥{MIN_SLOPE_DEGREES} degrees required for slope, provided {list(degrees)}"
        raise DomainError(msg)
    rows = []
    for n in degrees:
        kernel = fejer_poly(n, dimension)
        factor = norm(kernel, q, quad).value / norm(kernel, p, quad).value
        rows.append(ProbeRow(n, kernel.basis.size, factor))
    fit = fit_slope([r.N for r in rows], [r.factor for r in rows])
    logger.debug("probe: p=%s q=%s d=%d slope=%.4g", p, q, dimension, fit.slope)
    return ProbeResult(p, q, dimension, tuple(rows), fit)


# --- equal N across dimensions ------------------------------------------------
def factorizations(N: int) -> list[tuple[int, int]]:
    """Every (d, n) with n >= 1 and (2n+1)^d = N.

    >>> factorizations(81)
    [(1, 40), (2, 4), (4, 1)]
    """
    found = []
    d = 1
    while 3**d <= N:
        root = round(N ** (1.0 / d))
        for side in (root - 1, root, root + 1):
            if side >= 3 and side % 2 == 1 and side**d == N:
                found.append((d, (side - 1) // 2))
        d += 1
    return found


@dataclass(frozen=True, slots=True)
class MatchPlan:
    """Plan-file form of a dimension_match run."""

    statistic: Statistic
    N: int
    samples: int
    seed: int = 0
    random: RandomSpec | None = None
    kind: BasisKind | None = None
    quad: QuadConfig = DEFAULT_QUAD
    max_ratio: float | None = None

    def __post_init__(self) -> None:
        if self.samples < 2:
            msg = f"need at least 2 samples for a variance, provided {self.samples=}"
            raise DomainError(msg)

    @property
    def random_spec(self) -> RandomSpec:
        if self.random is None:
            return RandomSpec(seed=self.seed)
        return RandomSpec(self.random.law, self.random.sigma, self.seed)


@dataclass(frozen=True, slots=True)
class DimensionMatch:
    statistic: Statistic
    N: int
    rows: tuple[SweepRow, ...]

    @property
    def ratio(self) -> float:
        return band_ratio([row.estimate.mean for row in self.rows])


def dimension_match(
    statistic: Statistic,
    N_target: int,
    samples: int,
    seed: int,
    *,
    random: RandomSpec | None = None,
    kind: BasisKind | None = None,
    quad: QuadConfig = DEFAULT_QUAD,
    workers: int | None = None,
    point_workers: int | None = 1,
    middleware: tuple[Middleware, ...] = (),
) -> DimensionMatch:
    """Runs statistic at N_target for every dimension that admits it."""
    pairs = factorizations(N_target)
    if len(pairs) < 2:
        msg = f"N={N_target} is not (2n+1)^d for two or more d, found {pairs}"
        raise DomainError(msg)
    law_spec = RandomSpec(seed=seed) if random is None else RandomSpec(random.law, random.sigma, seed)
    runner = _point_runner(workers, middleware)
    outcomes = _run_points(
        runner,
        statistic,
        pairs,
        random=law_spec,
        samples=samples,
        kind=kind,
        quad=quad,
        point_workers=point_workers,
    )
    rows = [
        SweepRow(d, n, size, estimate, estimate.mean)
        for (d, n), (size, estimate) in zip(pairs, outcomes, strict=True)
    ]
    result = DimensionMatch(statistic, N_target, tuple(rows))
    logger.info(
        "dimension match: %s N=%d dims=%s ratio=%.4g",
        statistic,
        N_target,
        [d for d, _ in pairs],
        result.ratio,
    )
    return result
