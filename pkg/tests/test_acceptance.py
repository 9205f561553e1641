"""End-to-end checks of the averaged Nikolskii factor regimes at full sample counts.

Deselected by default; run with: uv run pytest -m slow
"""

import math

import pytest
from conftest import COARSE_QUAD, LOOSE_QUAD

from nikave.estimators import (
    EstimatorTask,
    Nikolskii,
    NormMoment,
    RecipSupMoment,
    collect_norms,
    run_estimator,
    verify_moment_ratio_identity,
)
from nikave.oracles import expected_qq_norm
from nikave.poly import BasisKind, BasisSpec, fejer_poly
from nikave.quadrature import L1, L2, SUP, NormSpec, norm
from nikave.sampling import Law, RandomSpec
from nikave.suites import grid_covariance, identity_gap, whitening_gaps
from nikave.sweep import (
    DEFAULT_THRESHOLDS,
    Normalizer,
    NormalizerKind,
    SweepPlan,
    dimension_match,
    run_sweep,
    worst_case_probe,
)

pytestmark = pytest.mark.slow

L3 = NormSpec(3.0)
DEGREES = (8, 16, 32, 64, 128, 256)
SEED = 0x5EED


# --- exact moments -------------------------------------------------------------
def test_squared_l2_mean_is_N() -> None:
    task = EstimatorTask(BasisSpec(1, 16), RandomSpec(seed=SEED), NormMoment(L2, 2.0), 10_000)
    estimate = run_estimator(task)
    assert abs(estimate.mean - 33) <= 3 * estimate.stderr


def test_fourth_moment_matches_closed_form() -> None:
    task = EstimatorTask(
        BasisSpec(1, 2), RandomSpec(seed=SEED), NormMoment(NormSpec(4.0), 4.0), 10_000
    )
    estimate = run_estimator(task)
    assert abs(estimate.mean - expected_qq_norm(4.0, 5)) <= 3 * estimate.stderr


@pytest.mark.parametrize("n", [8, 16])
@pytest.mark.parametrize(("q", "k", "ell"), [(1.0, 1, 1), (4.0, 2, 2), (3.0, 1, 2)])
def test_moment_ratio_identity(n: int, q: float, k: int, ell: int) -> None:
    report = verify_moment_ratio_identity(
        NormSpec(q), k, ell, BasisSpec(1, n), 10_000, SEED, quad=LOOSE_QUAD
    )
    assert report.passed, report


def test_moment_ratio_identity_closed_form_with_few_samples() -> None:
    report = verify_moment_ratio_identity(L2, 3, 2, BasisSpec(1, 16), 10, SEED)
    assert report.exact
    assert report.difference == pytest.approx(0.0, abs=1e-10 * report.lhs.mean)


def test_reciprocal_sup_moment_band() -> None:
    task = EstimatorTask(BasisSpec(1, 16), RandomSpec(seed=SEED), RecipSupMoment(2.0), 10_000)
    scaled = run_estimator(task).mean * 33 * math.log(33)
    assert 0.2 <= scaled <= 2.5


def test_rademacher_factor_is_bounded() -> None:
    task = EstimatorTask(
        BasisSpec(1, 16), RandomSpec(Law.RADEMACHER, seed=SEED), Nikolskii(L1, L3), 2000, LOOSE_QUAD
    )
    assert 0.5 <= run_estimator(task).mean <= 2.0


@pytest.mark.parametrize("n", [8, 32])
def test_norm_moments_are_equivalent(n: int) -> None:
    exponents = (1, 2, 3, 4)
    specs = tuple(NormSpec(float(q)) for q in exponents)
    norms = collect_norms(BasisSpec(1, n), RandomSpec(seed=SEED), specs, 2000, LOOSE_QUAD)
    draws = [d for d in norms if d is not None]
    for spec in specs:
        base = math.fsum(d[spec] ** spec.exponent for d in draws) / len(draws)
        for s in exponents:
            moment = math.fsum(d[spec] ** s for d in draws) / len(draws)
            assert 0.3 <= moment ** (1 / s) / base ** (1 / spec.exponent) <= 3.0


def test_grid_samples_are_white_at_degree_eight() -> None:
    samples = 10_000
    cov = grid_covariance(BasisSpec(1, 8), samples)
    diag, off = whitening_gaps(cov)
    assert identity_gap(cov) <= 5 / math.sqrt(samples)
    assert diag <= 0.1
    assert off <= 5 / math.sqrt(samples)


# --- one-dimensional regimes ---------------------------------------------------
def test_finite_exponents_are_flat() -> None:
    result = run_sweep(SweepPlan(Nikolskii(L1, L3), DEGREES, 2000, SEED, quad=LOOSE_QUAD))
    assert result.band <= DEFAULT_THRESHOLDS.flat_band
    assert abs(result.slope) <= DEFAULT_THRESHOLDS.flat_slope


@pytest.mark.parametrize(
    ("statistic", "normalizer"),
    [
        (Nikolskii(L2, SUP), Normalizer(NormalizerKind.SQRT_LOG_N)),
        (Nikolskii(SUP, L2), Normalizer(NormalizerKind.INV_SQRT_LOG_N)),
        (NormMoment(SUP, 1.0), Normalizer(NormalizerKind.N_LOG_N_POW, 0.5)),
    ],
)
def test_logarithmic_regimes(statistic: Nikolskii | NormMoment, normalizer: Normalizer) -> None:
    plan = SweepPlan(statistic, DEGREES, 2000, SEED, normalizer=normalizer, quad=LOOSE_QUAD)
    assert run_sweep(plan).band <= DEFAULT_THRESHOLDS.log_band


def test_reciprocal_sup_regime() -> None:
    plan = SweepPlan(
        RecipSupMoment(2.0),
        DEGREES,
        2000,
        SEED,
        normalizer=Normalizer(NormalizerKind.N_LOG_N_POW, -1.0),
        quad=LOOSE_QUAD,
    )
    assert run_sweep(plan).band <= DEFAULT_THRESHOLDS.recip_band


# --- dimensions ----------------------------------------------------------------
def test_factor_does_not_depend_on_dimension() -> None:
    match = dimension_match(
        Nikolskii(L1, L3), 81, 2000, SEED, kind=BasisKind.REAL_TENSOR, quad=COARSE_QUAD
    )
    assert match.ratio <= DEFAULT_THRESHOLDS.dimension_band


@pytest.mark.parametrize(
    ("statistic", "normalizer", "band"),
    [
        (
            NormMoment(SUP, 1.0),
            Normalizer(NormalizerKind.N_LOG_N_POW, 0.5),
            DEFAULT_THRESHOLDS.log_band,
        ),
        (
            RecipSupMoment(2.0),
            Normalizer(NormalizerKind.N_LOG_N_POW, -1.0),
            DEFAULT_THRESHOLDS.recip_band,
        ),
    ],
)
def test_sup_regimes_in_two_dimensions(
    statistic: NormMoment | RecipSupMoment, normalizer: Normalizer, band: float
) -> None:
    plan = SweepPlan(
        statistic,
        (2, 4, 8, 16),
        2000,
        SEED,
        normalizer=normalizer,
        dimensions=(2,),
        quad=LOOSE_QUAD,
    )
    assert run_sweep(plan).band <= band


def test_squared_l2_at_matched_size() -> None:
    match = dimension_match(NormMoment(L2, 2.0), 81, 2000, SEED)
    for row in match.rows:
        assert abs(row.estimate.mean - 81) <= 3 * row.estimate.stderr


# --- worst case ----------------------------------------------------------------
@pytest.mark.parametrize(("p", "q"), [(L1, L2), (L2, SUP)])
def test_fejer_probe_slope(p: NormSpec, q: NormSpec) -> None:
    low, high = DEFAULT_THRESHOLDS.probe_slope
    result = worst_case_probe(p, q, (16, 32, 64, 128, 256, 512))
    assert low <= result.slope <= high


def test_fejer_probe_reverse_exponents_stay_below_one() -> None:
    result = worst_case_probe(L2, L1, (16, 32, 64))
    assert all(row.factor <= 1.0 for row in result.rows)


def test_fejer_kernel_separates_from_random_average() -> None:
    kernel = fejer_poly(256)
    probe = norm(kernel, L3, LOOSE_QUAD).value / norm(kernel, L1, LOOSE_QUAD).value
    task = EstimatorTask(BasisSpec(1, 256), RandomSpec(seed=SEED), Nikolskii(L1, L3), 200, LOOSE_QUAD)
    assert probe >= DEFAULT_THRESHOLDS.separation * run_estimator(task).mean
