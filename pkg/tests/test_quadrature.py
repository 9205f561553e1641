import math

import numpy as np
import pytest
from conftest import LOOSE_QUAD, random_poly, shifted_cosine
from hypothesis import given, settings
from hypothesis import strategies as st

from nikave.errors import DomainError
from nikave.poly import BasisKind, BasisSpec, GridSpec, TrigPoly, evaluate, make_poly
from nikave.quadrature import (
    L1,
    L2,
    SUP,
    NormMethod,
    NormSpec,
    QuadConfig,
    axis_points_cap,
    format_number,
    norm,
    norm_l2_parseval,
    rectangle_norm,
    sup_norm,
)
from nikave.sampling import grid_samples


# --- exponents -----------------------------------------------------------------
class TestNormSpec:
    @pytest.mark.parametrize(
        ("text", "exponent"),
        [("inf", math.inf), ("INF", math.inf), (" Inf ", math.inf), ("1.5", 1.5), ("3", 3.0)],
    )
    def test_parse(self, text: str, exponent: float) -> None:
        assert NormSpec.parse(text).exponent == exponent

    @pytest.mark.parametrize("text", ["0.5", "-1", "abc", "nan", ""])
    def test_parse_rejects(self, text: str) -> None:
        with pytest.raises(DomainError):
            NormSpec.parse(text)

    def test_str_round_trips(self) -> None:
        for spec in (L1, L2, SUP, NormSpec(1.5), NormSpec(0.1 + 3)):
            assert NormSpec.parse(str(spec)) == spec
        assert str(SUP) == "inf"
        assert str(NormSpec(3.0)) == "3"

    def test_even_integer(self) -> None:
        assert NormSpec(4.0).is_even_integer
        assert L2.is_even_integer
        assert not NormSpec(3.0).is_even_integer
        assert not NormSpec(2.5).is_even_integer
        assert not SUP.is_even_integer


def test_format_number() -> None:
    assert format_number(1.25) == "1.25"
    assert format_number(1 / 3) == repr(1 / 3)
    assert format_number(-math.inf) == "-inf"


def test_quad_config_validation() -> None:
    with pytest.raises(DomainError, match="oversample"):
        QuadConfig(oversample=0)
    with pytest.raises(DomainError, match="rel_tol"):
        QuadConfig(rel_tol=0.0)
    with pytest.raises(DomainError, match="max_doublings"):
        QuadConfig(max_doublings=-1)
    with pytest.raises(DomainError, match="max_grid_points"):
        QuadConfig(max_grid_points=0)


# --- finite p ------------------------------------------------------------------
@settings(max_examples=30, deadline=None)
@given(
    degree=st.integers(1, 12),
    dimension=st.integers(1, 2),
    seed=st.integers(0, 2**32 - 1),
)
def test_parseval_matches_quadrature(degree: int, dimension: int, seed: int) -> None:
    poly = random_poly(BasisSpec(dimension, degree, BasisKind.REAL_TENSOR), seed)
    parseval = norm(poly, L2)
    assert parseval.method is NormMethod.PARSEVAL
    assert parseval.value == pytest.approx(float(np.linalg.norm(poly.coeffs)), rel=1e-15)
    on_grid = rectangle_norm(poly, 2.0, 2 * degree + 1)
    assert on_grid == pytest.approx(parseval.value, rel=1e-12)


def test_parseval_complex_basis() -> None:
    poly = random_poly(BasisSpec(2, 2, BasisKind.COMPLEX_EXP), seed=4)
    assert norm_l2_parseval(poly) == pytest.approx(rectangle_norm(poly, 2.0, 5), rel=1e-12)


@pytest.mark.parametrize("p", [4.0, 6.0])
def test_even_exponent_is_exact(p: float) -> None:
    poly = random_poly(BasisSpec(1, 9), seed=2)
    exact = norm(poly, NormSpec(p))
    assert exact.method is NormMethod.EXACT_RECTANGLE
    assert exact.error_estimate == 0.0
    assert exact.value == pytest.approx(rectangle_norm(poly, p, 64 * 19), rel=1e-12)


def test_l1_of_cosine() -> None:
    # |cos x| has a kink, so the rectangle rule converges like M^-2
    value = norm(shifted_cosine(0.0), L1)
    assert value.method is NormMethod.ADAPTIVE_RECTANGLE
    assert value.value == pytest.approx(2 / math.pi, rel=1e-5)


def test_adaptive_rule_reports_change() -> None:
    poly = random_poly(BasisSpec(1, 6), seed=9)
    loose = norm(poly, NormSpec(3.0), QuadConfig(oversample=2, max_doublings=0))
    assert math.isinf(loose.error_estimate)
    tight = norm(poly, NormSpec(3.0))
    assert tight.error_estimate < 1e-6
    assert loose.value == pytest.approx(tight.value, rel=1e-2)


@pytest.mark.parametrize(
    ("budget", "dimension", "cap"), [(2**22, 4, 45), (2**22, 1, 2**22), (100, 2, 10), (1, 3, 1)]
)
def test_axis_points_cap(budget: int, dimension: int, cap: int) -> None:
    assert axis_points_cap(QuadConfig(max_grid_points=budget), dimension) == cap


def test_four_dimensional_l1_stays_within_grid_budget() -> None:
    poly = random_poly(BasisSpec(4, 1, BasisKind.REAL_TENSOR), seed=5)
    value = norm(poly, L1)
    assert value.method is NormMethod.ADAPTIVE_RECTANGLE
    assert math.isfinite(value.error_estimate)
    assert value.error_estimate < 5e-2
    assert 0.0 < value.value <= norm_l2_parseval(poly)


def test_adaptive_rule_never_exceeds_grid_budget(monkeypatch: pytest.MonkeyPatch) -> None:
    seen: list[int] = []

    def recording(poly: TrigPoly, p: float, points: int) -> float:
        seen.append(points)
        return rectangle_norm(poly, p, points)

    monkeypatch.setattr("nikave.quadrature.rectangle_norm", recording)
    poly = random_poly(BasisSpec(2, 1, BasisKind.REAL_TENSOR), seed=6)
    value = norm(poly, NormSpec(3.0), QuadConfig(max_grid_points=100))
    assert seen == [10, 5]
    assert math.isfinite(value.error_estimate)


def test_sup_norm_grid_respects_budget() -> None:
    axis = shifted_cosine(0.7).coeffs
    poly = TrigPoly(
        BasisSpec(2, 1, BasisKind.REAL_TENSOR), np.multiply.outer(axis, axis).ravel()
    )
    value = sup_norm(poly, QuadConfig(max_grid_points=20**2))
    assert value.value == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("spec", [L1, NormSpec(1.5), L2, NormSpec(3.0), NormSpec(4.0), SUP])
def test_constant_polynomial(spec: NormSpec) -> None:
    poly = make_poly(BasisSpec(1, 0), [-2.5])
    assert norm(poly, spec).value == 2.5


def test_rectangle_rule_domain() -> None:
    poly = random_poly(BasisSpec(1, 2))
    with pytest.raises(DomainError):
        rectangle_norm(poly, math.inf, 16)
    with pytest.raises(DomainError):
        rectangle_norm(poly, 0.5, 16)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), degree=st.integers(1, 10))
def test_norms_increase_with_exponent(seed: int, degree: int) -> None:
    poly = random_poly(BasisSpec(1, degree), seed)
    exponents = (L1, NormSpec(1.5), L2, NormSpec(3.0), NormSpec(4.0), SUP)
    values = [norm(poly, spec, LOOSE_QUAD).value for spec in exponents]
    for low, high in zip(values, values[1:], strict=False):
        assert low <= high * (1 + 1e-8)


def test_homogeneity() -> None:
    poly = random_poly(BasisSpec(1, 5), seed=11)
    for spec in (L1, NormSpec(3.0), SUP):
        base = norm(poly, spec, LOOSE_QUAD).value
        scaled = norm(poly.scaled(-7.0), spec, LOOSE_QUAD).value
        assert scaled == pytest.approx(7.0 * base, rel=1e-9)


# --- sup norm ------------------------------------------------------------------
@pytest.mark.parametrize("shift", [0.0, 0.3, 1.234, 4.0])
def test_sup_of_shifted_cosine(shift: float) -> None:
    value = sup_norm(shifted_cosine(shift))
    assert value.method is NormMethod.GRID_MAX_REFINED
    assert value.value == pytest.approx(1.0, abs=1e-10)
    assert value.error_estimate >= 0.0


def test_sup_of_tensor_product() -> None:
    axis = shifted_cosine(0.7).coeffs
    poly = TrigPoly(
        BasisSpec(2, 1, BasisKind.REAL_TENSOR), np.multiply.outer(axis, axis).ravel()
    )
    assert sup_norm(poly).value == pytest.approx(1.0, abs=1e-9)


def test_sup_dominates_dense_grid() -> None:
    poly = random_poly(BasisSpec(1, 12), seed=5)
    dense = np.abs(evaluate(poly, GridSpec(1, 8192))).max()
    value = sup_norm(poly).value
    assert value >= dense - 1e-12
    assert value == pytest.approx(dense, rel=1e-6)


def test_sup_stable_under_oversampling() -> None:
    for seed in range(5):
        poly = random_poly(BasisSpec(1, 16), seed)
        coarse = sup_norm(poly, QuadConfig(oversample=16)).value
        fine = sup_norm(poly, QuadConfig(oversample=256)).value
        assert coarse == pytest.approx(fine, rel=1e-8)


def test_sup_complex_basis() -> None:
    poly = make_poly(BasisSpec(1, 2, BasisKind.COMPLEX_EXP), [0.0, 1.0, 0.0, 0.0, 0.0])
    assert sup_norm(poly).value == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    kind=st.sampled_from([BasisKind.REAL_1D, BasisKind.COMPLEX_EXP]),
    degree=st.integers(1, 12),
    seed=st.integers(0, 2**32 - 1),
)
def test_sup_between_grid_samples_and_reproducing_bound(
    kind: BasisKind, degree: int, seed: int
) -> None:
    poly = random_poly(BasisSpec(1, degree, kind), seed)
    root_n = math.sqrt(poly.basis.size)
    value = sup_norm(poly, LOOSE_QUAD).value
    assert value >= root_n * np.abs(grid_samples(poly)).max() * (1 - 1e-9)
    assert value <= root_n * norm_l2_parseval(poly) * (1 + 1e-9)
