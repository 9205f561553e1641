from nikave.estimators import IdentityReport, MCEstimate, Nikolskii, NormMoment, SigmaReport
from nikave.quadrature import L1, L2, SUP
from nikave.report import (
    format_dimension_match,
    format_identity,
    format_probe,
    format_sigma,
    format_sweep,
)
from nikave.sweep import (
    DimensionMatch,
    ProbeResult,
    ProbeRow,
    SlopeFit,
    SweepPlan,
    SweepResult,
    SweepRow,
)


def _estimate(mean: float, stderr: float = 0.01) -> MCEstimate:
    return MCEstimate(mean, stderr, (mean - 1.96 * stderr, mean + 1.96 * stderr), 100, 0)


def _sweep(*, max_band: float | None = None) -> SweepResult:
    plan = SweepPlan(Nikolskii(L1, L2), (1, 2, 3), 100, max_band=max_band)
    rows = tuple(
        SweepRow(1, n, 2 * n + 1, _estimate(1.2 + 0.01 * n), 1.2 + 0.01 * n) for n in (1, 2, 3)
    )
    return SweepResult(plan, rows, 1.23 / 1.21, SlopeFit(0.01, 0.18, 0.001))


# --- sweeps --------------------------------------------------------------------
def test_sweep_table() -> None:
    text = format_sweep(_sweep())
    lines = text.splitlines()
    assert lines[0] == "nikolskii(p=1,q=2) / one, 100 samples, seed 0"
    assert lines[2].split() == ["d", "n", "N", "mean", "stderr", "rejected", "normalized"]
    assert lines[3].split() == ["1", "1", "3", "1.21", "0.01", "0", "1.21"]
    assert lines[-1].startswith("band 1.01653   slope 0.01 (residual 0.001)")
    assert "PASS" not in text
    assert "FAIL" not in text


def test_sweep_columns_align() -> None:
    lines = format_sweep(_sweep()).splitlines()
    table = lines[2:6]
    assert len({len(line) for line in table}) == 1


def test_sweep_verdict() -> None:
    assert format_sweep(_sweep(max_band=1.5)).endswith("PASS")
    assert format_sweep(_sweep(max_band=1.001)).endswith("FAIL")


def test_sweep_markdown() -> None:
    lines = format_sweep(_sweep(), markdown=True).splitlines()
    assert lines[0].startswith("### nikolskii")
    assert lines[2] == "| d | n | N | mean | stderr | rejected | normalized |"
    assert lines[3] == "| ---: | ---: | ---: | ---: | ---: | ---: | ---: |"
    assert lines[4] == "| 1 | 1 | 3 | 1.21 | 0.01 | 0 | 1.21 |"


# --- probes and matches --------------------------------------------------------
def test_probe() -> None:
    rows = (ProbeRow(16, 33, 4.9), ProbeRow(32, 65, 6.9), ProbeRow(64, 129, 9.8))
    text = format_probe(ProbeResult(L2, SUP, 1, rows, SlopeFit(0.5, 0.1, 0.002)))
    lines = text.splitlines()
    assert lines[0] == "Fejer probe nikolskii(p=2,q=inf) d=1"
    assert lines[3].split() == ["16", "33", "4.9"]
    assert lines[-1] == "slope 0.5 (target 0.5, residual 0.002)"


def test_dimension_match() -> None:
    rows = (
        SweepRow(1, 40, 81, _estimate(81.0), 81.0),
        SweepRow(2, 4, 81, _estimate(80.0), 80.0),
    )
    result = DimensionMatch(NormMoment(L2, 2.0), 81, rows)
    text = format_dimension_match(result)
    assert text.splitlines()[0] == "norm_moment(q=2,s=2) at N=81"
    assert text.splitlines()[-1] == "max/min ratio 1.0125"
    assert format_dimension_match(result, max_ratio=1.5).endswith("PASS")
    assert format_dimension_match(result, max_ratio=1.01).endswith("FAIL")


# --- checks --------------------------------------------------------------------
def test_identity_closed_form() -> None:
    exact = MCEstimate.exact_value(0.5, 10, 0)
    report = IdentityReport("moment_ratio(q=2,k=2,l=2) N=17", exact, exact, 0.0, passed=True)
    assert format_identity(report) == "lhs 0.5 rhs 0.5 diff 0 (stderr 0, closed form)"


def test_identity_sampled() -> None:
    report = IdentityReport("x", _estimate(1.0), _estimate(1.02), 0.0141, passed=True)
    assert format_identity(report) == "lhs 1 rhs 1.02 diff -0.02 (stderr 0.0141, 100 samples)"


def test_sigma() -> None:
    estimate = _estimate(1.5)
    report = SigmaReport((1.0, 5.0), (estimate, estimate), bitwise_equal=True, scaling_deviation=0.0)
    assert format_sigma(report) == "sigmas [1, 5]: mean 1.5 bitwise=True scaling deviation 0"
