"""Human-readable tables for sweeps, probes, dimension matches and identity checks.

Plain output is column aligned for terminals:

    d     n      N   mean      stderr      normalized
    1     8     17   1.1864    0.0031      1.1864
    1    16     33   1.1921    0.0029      1.1921
    ...

    band 1.0079   slope 0.0031 (residual 0.0012)

With markdown=True the same rows are rendered as a Markdown table.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .estimators import IdentityReport, SigmaReport
    from .sweep import DimensionMatch, ProbeResult, SweepResult


def _g(x: float) -> str:
    return f"{x:.6g}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]], *, markdown: bool) -> list[str]:
    if markdown:
        lines = [
            "| " + " | ".join(headers) + " |",
            "| " + " | ".join("---:" for _ in headers) + " |",
        ]
        lines.extend("| " + " | ".join(row) + " |" for row in rows)
        return lines
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    lines = ["   ".join(f"{h:>{w}}" for h, w in zip(headers, widths, strict=True))]
    lines.extend(
        "   ".join(f"{cell:>{w}}" for cell, w in zip(row, widths, strict=True))
        for row in rows
    )
    return lines


def _verdict(*, passed: bool | None) -> str:
    if passed is None:
        return ""
    return "PASS" if passed else "FAIL"


def format_sweep(result: SweepResult, *, markdown: bool = False) -> str:
    plan = result.plan
    title = f"{plan.statistic} / {plan.normalizer}, {plan.samples} samples, seed {plan.seed}"
    rows = [
        [
            str(row.d),
            str(row.n),
            str(row.N),
            _g(row.estimate.mean),
            _g(row.estimate.stderr),
            str(row.estimate.rejected),
            _g(row.normalized),
        ]
        for row in result.rows
    ]
    headers = ("d", "n", "N", "mean", "stderr", "rejected", "normalized")
    summary = (
        f"band {_g(result.band)}   slope {_g(result.slope)} "
        f"(residual {_g(result.fit.residual)})"
    )
    verdict = _verdict(passed=result.passed)
    if verdict:
        summary += f"   {verdict}"
    heading = f"### {title}" if markdown else title
    return "\n".join([heading, "", *_table(headers, rows, markdown=markdown), "", summary])


def format_probe(result: ProbeResult, *, markdown: bool = False) -> str:
    title = f"Fejer probe nikolskii(p={result.p},q={result.q}) d={result.dimension}"
    rows = [[str(r.n), str(r.N), _g(r.factor)] for r in result.rows]
    summary = f"slope {_g(result.slope)} (target {_g(result.target)}, residual {_g(result.fit.residual)})"
    heading = f"### {title}" if markdown else title
    return "\n".join(
        [heading, "", *_table(("n", "N", "factor"), rows, markdown=markdown), "", summary]
    )


def format_dimension_match(
    result: DimensionMatch, *, max_ratio: float | None = None, markdown: bool = False
) -> str:
    title = f"{result.statistic} at N={result.N}"
    rows = [
        [str(row.d), str(row.n), _g(row.estimate.mean), _g(row.estimate.stderr)]
        for row in result.rows
    ]
    summary = f"max/min ratio {_g(result.ratio)}"
    if max_ratio is not None:
        summary += f"   {_verdict(passed=result.ratio <= max_ratio)}"
    heading = f"### {title}" if markdown else title
    return "\n".join(
        [heading, "", *_table(("d", "n", "mean", "stderr"), rows, markdown=markdown), "", summary]
    )


def format_identity(report: IdentityReport) -> str:
    mode = "closed form" if report.exact else f"{report.lhs.samples} samples"
    return (
        f"lhs {_g(report.lhs.mean)} "
        f"rhs {_g(report.rhs.mean)} diff {report.difference:.3g} "
        f"(stderr {report.stderr:.3g}, {mode})"
    )


def format_sigma(report: SigmaReport) -> str:
    sigmas = ", ".join(_g(s) for s in report.sigmas)
    return (
        f"sigmas [{sigmas}]: "
        f"mean {_g(report.estimates[0].mean)} bitwise={report.bitwise_equal} "
        f"scaling deviation {report.scaling_deviation:.3g}"
    )
