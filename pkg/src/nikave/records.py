"""CSV and JSON records of estimates, sweeps, plans and polynomials.

Floats are written with 17 significant digits and infinities as "inf", so
every record parses back to the same doubles.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from .errors import BasisError, DomainError, NikaveError
from .estimators import MCEstimate, parse_statistic
from .poly import BasisKind, BasisSpec, TrigPoly, default_basis
from .quadrature import DEFAULT_QUAD, QuadConfig
from .sampling import Law, RandomSpec, parse_seed
from .sweep import MatchPlan, Normalizer, SlopeFit, SweepPlan, SweepResult, SweepRow

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping
    from typing import TextIO

    from .estimators import Statistic
    from .quadrature import NormSpec
    from .sweep import DimensionMatch

CSV_HEADER = (
    "seed",
    "law",
    "sigma",
    "d",
    "n",
    "N",
    "p",
    "q",
    "statistic",
    "samples",
    "rejected",
    "mean",
    "stderr",
    "ci_lo",
    "ci_hi",
)


def format_float(x: float) -> str:
    """17 significant digits, or inf / -inf / nan.

    >>> format_float(1.0)
    '1.0000000000000000'
    >>> format_float(float("inf"))
    'inf'
    """
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, "#.17g")


def _format_exponent(spec: NormSpec | None) -> str:
    if spec is None:
        return ""
    return format_float(spec.exponent)


def _json_float(x: float) -> float | str:
    return x if math.isfinite(x) else format_float(x)


@dataclass(frozen=True, slots=True)
class EstimateRecord:
    """One estimate together with the point it was taken at."""

    basis: BasisSpec
    random: RandomSpec
    statistic: Statistic
    estimate: MCEstimate

    def csv_row(self) -> list[str]:
        e = self.estimate
        return [
            str(self.random.seed),
            self.random.law.value,
            format_float(self.random.sigma),
            str(self.basis.dimension),
            str(self.basis.degree),
            str(self.basis.size),
            _format_exponent(self.statistic.denominator),
            _format_exponent(self.statistic.numerator),
            str(self.statistic),
            str(e.samples),
            str(e.rejected),
            format_float(e.mean),
            format_float(e.stderr),
            format_float(e.ci95[0]),
            format_float(e.ci95[1]),
        ]


def write_csv(records: Iterable[EstimateRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(record.csv_row() for record in records)


def sweep_records(result: SweepResult) -> list[EstimateRecord]:
    plan = result.plan
    return [
        EstimateRecord(
            default_basis(row.d, row.n, plan.kind),
            plan.random_spec,
            plan.statistic,
            row.estimate,
        )
        for row in result.rows
    ]


# --- JSON ---------------------------------------------------------------------
def _check_keys(kind: str, data: Mapping[str, Any], allowed: Iterable[str]) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        msg = f"unknown {kind} keys: {', '.join(sorted(unknown))}"
        raise DomainError(msg)


def _require(kind: str, data: Mapping[str, Any], key: str) -> Any:
    try:
        return data[key]
    except KeyError as e:
        msg = f"{kind} is missing required key {key!r}"
        raise DomainError(msg) from e


def basis_to_dict(basis: BasisSpec) -> dict[str, Any]:
    return {"dimension": basis.dimension, "degree": basis.degree, "kind": basis.kind.value}


def basis_from_dict(data: Mapping[str, Any]) -> BasisSpec:
    _check_keys("basis", data, ("dimension", "degree", "kind"))
    return BasisSpec(
        dimension=int(_require("basis", data, "dimension")),
        degree=int(_require("basis", data, "degree")),
        kind=parse_basis_kind(_require("basis", data, "kind")),
    )


def parse_basis_kind(text: str) -> BasisKind:
    try:
        return BasisKind(text)
    except ValueError as e:
        choices = ", ".join(k.value for k in BasisKind)
        msg = f"unknown basis kind {text!r}, expected one of {choices}"
        raise BasisError(msg) from e


def parse_law(text: str) -> Law:
    try:
        return Law(text)
    except ValueError as e:
        msg = f"unknown law {text!r}, expected gaussian or rademacher"
        raise DomainError(msg) from e


def _estimate_fields(estimate: MCEstimate) -> dict[str, Any]:
    return {
        "samples": estimate.samples,
        "rejected": estimate.rejected,
        "mean": _json_float(estimate.mean),
        "stderr": _json_float(estimate.stderr),
        "ci_lo": _json_float(estimate.ci95[0]),
        "ci_hi": _json_float(estimate.ci95[1]),
        "exact": estimate.exact,
    }


def _estimate_from_fields(data: Mapping[str, Any], seed: int) -> MCEstimate:
    return MCEstimate(
        mean=float(data["mean"]),
        stderr=float(data["stderr"]),
        ci95=(float(data["ci_lo"]), float(data["ci_hi"])),
        samples=int(data["samples"]),
        seed=seed,
        rejected=int(data["rejected"]),
        exact=bool(data.get("exact", False)),
    )


def estimate_to_dict(record: EstimateRecord) -> dict[str, Any]:
    return {
        "seed": record.random.seed,
        "law": record.random.law.value,
        "sigma": record.random.sigma,
        "basis": basis_to_dict(record.basis),
        "statistic": str(record.statistic),
        **_estimate_fields(record.estimate),
    }


_ESTIMATE_KEYS = (
    "seed",
    "law",
    "sigma",
    "basis",
    "statistic",
    "samples",
    "rejected",
    "mean",
    "stderr",
    "ci_lo",
    "ci_hi",
    "exact",
)


def estimate_from_dict(data: Mapping[str, Any]) -> EstimateRecord:
    _check_keys("estimate", data, _ESTIMATE_KEYS)
    seed = parse_seed(data["seed"])
    return EstimateRecord(
        basis=basis_from_dict(data["basis"]),
        random=RandomSpec(parse_law(data["law"]), float(data["sigma"]), seed),
        statistic=parse_statistic(data["statistic"]),
        estimate=_estimate_from_fields(data, seed),
    )


def quad_to_dict(quad: QuadConfig) -> dict[str, Any]:
    return {
        "oversample": quad.oversample,
        "rel_tol": quad.rel_tol,
        "max_doublings": quad.max_doublings,
        "max_grid_points": quad.max_grid_points,
    }


def quad_from_dict(data: Mapping[str, Any]) -> QuadConfig:
    _check_keys("quad", data, ("oversample", "rel_tol", "max_doublings", "max_grid_points"))
    return QuadConfig(
        oversample=int(data.get("oversample", DEFAULT_QUAD.oversample)),
        rel_tol=float(data.get("rel_tol", DEFAULT_QUAD.rel_tol)),
        max_doublings=int(data.get("max_doublings", DEFAULT_QUAD.max_doublings)),
        max_grid_points=int(data.get("max_grid_points", DEFAULT_QUAD.max_grid_points)),
    )


def plan_to_dict(plan: SweepPlan | MatchPlan) -> dict[str, Any]:
    random = plan.random or RandomSpec()
    data: dict[str, Any] = {"statistic": str(plan.statistic)}
    if isinstance(plan, SweepPlan):
        data |= {
            "type": "sweep",
            "degrees": list(plan.degrees),
            "dimensions": list(plan.dimensions),
            "normalizer": str(plan.normalizer),
        }
    else:
        data |= {"type": "dimension_match", "N": plan.N}
    data |= {
        "samples": plan.samples,
        "seed": plan.seed,
        "law": random.law.value,
        "sigma": random.sigma,
        "quad": quad_to_dict(plan.quad),
    }
    if plan.kind is not None:
        data["basis"] = plan.kind.value
    if isinstance(plan, SweepPlan):
        if plan.max_band is not None:
            data["max_band"] = plan.max_band
        if plan.max_abs_slope is not None:
            data["max_abs_slope"] = plan.max_abs_slope
    elif plan.max_ratio is not None:
        data["max_ratio"] = plan.max_ratio
    return data


_COMMON_PLAN_KEYS = ("type", "statistic", "samples", "seed", "law", "sigma", "basis", "quad")
_SWEEP_KEYS = (*_COMMON_PLAN_KEYS, "degrees", "dimensions", "normalizer", "max_band", "max_abs_slope")
_MATCH_KEYS = (*_COMMON_PLAN_KEYS, "N", "max_ratio")


def _optional_float(value: Any) -> float | None:
    return None if value is None else float(value)


def plan_from_dict(data: Mapping[str, Any]) -> SweepPlan | MatchPlan:
    """A sweep or dimension_match plan; unknown keys raise DomainError."""
    if not isinstance(data, dict):
        msg = f"plan must be a JSON object, provided {type(data).__name__}"
        raise DomainError(msg)
    plan_type = data.get("type", "sweep")
    if plan_type not in ("sweep", "dimension_match"):
        msg = f"unknown plan type {plan_type!r}, expected sweep or dimension_match"
        raise DomainError(msg)
    _check_keys("plan", data, _SWEEP_KEYS if plan_type == "sweep" else _MATCH_KEYS)
    try:
        seed = parse_seed(data.get("seed", 0))
        random = RandomSpec(
            parse_law(data.get("law", "gaussian")), float(data.get("sigma", 1.0)), seed
        )
        statistic = parse_statistic(_require("plan", data, "statistic"))
        kind = parse_basis_kind(data["basis"]) if "basis" in data else None
        quad = quad_from_dict(data.get("quad", {}))
        samples = int(_require("plan", data, "samples"))
        if plan_type == "dimension_match":
            return MatchPlan(
                statistic=statistic,
                N=int(_require("plan", data, "N")),
                samples=samples,
                seed=seed,
                random=random,
                kind=kind,
                quad=quad,
                max_ratio=_optional_float(data.get("max_ratio")),
            )
        return SweepPlan(
            statistic=statistic,
            degrees=tuple(int(n) for n in _require("plan", data, "degrees")),
            samples=samples,
            seed=seed,
            dimensions=tuple(int(d) for d in data.get("dimensions", (1,))),
            normalizer=Normalizer.parse(data.get("normalizer", "one")),
            random=random,
            kind=kind,
            quad=quad,
            max_band=_optional_float(data.get("max_band")),
            max_abs_slope=_optional_float(data.get("max_abs_slope")),
        )
    except NikaveError:
        raise
    except (TypeError, ValueError) as e:
        msg = f"malformed plan: {e}"
        raise DomainError(msg) from e


def plans_from_json(text: str) -> list[SweepPlan | MatchPlan]:
    """A single plan object, or {"sweeps": [plan, ...]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        msg = f"plan file is not valid JSON: {e}"
        raise DomainError(msg) from e
    if isinstance(data, dict) and "sweeps" in data:
        _check_keys("plan file", data, ("sweeps",))
        if not isinstance(data["sweeps"], list):
            msg = "'sweeps' must be a list of plans"
            raise DomainError(msg)
        return [plan_from_dict(item) for item in data["sweeps"]]
    return [plan_from_dict(data)]


def sweep_to_dict(result: SweepResult) -> dict[str, Any]:
    return {
        "plan": plan_to_dict(result.plan),
        "rows": [
            {
                "d": row.d,
                "n": row.n,
                "N": row.N,
                "normalized": _json_float(row.normalized),
                **_estimate_fields(row.estimate),
            }
            for row in result.rows
        ],
        "band": _json_float(result.band),
        "slope": _json_float(result.fit.slope),
        "intercept": _json_float(result.fit.intercept),
        "residual": _json_float(result.fit.residual),
    }


def sweep_from_dict(data: Mapping[str, Any]) -> SweepResult:
    _check_keys("sweep", data, ("plan", "rows", "band", "slope", "intercept", "residual"))
    plan = plan_from_dict(data["plan"])
    if not isinstance(plan, SweepPlan):
        msg = "sweep record carries a dimension_match plan"
        raise DomainError(msg)
    rows = tuple(
        SweepRow(
            d=int(row["d"]),
            n=int(row["n"]),
            N=int(row["N"]),
            estimate=_estimate_from_fields(row, plan.seed),
            normalized=float(row["normalized"]),
        )
        for row in data["rows"]
    )
    return SweepResult(
        plan=plan,
        rows=rows,
        band=float(data["band"]),
        fit=SlopeFit(float(data["slope"]), float(data["intercept"]), float(data["residual"])),
    )


def poly_to_json(poly: TrigPoly) -> str:
    return json.dumps({"basis": basis_to_dict(poly.basis), "coeffs": poly.coeffs.tolist()})


def poly_from_json(text: str) -> TrigPoly:
    data = json.loads(text)
    _check_keys("polynomial", data, ("basis", "coeffs"))
    return TrigPoly(basis_from_dict(data["basis"]), np.asarray(data["coeffs"], dtype=np.float64))


def dumps(data: Any) -> str:
    """Stable JSON text: fixed key order, 2-space indent, trailing newline."""
    return json.dumps(data, indent=2) + "\n"


def match_records(result: DimensionMatch, plan: MatchPlan) -> list[EstimateRecord]:
    return [
        EstimateRecord(
            default_basis(row.d, row.n, plan.kind), plan.random_spec, plan.statistic, row.estimate
        )
        for row in result.rows
    ]


def match_to_dict(result: DimensionMatch, plan: MatchPlan) -> dict[str, Any]:
    return {
        "plan": plan_to_dict(plan),
        "rows": [
            {"d": row.d, "n": row.n, "N": row.N, **_estimate_fields(row.estimate)}
            for row in result.rows
        ],
        "ratio": _json_float(result.ratio),
    }
