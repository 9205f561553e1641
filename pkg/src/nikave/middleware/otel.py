"""OpenTelemetry tracing and metrics middleware for sweeps.

Creates one span per sweep point, plus duration and rejected-draw metrics.

Install with: uv add "nikave[otel]"
"""

from __future__ import annotations

import time
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from nikave.estimators import EstimatorTask, MCEstimate
    from nikave.sweep import Middleware, PointRunner

try:
    from opentelemetry import metrics, trace
    from opentelemetry.trace import TracerProvider
except ImportError as e:
    msg = (
        "OpenTelemetry middleware requires the 'otel' extra. "
        "Install with: uv add 'nikave[otel]'"
    )
    raise ImportError(msg) from e

from nikave.sweep import sweep_point

type _SpanAttributeValue = str | int | float

_DURATION_BUCKETS = (
    0.01,
    0.05,
    0.1,
    0.25,
    0.5,
    1.0,
    2.5,
    5.0,
    10.0,
    30.0,
    60.0,
    300.0,
)


def otel(
    *,
    tracer_provider: TracerProvider | None = None,
    meter_provider: metrics.MeterProvider | None = None,
) -> Middleware:
    """Create OpenTelemetry tracing and metrics middleware for run_sweep.

    Only depends on ``opentelemetry-api``; users bring their own SDK and
    exporters.

    Metrics emitted:
        - ``nikave.sweep.point.duration`` (histogram, seconds)
        - ``nikave.sweep.rejected_draws`` (counter)

    Args:
        tracer_provider: Optional TracerProvider. If None, uses the global provider.
        meter_provider: Optional MeterProvider. If None, uses the global provider.

    Example:
        run_sweep(plan, middleware=(otel(),))
    """
    tracer = trace.get_tracer("nikave", tracer_provider=tracer_provider)
    meter = metrics.get_meter("nikave", meter_provider=meter_provider)
    duration_histogram = meter.create_histogram(
        "nikave.sweep.point.duration",
        unit="s",
        description="Duration of one sweep point estimate.",
        explicit_bucket_boundaries_advisory=_DURATION_BUCKETS,
    )
    rejected_counter = meter.create_counter(
        "nikave.sweep.rejected_draws",
        unit="{draw}",
        description="Draws rejected as degenerate.",
    )

    def middleware(runner: PointRunner) -> PointRunner:
        def traced_runner(task: EstimatorTask) -> MCEstimate:
            basis = task.basis
            # sweep_point is set by the sweep before the chain runs
            point = sweep_point.get(None)
            d = point.d if point is not None else basis.dimension
            n = point.n if point is not None else basis.degree
            attributes: dict[str, _SpanAttributeValue] = {
                "nikave.d": d,
                "nikave.n": n,
                "nikave.N": basis.size,
                "nikave.statistic": str(task.statistic),
                "nikave.samples": task.samples,
                "nikave.seed": str(task.random.seed),  # may exceed int64
            }
            metric_attrs: dict[str, str | int] = {
                "nikave.statistic": str(task.statistic),
                "nikave.d": d,
            }
            start = time.perf_counter()
            with tracer.start_as_current_span(
                f"sweep.point d={d} n={n}",
                attributes=attributes,
                record_exception=True,
                set_status_on_exception=True,
            ) as span:
                try:
                    estimate = runner(task)
                except Exception as exc:
                    span.set_attribute("error.type", type(exc).__name__)
                    raise
                finally:
                    duration_histogram.record(time.perf_counter() - start, metric_attrs)
                span.set_attribute("nikave.rejected", estimate.rejected)
                span.set_attribute("nikave.mean", estimate.mean)
                span.set_attribute("nikave.stderr", estimate.stderr)
                rejected_counter.add(estimate.rejected, metric_attrs)
            return estimate

        return traced_runner

    return middleware
