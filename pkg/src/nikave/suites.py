"""Fixed-seed invariant bundles run by `nikave verify`."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .estimators import (
    verify_moment_ratio_identity,
    verify_reciprocal_identity,
    verify_sigma_invariance,
)
from .oracles import (
    chi_moment,
    gaussian_tail,
    moment_ratio_factor,
    recip_moment_factor,
    stirling_ratio_check,
)
from .poly import BasisKind, BasisSpec, TrigPoly, default_basis
from .quadrature import (
    L1,
    L2,
    SUP,
    NormSpec,
    QuadConfig,
    norm,
    norm_l2_parseval,
    rectangle_norm,
    sup_norm,
)
from .report import format_identity, format_sigma
from .sampling import Law, derive_stream, grid_samples, sample_unit

if TYPE_CHECKING:
    from collections.abc import Callable

    from .poly import ComplexArray

logger = logging.getLogger(__name__)

SUITE_SEED = 0x5EED
SUITE_NAMES = ("identities", "tails", "quadrature", "whitening")

# both sides of an identity share every norm, so a loose quadrature is enough
_LOOSE_QUAD = QuadConfig(oversample=8, rel_tol=1e-6, max_doublings=2)
_IDENTITY_SAMPLES = 2000


@dataclass(frozen=True, slots=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def _random_poly(basis: BasisSpec, index: int, seed: int = SUITE_SEED) -> TrigPoly:
    coeffs = sample_unit(derive_stream(seed, index), basis.size, Law.GAUSSIAN)
    return TrigPoly(basis, coeffs)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --- identities ---------------------------------------------------------------
def identities(*, workers: int | None = None) -> list[Check]:
    checks = []
    basis = default_basis(1, 8)
    for q, k, ell in ((2.0, 2, 2), (1.0, 1, 1), (4.0, 2, 2), (3.0, 1, 2)):
        report = verify_moment_ratio_identity(
            NormSpec(q),
            k,
            ell,
            basis,
            _IDENTITY_SAMPLES,
            SUITE_SEED,
            quad=_LOOSE_QUAD,
            workers=workers,
        )
        checks.append(Check(report.name, report.passed, format_identity(report)))
    for p, k, ell in ((2.0, 2, 1), (1.0, 1, 1), (4.0, 2, 2)):
        report = verify_reciprocal_identity(
            NormSpec(p),
            k,
            ell,
            basis,
            _IDENTITY_SAMPLES,
            SUITE_SEED,
            quad=_LOOSE_QUAD,
            workers=workers,
        )
        checks.append(Check(report.name, report.passed, format_identity(report)))
    sigma = verify_sigma_invariance(
        L1,
        NormSpec(3.0),
        basis,
        (1.0, 5.0, 0.001),
        200,
        SUITE_SEED,
        quad=_LOOSE_QUAD,
        workers=workers,
    )
    checks.append(Check("sigma invariance", sigma.passed, format_sigma(sigma)))
    return checks


# --- tails and closed forms ---------------------------------------------------
def tails(*, workers: int | None = None) -> list[Check]:
    checks = []
    failures = []
    for t in np.geomspace(1.01, 10.0, 100):
        bounds = gaussian_tail(float(t))
        if not bounds.lower <= bounds.exact <= bounds.upper:
            failures.append(float(t))
    detail = f"failures at t={failures}" if failures else "100 points"
    checks.append(Check("gaussian tail bracketing on [1.01, 10]", not failures, detail))

    for x, upper in ((100.0, 1.001), (1e4, 1.00001)):
        ratio = stirling_ratio_check(x)
        checks.append(Check(f"stirling ratio x={x:g}", 1.0 <= ratio <= upper, repr(ratio)))

    worst = 0.0
    for N in (3, 11, 101, 10**6):
        for k in range(1, 7):
            target = {
                ell: chi_moment(N, k - ell).log_scale for ell in range(1, 7) if ell < k + N
            }
            for ell, expected in target.items():
                product = moment_ratio_factor(k, ell, N).log_scale + chi_moment(N, k).log_scale
                worst = max(worst, abs(product - expected))
                if ell < N:
                    product = recip_moment_factor(k, ell, N).log_scale + chi_moment(N, -ell).log_scale
                    worst = max(worst, abs(product - expected))
    checks.append(
        Check("chi moment identities (log scale)", worst <= 1e-10, f"max log gap {worst:.3g}")
    )
    return checks


# --- quadrature ---------------------------------------------------------------
def quadrature(*, workers: int | None = None, polys: int = 200) -> list[Check]:
    """Per-polynomial quadrature invariants; odd-indexed polynomials are 2-dimensional."""
    parseval_gap = even_gap = sup_gap = 0.0
    monotone = holder = True
    exponents = (L1, NormSpec(1.5), L2, NormSpec(3.0), NormSpec(4.0), SUP)
    dense = QuadConfig(oversample=256)
    for i in range(polys):
        d = 1 + i % 2
        n = 1 + (i * 7) % (16 if d == 1 else 6)
        poly = _random_poly(default_basis(d, n), i)
        parseval = norm_l2_parseval(poly)
        on_grid = rectangle_norm(poly, 2.0, 2 * poly.basis.axis_size)
        parseval_gap = max(parseval_gap, _rel(on_grid, parseval))
        if d == 1:
            exact = norm(poly, NormSpec(4.0)).value
            reference = rectangle_norm(poly, 4.0, 64 * poly.basis.axis_size)
            even_gap = max(even_gap, _rel(exact, reference))
            sup_gap = max(sup_gap, _rel(sup_norm(poly).value, sup_norm(poly, dense).value))
        values = [norm(poly, spec, _LOOSE_QUAD).value for spec in exponents]
        monotone = monotone and all(
            a <= b * (1 + 1e-8) for a, b in zip(values, values[1:], strict=False)
        )
        l1, l2, l3 = values[0], values[2], values[3]
        holder = holder and l2**2 <= l1**0.5 * l3**1.5 * (1 + 1e-8)
    return [
        Check("p=2 quadrature vs parseval", parseval_gap <= 1e-10, f"max rel gap {parseval_gap:.3g}"),
        Check("p=4 exact rectangle vs dense grid", even_gap <= 1e-10, f"max rel gap {even_gap:.3g}"),
        Check("sup norm oversample 16 vs 256", sup_gap <= 1e-8, f"max rel gap {sup_gap:.3g}"),
        Check("norm monotonicity in p", monotone, f"{polys} polynomials"),
        Check("holder |T|_2^2 <= |T|_1^(1/2) |T|_3^(3/2)", holder, f"{polys} polynomials"),
    ]


# --- whitening ----------------------------------------------------------------
def grid_covariance(basis: BasisSpec, samples: int, seed: int = SUITE_SEED) -> ComplexArray:
    """Empirical E(X X*) of the grid samples over `samples` Gaussian draws."""
    rows = np.stack([grid_samples(_random_poly(basis, i, seed)) for i in range(samples)])
    return (rows.T @ rows.conj()) / samples


def whitening_gaps(cov: ComplexArray) -> tuple[float, float]:
    """(max |diag - 1|, max |off-diagonal|)."""
    diag = np.abs(np.diag(cov).real - 1.0).max()
    off = np.abs(cov - np.diag(np.diag(cov))).max()
    return float(diag), float(off)


def identity_gap(cov: ComplexArray) -> float:
    """max |C - I| over every entry."""
    return float(np.abs(cov - np.eye(cov.shape[0])).max())


def whitening(*, workers: int | None = None, samples: int = 10_000) -> list[Check]:
    """Grid-sample covariances against the identity.

    Real-1d grids must sit within 5/sqrt(S) of I entrywise; the 1-d and
    complex d=2 grids are also held to the off-diagonal bound with sqrt(ln N)
    slack and a 10% diagonal band.
    """
    covariances = {
        basis: grid_covariance(basis, samples)
        for basis in (BasisSpec(1, 4), BasisSpec(1, 8), BasisSpec(2, 1, BasisKind.COMPLEX_EXP))
    }
    checks = []
    tight = 5.0 / math.sqrt(samples)
    for basis in (BasisSpec(1, 4), BasisSpec(1, 8)):
        gap = identity_gap(covariances[basis])
        checks.append(
            Check(
                f"grid sample covariance n={basis.degree} within 5/sqrt(S) of identity",
                gap <= tight,
                f"max |C - I| {gap:.3g} (bound {tight:.3g})",
            )
        )
    for basis in (BasisSpec(1, 4), BasisSpec(2, 1, BasisKind.COMPLEX_EXP)):
        diag, off = whitening_gaps(covariances[basis])
        bound = tight * math.sqrt(math.log(basis.size))
        checks.append(
            Check(
                f"grid sample covariance d={basis.dimension} n={basis.degree} {basis.kind.value}",
                diag <= 0.1 and off <= bound,
                f"diag gap {diag:.3g}, off-diagonal {off:.3g} (bound {bound:.3g})",
            )
        )
    return checks


SUITES: dict[str, Callable[..., list[Check]]] = {
    "identities": identities,
    "tails": tails,
    "quadrature": quadrature,
    "whitening": whitening,
}


def run_suite(name: str, *, workers: int | None = None) -> list[Check]:
    """Runs one suite, or every suite for "all"."""
    names = SUITE_NAMES if name == "all" else (name,)
    checks = []
    for suite in names:
        start = time.perf_counter()
        results = SUITES[suite](workers=workers)
        logger.info(
            "verify: %s checks=%d failed=%d %.1fms",
            suite,
            len(results),
            sum(not c.passed for c in results),
            (time.perf_counter() - start) * 1000,
        )
        checks.extend(results)
    return checks
