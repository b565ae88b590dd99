"""Distances between distributions and states, and Monte Carlo convergence studies."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import CoinedState, CoinSpec, PointMassInitialState, coin_from_euler, point_mass_state
from .errors import NotADistribution, VarianceAdvisory
from .montecarlo import EstimateReport, estimate_discrete
from .reference import distribution, evolve_coined

__all__ = [
    "ComparisonReport",
    "total_variation",
    "amplitude_error",
    "probability_std_error",
    "within_std_errors",
    "ConvergenceStudy",
    "convergence_slope",
    "convergence_study",
]


def _mass(p: Mapping[int, float], name: str) -> float:
    values = np.fromiter(p.values(), dtype=np.float64, count=len(p))
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise NotADistribution(f"{name} has negative or non-finite mass")
    return float(values.sum())


def total_variation(p: Mapping[int, float], q: Mapping[int, float], *, renormalize: bool = False) -> float:
    """
    ``1/2 sum_x |p(x) - q(x)|`` over the union of supports.

    Both inputs must sum to 1 within 1e-6 unless ``renormalize`` is set, in
    which case each is divided by its own (positive) mass first.

    Raises
    ------
    NotADistribution
        On negative mass, or a total outside ``1 +- 1e-6`` without ``renormalize``.
    """
    mp, mq = _mass(p, "p"), _mass(q, "q")
    if renormalize:
        if mp <= 0 or mq <= 0:
            raise NotADistribution("cannot renormalize a distribution with zero mass")
    else:
        for name, m in (("p", mp), ("q", mq)):
            if abs(m - 1.0) > 1e-6:
                raise NotADistribution(f"{name} sums to {m!r}, not 1 within 1e-6")
        mp = mq = 1.0
    support = sorted(set(p) | set(q))
    return 0.5 * sum(abs(p.get(x, 0.0) / mp - q.get(x, 0.0) / mq) for x in support)


@dataclass(frozen=True)
class ComparisonReport:
    tvd: float
    l2_amp_error: float
    aligned_phase: float
    per_site_errors: dict[int, float] = field(repr=False)
    metadata: dict = field(default_factory=dict)


def _common_window(a: CoinedState, b: CoinedState) -> tuple[CoinedState, CoinedState]:
    lo, hi = min(a.x_min, b.x_min), max(a.x_max, b.x_max)
    return a.padded(lo, hi), b.padded(lo, hi)


def amplitude_error(a: CoinedState, b: CoinedState, align_phase: bool = True) -> ComparisonReport:
    """
    l2 distance between two coined states, optionally minimized over a global phase.

    With ``align_phase`` the reported phase is ``arg <b, a>``, which minimizes
    ``||a - exp(i phi) b||``. ``tvd`` compares the position distributions after
    renormalizing each; the raw masses are kept in ``metadata``.
    """
    a, b = _common_window(a, b)
    va, vb = a.to_vector(), b.to_vector()
    phi = 0.0
    if align_phase:
        overlap = np.vdot(vb, va)
        if abs(overlap) > 0:
            phi = float(np.angle(overlap))
    diff = va - np.exp(1j * phi) * vb
    per_site = np.sqrt(np.abs(diff[0::2]) ** 2 + np.abs(diff[1::2]) ** 2)
    pa, pb = distribution(a), distribution(b)
    mass_a, mass_b = sum(pa.values()), sum(pb.values())
    tvd = total_variation(pa, pb, renormalize=True) if mass_a > 0 and mass_b > 0 else float(mass_a != mass_b)
    return ComparisonReport(
        tvd=tvd,
        l2_amp_error=float(np.linalg.norm(diff)),
        aligned_phase=phi % (2 * math.pi),
        per_site_errors={int(x): float(e) for x, e in zip(a.positions, per_site)},
        metadata={"mass_a": mass_a, "mass_b": mass_b, "align_phase": align_phase},
    )


def probability_std_error(report: EstimateReport) -> NDArray[np.float64]:
    """
    Standard error of the estimated position probability at each site.

    ``|a + e|^2 - |a|^2 = 2 Re(conj(a) e) + |e|^2``; the linear term has standard
    deviation at most ``2 |a| se`` and the quadratic term is a bias of ``se**2``.
    Both are added, per coin sector, with ``a`` replaced by its estimate.
    """
    if isinstance(report.state, CoinedState):
        pairs = [
            (report.state.amp_plus, report.std_err_plus),
            (report.state.amp_minus, report.std_err_minus),
        ]
    else:
        pairs = [(report.state.amps, report.std_err_plus)]
    linear = np.sqrt(sum((2 * np.abs(a) * se) ** 2 for a, se in pairs))
    return linear + sum(se**2 for _, se in pairs)


def within_std_errors(
    estimate: NDArray[np.complex128],
    reference: NDArray[np.complex128],
    std_err: NDArray[np.float64],
    k: float,
    resolution: float = 0.0,
) -> NDArray[np.bool_]:
    """
    Per-site check ``|estimate - reference| <= k * max(std_err, resolution)``.

    ``resolution`` is the contribution of a single sample (``max_weight / M``).
    Sites no sample reached report a batch error of exactly zero, and the
    estimator cannot resolve amplitudes below one sample there.
    """
    scale = np.maximum(np.asarray(std_err, dtype=np.float64), resolution)
    return np.abs(np.asarray(estimate) - np.asarray(reference)) <= k * scale


def convergence_slope(samples: Sequence[int], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(samples)``."""
    x = np.log(np.asarray(samples, dtype=np.float64))
    y = np.log(np.asarray(errors, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: list[dict]
    slope: float
    converging: bool


# a fit flatter than this is not treated as Monte Carlo convergence
CONVERGING_SLOPE = -0.25


def convergence_study(
    spec: CoinSpec,
    init: PointMassInitialState,
    n: int,
    M_grid: Sequence[int],
    seed: int = 0,
    workers: int | None = None,
    replicates: int = 8,
) -> ConvergenceStudy:
    """
    Run the discrete estimator at each sample count and fit the error decay.

    Each grid point averages ``replicates`` independent runs; run ``r`` at grid
    index ``i`` is seeded from ``SeedSequence([seed, i, r])``. Errors are
    measured against :func:`evolve_coined` with the same coin. A single run per
    point leaves the fitted slope with a spread of roughly +-0.15.
    """
    grid = [int(m) for m in M_grid]
    if len(grid) < 3:
        raise ValueError("M_grid needs at least 3 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"M_grid must be strictly increasing without duplicates, got {grid}")
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    reference = evolve_coined(point_mass_state(init), coin_from_euler(spec), n)
    p_ref = distribution(reference)
    rows = []
    for i, m in enumerate(grid):
        tvds, l2s = [], []
        for r in range(replicates):
            sub_seed = int(np.random.SeedSequence([seed, i, r]).generate_state(1, np.uint64)[0] >> np.uint64(1))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", VarianceAdvisory)
                report = estimate_discrete(spec, init, n, m, sub_seed, workers)
            tvds.append(total_variation(p_ref, distribution(report.state), renormalize=True))
            l2s.append(amplitude_error(report.state, reference, align_phase=False).l2_amp_error)
        rows.append(
            {
                "M": m,
                "replicates": replicates,
                "tvd": float(np.mean(tvds)),
                "tvd_sd": float(np.std(tvds, ddof=1)) if replicates > 1 else 0.0,
                "l2": float(np.mean(l2s)),
            }
        )
    slope = convergence_slope([r["M"] for r in rows], [r["tvd"] for r in rows])
    return ConvergenceStudy(rows, slope, slope <= CONVERGING_SLOPE)
