"""
Seeded Monte Carlo estimators built on Poisson jump sampling.

Discrete-time walk
    For each sample draw ``N_1..N_n ~ Poisson(lambda2)`` with partial sums
    ``S_j``. The sample lands at ``x = y * sum_{j<n} (-1)**S_j`` in coin
    sector ``y`` and carries the weight::

        exp(n lambda2) exp(i n delta) exp(i lambda1 x)
            * exp(i lambda3 (x - y + y (-1)**S_n))
            * i**(S_n - y [S_n odd]) * Psi_0(0, y (-1)**S_n)

    One trajectory serves both sectors.

Continuous-time walk
    ``Psi(t, x) = exp(lam t) E[i**N_t Psi_0(X_t)]`` with ``N_t ~ Poisson(lam t)``
    jumps of the symmetric walk.

Sampling is split into fixed-size chunks; chunk ``c`` draws from the stream
keyed by ``(seed, c)``. Each chunk only produces an integer histogram, so the
merged result does not depend on how chunks are spread over workers.
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .core import CoinedState, CoinSpec, PointMassInitialState, ScalarState, point_mass_state
from .errors import RateOutOfRange, VarianceAdvisory
from .reference import LatticeGenerator

__all__ = [
    "RngStream",
    "TrajectorySample",
    "EstimateReport",
    "poisson_cdf_table",
    "sample_poisson",
    "sample_trajectory",
    "estimate_discrete",
    "estimate_sigma2",
    "estimate_continuous",
    "default_workers",
    "N_BATCHES",
    "CHUNK_SIZE",
]

N_BATCHES = 64
CHUNK_SIZE = 1 << 18
MAX_RATE = 20.0
MAX_LOG_WEIGHT = 30.0
ADVISORY_LEVEL = 0.05
WORKERS_ENV = "QWALK_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class RngStream:
    """
    Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by Philox, so a given key reproduces the same draws on every
    platform and distinct ``stream_id`` values give independent streams.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._bits = np.random.Philox(np.random.SeedSequence([self.seed, self.stream_id]))
        self.generator = np.random.Generator(self._bits)

    def random(self, size=None):
        return self.generator.random(size)

    def raw(self, size) -> NDArray[np.uint64]:
        return self._bits.random_raw(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _check_rate(lam: float) -> None:
    if not (0.0 < lam < MAX_RATE):
        raise RateOutOfRange(f"Poisson rate {lam!r} outside the supported range (0, {MAX_RATE:g})")


def poisson_cdf_table(lam: float) -> NDArray[np.float64]:
    """Cumulative Poisson probabilities, accumulated term by term until they stop growing."""
    _check_rate(lam)
    pmf = math.exp(-lam)
    cdf = [pmf]
    k = 0
    while True:
        k += 1
        pmf *= lam / k
        nxt = cdf[-1] + pmf
        if nxt == cdf[-1] and k > lam:
            break
        cdf.append(nxt)
    return np.array(cdf)


def sample_poisson(lam: float, rng: RngStream) -> int:
    """One Poisson draw by sequential-search inversion of a single uniform."""
    return int(_kernels.invert_poisson(rng.random(), poisson_cdf_table(lam)))


@dataclass(frozen=True)
class TrajectorySample:
    """Jumps ``N_1..N_n``, partial sums ``S_0..S_n`` and ``sum_{j<n} (-1)**S_j``."""

    jumps: tuple[int, ...]
    partial_sums: tuple[int, ...]
    landing_sum: int

    @classmethod
    def from_jumps(cls, jumps) -> "TrajectorySample":
        jumps = tuple(int(k) for k in jumps)
        if any(k < 0 for k in jumps):
            raise ValueError("jumps must be non-negative")
        sums = (0,) + tuple(int(s) for s in np.cumsum(jumps, dtype=np.int64))
        landing = sum(1 - 2 * (s % 2) for s in sums[:-1])
        return cls(jumps, sums, landing)

    @property
    def n(self) -> int:
        return len(self.jumps)


def sample_trajectory(n: int, lambda2: float, rng: RngStream) -> TrajectorySample:
    if n < 1:
        raise ValueError("n must be at least 1")
    cdf = poisson_cdf_table(lambda2)
    return TrajectorySample.from_jumps(_kernels.invert_poisson(u, cdf) for u in rng.random(n))


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """
    Monte Carlo amplitude estimate with batch-means standard errors.

    For a :class:`ScalarState` estimate ``std_err_minus`` is ``None`` and the
    per-site errors live in ``std_err_plus`` (also exposed as ``std_err``).
    ``max_weight`` bounds the modulus of any single sample's contribution
    before division by ``samples``.
    """

    state: CoinedState | ScalarState
    std_err_plus: NDArray[np.float64]
    std_err_minus: NDArray[np.float64] | None
    samples: int
    wall_time: float
    max_weight: float
    config: dict = field(default_factory=dict)

    @property
    def std_err(self) -> NDArray[np.float64]:
        return self.std_err_plus


def _chunks(total: int, chunk_size: int):
    return [(c, c * chunk_size, min(chunk_size, total - c * chunk_size)) for c in range(-(-total // chunk_size))]


def _run_chunks(job, total: int, workers: int, chunk_size: int):
    chunks = _chunks(total, chunk_size)
    if workers <= 1 or len(chunks) == 1:
        parts = [job(*c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: job(*c), chunks))
    out = parts[0]
    for p in parts[1:]:
        out += p
    return out


def _batch_sizes(total: int, n_batches: int) -> NDArray[np.int64]:
    # batch b holds global indices i with floor(i * B / total) == b
    starts = np.array([-(-b * total // n_batches) for b in range(n_batches + 1)], dtype=np.int64)
    return np.diff(starts)


def _batch_stats(per_batch: NDArray[np.complex128], total: int):
    """Overall mean and batch-means standard error from per-batch sums ``(batch, site)``."""
    n_batches = per_batch.shape[0]
    mean = per_batch.sum(axis=0) / total
    if n_batches < 2:
        return mean, np.full(mean.shape, np.inf)
    batch_means = per_batch / _batch_sizes(total, n_batches)[:, None]
    spread = np.abs(batch_means - batch_means.mean(axis=0)) ** 2
    return mean, np.sqrt(spread.sum(axis=0) / (n_batches * (n_batches - 1)))


def _advise(log_weight: float, samples: int) -> None:
    level = math.exp(log_weight) / math.sqrt(samples)
    if level > ADVISORY_LEVEL:
        warnings.warn(
            f"exp-weight / sqrt(M) = {level:.3g} exceeds {ADVISORY_LEVEL}; estimate will be noisy",
            VarianceAdvisory,
            stacklevel=3,
        )


def _discrete_weights(spec: CoinSpec, init: PointMassInitialState, n: int, y: int) -> NDArray[np.complex128]:
    """Per-sample weight for sector ``y``, indexed by ``(landing_sum + n, S_n mod 4)``."""
    land = np.arange(-n, n + 1)[:, None]
    r = np.arange(4)[None, :]
    odd = r & 1
    x = y * land
    y_end = y * (1 - 2 * odd)
    amp0 = np.where(y_end == 1, init.alpha, init.beta)
    return (
        math.exp(n * spec.lambda2)
        * np.exp(1j * n * spec.delta)
        * np.exp(1j * spec.lambda1 * x)
        * np.exp(1j * spec.lambda3 * (x - y + y_end))
        * (1j ** ((r - y * odd) % 4))
        * amp0
    )


def estimate_discrete(
    spec: CoinSpec,
    init: PointMassInitialState,
    n: int,
    M: int,
    seed: int = 0,
    workers: int | None = None,
    *,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateReport:
    """
    Estimate ``Psi_n`` of the coined walk from a point-mass start by Poisson sampling.

    Parameters
    ----------
    spec : CoinSpec
        Coin; ``lambda2`` is the Poisson rate and must lie in ``(0, 2*pi)``.
    init : PointMassInitialState
    n : int
        Number of steps; ``n = 0`` returns ``init`` exactly.
    M : int
        Number of sampled trajectories.
    seed : int
    workers : int, optional
        Threads used for sampling; defaults to ``$QWALK_WORKERS`` or the CPU count.

    Returns
    -------
    EstimateReport
        Estimate on ``[-n, n]`` with per-site standard errors for each coin sector.

    Raises
    ------
    RateOutOfRange
        If ``lambda2`` is outside ``(0, 2*pi)`` or ``n * lambda2 > 30``.
    """
    if n < 0 or M < 1:
        raise ValueError("need n >= 0 and M >= 1")
    init.check_normalized()
    if not (0.0 < spec.lambda2 < 2.0 * math.pi):
        raise RateOutOfRange(f"lambda2 = {spec.lambda2!r} outside (0, 2*pi)")
    workers = default_workers() if workers is None else max(1, int(workers))
    config = {
        "mode": "discrete",
        "coin": list(spec.as_tuple()),
        "alpha": [init.alpha.real, init.alpha.imag],
        "beta": [init.beta.real, init.beta.imag],
        "n": n,
        "M": M,
        "seed": seed,
        "workers": workers,
        "batches": min(N_BATCHES, M),
        "sector_sample_reuse": True,
    }
    started = time.perf_counter()
    if n == 0:
        zero = np.zeros(1)
        return EstimateReport(point_mass_state(init), zero, zero.copy(), M, 0.0, 0.0, config)
    log_weight = n * spec.lambda2
    if log_weight > MAX_LOG_WEIGHT:
        raise RateOutOfRange(f"n * lambda2 = {log_weight:.3g} exceeds {MAX_LOG_WEIGHT:g}; weights overflow usefully")
    _advise(log_weight, M)

    cdf = poisson_cdf_table(spec.lambda2)
    n_batches = min(N_BATCHES, M)

    def job(chunk_id, first, rows):
        rng = RngStream(seed, chunk_id)
        hist = np.zeros((n_batches, 2 * n + 1, 4), dtype=np.int64)
        _kernels.discrete_histogram(rng.random((rows, n)), cdf, first, M, n_batches, hist)
        return hist

    hist = _run_chunks(job, M, workers, chunk_size)
    counts = hist.astype(np.float64)
    plus, se_plus = _batch_stats(np.einsum("bsc,sc->bs", counts, _discrete_weights(spec, init, n, 1)), M)
    minus, se_minus = _batch_stats(np.einsum("bsc,sc->bs", counts, _discrete_weights(spec, init, n, -1)), M)
    # sector -1 lands at x = -landing_sum
    state = CoinedState(-n, plus, minus[::-1])
    max_weight = math.exp(log_weight) * max(abs(init.alpha), abs(init.beta))
    elapsed = time.perf_counter() - started
    return EstimateReport(state, se_plus, se_minus[::-1].copy(), M, elapsed, max_weight, config)


def estimate_sigma2(
    lam: float,
    init: PointMassInitialState,
    n: int,
    M: int,
    seed: int = 0,
    workers: int | None = None,
    **kwargs,
) -> EstimateReport:
    """Estimator for the pure coin ``exp(i lam sigma2)``."""
    return estimate_discrete(CoinSpec(0.0, 0.0, lam, 0.0), init, n, M, seed, workers, **kwargs)


def estimate_continuous(
    gen: LatticeGenerator,
    init: ScalarState,
    t: float,
    M: int,
    seed: int = 0,
    workers: int | None = None,
    *,
    chunk_size: int = CHUNK_SIZE,
) -> EstimateReport:
    """
    Estimate ``exp(i lam P t) Psi_0`` with the jump-chain representation.

    Every sample's displacement ``D`` is applied to all starting sites at once:
    the contribution to site ``x`` is ``exp(lam t) i**N Psi_0(x + D)``, the walk
    started at ``x``. The estimate covers ``init``'s support widened by the
    largest jump count the Poisson table allows.
    """
    if t < 0 or M < 1:
        raise ValueError("need t >= 0 and M >= 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    rate = gen.lam * t
    config = {
        "mode": "continuous",
        "lam": gen.lam,
        "t": t,
        "M": M,
        "seed": seed,
        "workers": workers,
        "batches": min(N_BATCHES, M),
    }
    started = time.perf_counter()
    if t == 0:
        zero = np.zeros(init.amps.size)
        return EstimateReport(init, zero, None, M, 0.0, 0.0, config)
    _check_rate(rate)
    _advise(rate, M)

    cdf = poisson_cdf_table(rate)
    radius = cdf.size
    words = -(-radius // 64)
    n_batches = min(N_BATCHES, M)

    def job(chunk_id, first, rows):
        rng = RngStream(seed, chunk_id)
        u = rng.random(rows)
        bits = rng.raw(rows * words).reshape(rows, words)
        hist = np.zeros((n_batches, 2 * radius + 1, 4), dtype=np.int64)
        _kernels.continuous_histogram(u, bits, cdf, first, M, n_batches, hist)
        return hist

    hist = _run_chunks(job, M, workers, chunk_size)

    # site x collects Psi_0(x + D): correlate the displacement histogram with init
    x_min, x_max = init.x_min - radius, init.x_max + radius
    sites = np.arange(x_min, x_max + 1)
    disp = np.arange(-radius, radius + 1)
    src = sites[:, None] + disp[None, :] - init.x_min
    inside = (src >= 0) & (src < init.amps.size)
    psi0 = np.where(inside, init.amps[np.clip(src, 0, init.amps.size - 1)], 0)
    phase = 1j ** np.arange(4)
    # weights[x, d, r] contracted against hist[b, d, r]
    weights = math.exp(rate) * psi0[:, :, None] * phase[None, None, :]
    mean, se = _batch_stats(np.einsum("bdr,xdr->bx", hist.astype(np.float64), weights), M)
    max_weight = math.exp(rate) * float(np.max(np.abs(init.amps)))
    elapsed = time.perf_counter() - started
    return EstimateReport(ScalarState(x_min, mean), se, None, M, elapsed, max_weight, config)
