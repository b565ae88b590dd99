"""
Deterministic Poisson-series oracles for the coined walk.

Each one-step map is evaluated as a truncated sum over the jump index ``k``
and written in pull form, ``(U Psi)(x, y) = sum_k w_k(y) Psi(x - y, (-1)**k y)``,
independently of the push-form matrix step in :mod:`qwalk_mc.reference`.

The ``i``-power attached to an odd ``k`` uses the coin the amplitude is pulled
*from*, ``y' = (-1)**k y``; this is what makes the sums agree with the matrix
coin under ``sigma2 |y> = i**y |-y>``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import CoinedState, CoinSpec, PointMassInitialState, point_mass_state
from .errors import ComplexityGuard, TruncationInvalid, WindowOverflow

__all__ = [
    "SeriesTruncation",
    "DEFAULT_TRUNCATION",
    "step_sigma2_series",
    "step_sigma3_series",
    "step_general_series",
    "sigma3_closed_form",
    "nstep_bruteforce",
]

MAX_BRUTEFORCE_STEPS = 4
MAX_BRUTEFORCE_ORDER = 40


@dataclass(frozen=True)
class SeriesTruncation:
    """
    Largest jump index ``K`` kept in each per-step sum.

    ``strict=False`` skips the tail-bound check so that deliberately short
    sums can be studied.
    """

    K: int = 64
    strict: bool = True

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 0:
            raise ValueError(f"K must be a non-negative integer, got {self.K!r}")

    def tail_bound(self, lam: float) -> float:
        lam = abs(lam)
        if lam == 0.0:
            return 0.0
        return math.exp((self.K + 1) * math.log(lam) - math.lgamma(self.K + 2) + lam)

    def check(self, lam: float) -> None:
        if self.strict and not self.tail_bound(lam) < 1e-14:
            raise TruncationInvalid(
                f"K={self.K} leaves a tail bound {self.tail_bound(lam):.3e} >= 1e-14 for lambda={lam:g}"
            )


DEFAULT_TRUNCATION = SeriesTruncation()


def _parity_sums(lam: float, K: int) -> tuple[complex, complex]:
    """Even- and odd-``k`` partial sums of ``(i lam)**k / k!`` for ``k <= K``."""
    even, odd = 0j, 0j
    term = 1 + 0j
    for k in range(K + 1):
        if k:
            term *= 1j * lam / k
        if k % 2:
            odd += term
        else:
            even += term
    return even, odd


def _pull(state: CoinedState, same, flip) -> CoinedState:
    """
    ``new(x, y) = same[y] * old(x - y, y) + flip[y] * old(x - y, -y)`` on a grown window.

    ``same`` and ``flip`` map ``y in (1, -1)`` to complex weights.
    """
    plus, minus = state.amp_plus, state.amp_minus
    if plus[0] or minus[0] or plus[-1] or minus[-1]:
        raise WindowOverflow(
            f"state on [{state.x_min}, {state.x_max}] has amplitude at its boundary; pad before stepping"
        )
    x_min = state.x_min - 1
    size = plus.size + 2
    new_plus = np.zeros(size, np.complex128)
    new_minus = np.zeros(size, np.complex128)
    for idx in range(size):
        x = x_min + idx
        for y, out in ((1, new_plus), (-1, new_minus)):
            src = x - y - state.x_min
            if 0 <= src < plus.size:
                keep = plus[src] if y == 1 else minus[src]
                other = minus[src] if y == 1 else plus[src]
                out[idx] = same[y] * keep + flip[y] * other
    return CoinedState(x_min, new_plus, new_minus)


def step_sigma2_series(state: CoinedState, lam: float, trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> CoinedState:
    """One step of the coin ``exp(i lam sigma2)`` evaluated from its jump series."""
    trunc.check(lam)
    even, odd = _parity_sums(lam, trunc.K)
    # odd k pulls from coin -y, whose sigma2 phase is i**(-y)
    same = {1: even, -1: even}
    flip = {1: odd * (-1j), -1: odd * 1j}
    return _pull(state, same, flip)


def step_sigma3_series(state: CoinedState, lam: float, trunc: SeriesTruncation = DEFAULT_TRUNCATION) -> CoinedState:
    """One step of the coin ``exp(i lam sigma3)``: ``sum_k (i y lam)**k / k!`` on each sector."""
    trunc.check(lam)
    same = {}
    for y in (1, -1):
        total, term = 0j, 1 + 0j
        for k in range(trunc.K + 1):
            if k:
                term *= 1j * y * lam / k
            total += term
        same[y] = total
    return _pull(state, same, {1: 0j, -1: 0j})


def step_general_series(
    state: CoinedState, spec: CoinSpec, trunc: SeriesTruncation = DEFAULT_TRUNCATION
) -> CoinedState:
    """One step of the Euler-angle coin, with the ``sigma2`` factor expanded as a jump series."""
    trunc.check(spec.lambda2)
    even, odd = _parity_sums(spec.lambda2, trunc.K)
    d, l1, l3 = spec.delta, spec.lambda1, spec.lambda3
    same, flip = {}, {}
    for y in (1, -1):
        outer = np.exp(1j * (d + l1 * y))
        same[y] = outer * np.exp(1j * l3 * y) * even
        flip[y] = outer * np.exp(-1j * l3 * y) * (1j ** (-y % 4)) * odd
    return _pull(state, same, flip)


def sigma3_closed_form(init: CoinedState, lam: float, n: int) -> CoinedState:
    """
    ``Psi_n(x, y) = exp(i n lam y) Psi_0(x - n y, y)``.

    Each coin sector translates rigidly by ``n y`` and picks up a phase.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    size = init.amp_plus.size + 2 * n
    plus = np.zeros(size, np.complex128)
    minus = np.zeros(size, np.complex128)
    plus[2 * n :] = init.amp_plus * np.exp(1j * n * lam)
    minus[: init.amp_minus.size] = init.amp_minus * np.exp(-1j * n * lam)
    return CoinedState(init.x_min - n, plus, minus)


def nstep_bruteforce(
    init: PointMassInitialState,
    spec: CoinSpec,
    n: int,
    trunc: SeriesTruncation = SeriesTruncation(MAX_BRUTEFORCE_ORDER),
) -> CoinedState:
    """
    Sum the ``n``-step jump series over every index tuple ``(k_1, ..., k_n)``.

    For each tuple and each final coin ``y_0`` the chain is walked backwards,
    ``y_j = (-1)**k_j y_{j-1}`` and ``x_j = x_{j-1} - y_{j-1}``, and the tuple
    contributes::

        exp(i n delta) exp(i l1 sum_{j<n} y_j) exp(i l3 sum_{j>=1} y_j)
            * i**(sum_j k_j + y_j [k_j odd]) * prod_j l2**k_j / k_j! * Psi_0(x_n, y_n)

    to ``Psi_n(x_0, y_0)``. Only ``x_0`` with ``x_n = 0`` can be nonzero, so the
    sum is scattered onto those sites. Cost is ``2 (K+1)**n`` tuples.

    Raises
    ------
    ComplexityGuard
        If ``n > 4`` or ``K > 40``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > MAX_BRUTEFORCE_STEPS or trunc.K > MAX_BRUTEFORCE_ORDER:
        raise ComplexityGuard(
            f"brute force limited to n <= {MAX_BRUTEFORCE_STEPS} and K <= {MAX_BRUTEFORCE_ORDER} "
            f"(got n={n}, K={trunc.K})"
        )
    init.check_normalized()
    if n == 0:
        return point_mass_state(init)
    trunc.check(spec.lambda2)

    K = trunc.K
    l2 = spec.lambda2
    poisson_free = np.array([l2**k / math.factorial(k) for k in range(K + 1)])
    ks = np.array(list(itertools.product(range(K + 1), repeat=n)), dtype=np.int64)
    weight = np.prod(poisson_free[ks], axis=1)
    odd = ks % 2
    base_phase = np.exp(1j * n * spec.delta)

    plus = np.zeros(2 * n + 1, np.complex128)
    minus = np.zeros(2 * n + 1, np.complex128)
    for y0 in (1, -1):
        y_prev = np.full(ks.shape[0], y0, dtype=np.int64)
        x_offset = np.zeros(ks.shape[0], dtype=np.int64)
        sum_out = np.zeros(ks.shape[0], dtype=np.int64)  # y_0 .. y_{n-1}
        sum_in = np.zeros(ks.shape[0], dtype=np.int64)  # y_1 .. y_n
        ipow = np.zeros(ks.shape[0], dtype=np.int64)
        for j in range(n):
            y_next = np.where(odd[:, j] == 1, -y_prev, y_prev)
            x_offset += y_prev
            sum_out += y_prev
            sum_in += y_next
            ipow += ks[:, j] + y_next * odd[:, j]
            y_prev = y_next
        amp0 = np.where(y_prev == 1, init.alpha, init.beta)
        contrib = (
            base_phase
            * np.exp(1j * spec.lambda1 * sum_out)
            * np.exp(1j * spec.lambda3 * sum_in)
            * (1j ** (ipow % 4))
            * weight
            * amp0
        )
        # x_n = x_0 - sum_{j<n} y_j must vanish, so x_0 = x_offset
        target = plus if y0 == 1 else minus
        target += np.bincount(x_offset + n, weights=contrib.real, minlength=2 * n + 1)
        target += 1j * np.bincount(x_offset + n, weights=contrib.imag, minlength=2 * n + 1)
    return CoinedState(-n, plus, minus)
