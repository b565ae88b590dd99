"""
Exact evolution of the coined walk and of the continuous-time walk.

These engines are the ground truth the series sums and Monte Carlo
estimators are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import jv

from .core import CoinedState, ScalarState
from .errors import NonConvergence, WindowOverflow

__all__ = [
    "LatticeGenerator",
    "step_coined",
    "evolve_coined",
    "evolve_continuous",
    "taylor_order",
    "bessel_propagator",
    "distribution",
]

_TAIL_TOL = 1e-14
_MAX_ORDER = 400


@dataclass(frozen=True)
class LatticeGenerator:
    """Rate ``lam`` and transition matrix of the continuous-time walk (``U(t) = exp(i lam P t)``)."""

    lam: float
    kind: str = "simple_symmetric"

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lam must be a positive finite rate, got {self.lam!r}")
        if self.kind != "simple_symmetric":
            raise ValueError(f"unsupported generator kind {self.kind!r}")

    def apply(self, v: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """``(P v)(x) = (v(x-1) + v(x+1)) / 2`` on a window whose edges are zero-padded."""
        out = np.zeros_like(v)
        out[1:] += 0.5 * v[:-1]
        out[:-1] += 0.5 * v[1:]
        return out


def step_coined(state: CoinedState, coin) -> CoinedState:
    """
    One step of ``U = S (I x C)``.

    The coin acts on every site, then coin ``+1`` moves right and ``-1`` moves
    left. The window grows by one site on each side so that the result again
    carries zero padding.

    Raises
    ------
    WindowOverflow
        If either boundary site of ``state`` holds amplitude.
    """
    c = np.asarray(coin, dtype=np.complex128)
    plus, minus = state.amp_plus, state.amp_minus
    if plus[0] or minus[0] or plus[-1] or minus[-1]:
        raise WindowOverflow(
            f"state on [{state.x_min}, {state.x_max}] has amplitude at its boundary; pad before stepping"
        )
    new_plus = c[0, 0] * plus + c[0, 1] * minus
    new_minus = c[1, 0] * plus + c[1, 1] * minus
    size = plus.size + 2
    out_plus = np.zeros(size, np.complex128)
    out_minus = np.zeros(size, np.complex128)
    # old site x sits at index x - x_min + 1 of the grown window
    out_plus[2:] = new_plus
    out_minus[:-2] = new_minus
    return CoinedState(state.x_min - 1, out_plus, out_minus)


def evolve_coined(init: CoinedState, coin, n: int) -> CoinedState:
    """``n`` coined steps; the result lives on ``[x_min - n, x_max + n]``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return init
    state = init.padded(init.x_min - 1, init.x_max + 1)
    for _ in range(n):
        state = step_coined(state, coin)
    return state.padded(init.x_min - n, init.x_max + n)


def taylor_order(scale: float, tol: float = _TAIL_TOL, cap: int = _MAX_ORDER) -> int:
    """
    Smallest ``K`` with ``scale**(K+1) / (K+1)! * exp(scale) < tol``.

    Raises
    ------
    NonConvergence
        If no ``K <= cap`` meets the bound.
    """
    scale = abs(scale)
    log_tol = math.log(tol)
    for k in range(cap + 1):
        log_tail = (k + 1) * math.log(scale) - math.lgamma(k + 2) + scale if scale > 0 else -math.inf
        if log_tail < log_tol:
            return k
    raise NonConvergence(f"Taylor tail for scale {scale:g} does not drop below {tol:g} within {cap} terms")


def evolve_continuous(init: ScalarState, gen: LatticeGenerator, t: float) -> ScalarState:
    """
    Apply ``exp(i lam P t)`` by a truncated Taylor series.

    ``P**k`` spreads amplitude at most ``k`` sites, so padding the window by the
    truncation order ``K`` makes the spatial cut exact; only the series tail
    contributes error.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return init
    scale = gen.lam * t
    order = taylor_order(scale)
    state = init.padded(init.x_min - order - 1, init.x_max + order + 1)
    term = state.amps.copy()
    total = term.copy()
    for k in range(1, order + 1):
        term = gen.apply(term) * (1j * scale / k)
        total += term
    if total[0] or total[-1]:
        raise WindowOverflow("continuous-time window too small for truncation order")
    return ScalarState(state.x_min, total)


def bessel_propagator(positions, scale: float) -> NDArray[np.complex128]:
    """Closed form ``i**x J_x(scale)`` of ``exp(i scale P)`` applied to a point mass at 0."""
    x = np.asarray(positions, dtype=np.int64)
    return (1j ** (x % 4)) * jv(x, scale)


def distribution(state: CoinedState | ScalarState) -> dict[int, float]:
    """Position probabilities ``|Psi(x,+1)|^2 + |Psi(x,-1)|^2`` (or ``|Psi(x)|^2``)."""
    if isinstance(state, CoinedState):
        probs = np.abs(state.amp_plus) ** 2 + np.abs(state.amp_minus) ** 2
    else:
        probs = np.abs(state.amps) ** 2
    return {int(x): float(p) for x, p in zip(state.positions, probs)}
