"""
Value types for walks on the integer line and the Euler-angle coin parameterization.

Coin-space convention
---------------------
Coin vectors are ordered ``(|+1>, |-1>)`` so that ``sigma3 |y> = y |y>`` and
``sigma2 |y> = i**y |-y>``. Every series and sampling formula in the package
is written against this ordering.

A coin is stored by its Euler angles ``(delta, lambda1, lambda2, lambda3)``::

    C = exp(i delta) . exp(i lambda1 sigma3) . exp(i lambda2 sigma2) . exp(i lambda3 sigma3)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import NonUnitaryInput, NotNormalized

__all__ = [
    "TWO_PI",
    "SIGMA2",
    "SIGMA3",
    "CoinSpec",
    "CoinedState",
    "ScalarState",
    "PointMassInitialState",
    "HADAMARD",
    "HADAMARD_SPEC",
    "SYMMETRIC_INIT",
    "coin_from_euler",
    "euler_decompose",
    "point_mass_state",
    "is_unitary",
]

TWO_PI = 2.0 * math.pi

SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)

# below this modulus an off-diagonal (or diagonal) coin entry carries no phase information
_DEGENERATE_TOL = 1e-12


def _reduce(angle: float) -> float:
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a value just below 2*pi can round up to exactly 2*pi
    return 0.0 if a >= TWO_PI else a


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CoinSpec:
    """Euler angles of a 2x2 unitary coin; all angles are reduced to ``[0, 2*pi)``."""

    delta: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0

    def __post_init__(self):
        for name in ("delta", "lambda1", "lambda2", "lambda3"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, _reduce(value))

    def matrix(self) -> NDArray[np.complex128]:
        return coin_from_euler(self)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.delta, self.lambda1, self.lambda2, self.lambda3)


HADAMARD_SPEC = CoinSpec(1.5 * math.pi, 0.5 * math.pi, 0.25 * math.pi, 0.0)


def coin_from_euler(spec: CoinSpec) -> NDArray[np.complex128]:
    """
    Build the coin matrix from its Euler angles.

    The product of the three exponentials is written out entrywise, which is
    exact to rounding and keeps ``H`` reproducible to ~1e-16 from
    :data:`HADAMARD_SPEC`.

    Parameters
    ----------
    spec : CoinSpec

    Returns
    -------
    NDArray[np.complex128]
        ``exp(i delta) exp(i l1 s3) exp(i l2 s2) exp(i l3 s3)`` in the ``(+1, -1)`` basis.
    """
    d, l1, l2, l3 = spec.as_tuple()
    c, s = math.cos(l2), math.sin(l2)
    e = np.exp
    return np.array(
        [
            [e(1j * (d + l1 + l3)) * c, e(1j * (d + l1 - l3)) * s],
            [-e(1j * (d - l1 + l3)) * s, e(1j * (d - l1 - l3)) * c],
        ],
        dtype=np.complex128,
    )


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or not np.all(np.isfinite(u)):
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(2))) <= tol)


def _mod_pi(angle: float) -> tuple[float, bool]:
    """Reduce to ``[0, pi)``; also report whether an odd multiple of pi was removed."""
    k = math.floor(angle / math.pi)
    a = angle - k * math.pi
    if a >= math.pi:
        a -= math.pi
        k += 1
    return a, bool(k % 2)


def euler_decompose(u) -> CoinSpec:
    """
    Recover Euler angles of a 2x2 unitary.

    The returned angles are canonical: ``lambda2`` in ``[0, pi/2]``, ``lambda1``
    and ``lambda3`` in ``[0, pi)`` and ``delta`` in ``[0, 2*pi)``. When
    ``lambda2`` is 0 or pi/2 only one combination of ``lambda1`` and
    ``lambda3`` is determined and ``lambda3`` is set to zero.

    Raises
    ------
    NonUnitaryInput
        If a column norm or the column overlap deviates by more than 1e-10.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise NonUnitaryInput(f"expected a 2x2 matrix, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise NonUnitaryInput("matrix has non-finite entries")
    gram = u.conj().T @ u
    dev = float(np.max(np.abs(gram - np.eye(2))))
    if dev > 1e-10:
        raise NonUnitaryInput(f"columns deviate from orthonormal by {dev:.3e} (> 1e-10)")

    half_det = np.sqrt(np.linalg.det(u))
    delta = float(np.angle(half_det))
    v = u / half_det  # special unitary: [[p, q], [-conj(q), conj(p)]]
    p, q = v[0, 0], v[0, 1]
    lam2 = math.atan2(abs(q), abs(p))

    if abs(q) < _DEGENERATE_TOL:
        lam1, lam3 = float(np.angle(p)), 0.0
    elif abs(p) < _DEGENERATE_TOL:
        lam1, lam3 = float(np.angle(q)), 0.0
    else:
        total, diff = float(np.angle(p)), float(np.angle(q))
        lam1, lam3 = 0.5 * (total + diff), 0.5 * (total - diff)

    # exp(i pi sigma3) = -I: each shift of lambda1 or lambda3 by pi flips the overall sign
    lam1, flip1 = _mod_pi(lam1)
    lam3, flip3 = _mod_pi(lam3)
    if flip1 != flip3:
        delta += math.pi
    return CoinSpec(delta, lam1, lam2, lam3)


@dataclass(frozen=True)
class PointMassInitialState:
    """Coin amplitudes ``alpha`` (coin +1) and ``beta`` (coin -1) at the origin."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")

    @property
    def norm_sq(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    def check_normalized(self, tol: float = 1e-10) -> None:
        if abs(self.norm_sq - 1.0) > tol:
            raise NotNormalized(
                f"|alpha|^2 + |beta|^2 = {self.norm_sq!r} deviates from 1 by more than {tol:g}"
            )


# under the Hadamard coin this start gives a left-right symmetric distribution
SYMMETRIC_INIT = PointMassInitialState(1.0 / math.sqrt(2.0), 1.0j / math.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class CoinedState:
    """
    Finitely supported amplitude map ``(x, y) -> Psi(x, y)`` on ``Z x {+1, -1}``.

    Sites ``x_min .. x_min + len(amp_plus) - 1`` are stored; everything outside
    the window is zero. Arrays are read-only.
    """

    x_min: int
    amp_plus: NDArray[np.complex128] = field(repr=False)
    amp_minus: NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        plus, minus = _frozen(self.amp_plus), _frozen(self.amp_minus)
        if plus.ndim != 1 or plus.shape != minus.shape or plus.size == 0:
            raise ValueError("amp_plus and amp_minus must be equal-length non-empty 1-D arrays")
        if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "x_min", int(self.x_min))
        object.__setattr__(self, "amp_plus", plus)
        object.__setattr__(self, "amp_minus", minus)

    @classmethod
    def zeros(cls, x_min: int, x_max: int) -> "CoinedState":
        size = x_max - x_min + 1
        return cls(x_min, np.zeros(size, np.complex128), np.zeros(size, np.complex128))

    @property
    def x_max(self) -> int:
        return self.x_min + self.amp_plus.size - 1

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.x_min, self.x_max + 1, dtype=np.int64)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amp_plus) ** 2) + np.sum(np.abs(self.amp_minus) ** 2))

    def amplitude(self, x: int, y: int) -> complex:
        if y not in (1, -1):
            raise ValueError(f"coin value must be +1 or -1, got {y!r}")
        if not self.x_min <= x <= self.x_max:
            return 0j
        arr = self.amp_plus if y == 1 else self.amp_minus
        return complex(arr[x - self.x_min])

    def padded(self, x_min: int, x_max: int) -> "CoinedState":
        """Re-window onto ``[x_min, x_max]``; dropping nonzero amplitude is an error."""
        lo, hi = min(x_min, self.x_min), max(x_max, self.x_max)
        plus = np.zeros(hi - lo + 1, np.complex128)
        minus = np.zeros_like(plus)
        off = self.x_min - lo
        plus[off : off + self.amp_plus.size] = self.amp_plus
        minus[off : off + self.amp_minus.size] = self.amp_minus
        a, b = x_min - lo, x_max - lo + 1
        if np.any(plus[:a]) or np.any(plus[b:]) or np.any(minus[:a]) or np.any(minus[b:]):
            raise ValueError(f"nonzero amplitude outside [{x_min}, {x_max}]")
        return CoinedState(x_min, plus[a:b], minus[a:b])

    def scaled(self, factor: complex) -> "CoinedState":
        return CoinedState(self.x_min, self.amp_plus * factor, self.amp_minus * factor)

    def to_vector(self) -> NDArray[np.complex128]:
        """Interleaved ``[plus(x_min), minus(x_min), plus(x_min+1), ...]``."""
        out = np.empty(2 * self.amp_plus.size, np.complex128)
        out[0::2] = self.amp_plus
        out[1::2] = self.amp_minus
        return out


@dataclass(frozen=True, eq=False)
class ScalarState:
    """Finitely supported amplitude map ``x -> Psi(x)`` for the continuous-time walk."""

    x_min: int
    amps: NDArray[np.complex128] = field(repr=False)

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amps must be a non-empty 1-D array")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "x_min", int(self.x_min))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def delta(cls, x0: int = 0) -> "ScalarState":
        return cls(x0, np.ones(1, np.complex128))

    @property
    def x_max(self) -> int:
        return self.x_min + self.amps.size - 1

    @property
    def positions(self) -> NDArray[np.int64]:
        return np.arange(self.x_min, self.x_max + 1, dtype=np.int64)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def amplitude(self, x: int) -> complex:
        if not self.x_min <= x <= self.x_max:
            return 0j
        return complex(self.amps[x - self.x_min])

    def padded(self, x_min: int, x_max: int) -> "ScalarState":
        lo, hi = min(x_min, self.x_min), max(x_max, self.x_max)
        amps = np.zeros(hi - lo + 1, np.complex128)
        off = self.x_min - lo
        amps[off : off + self.amps.size] = self.amps
        a, b = x_min - lo, x_max - lo + 1
        if np.any(amps[:a]) or np.any(amps[b:]):
            raise ValueError(f"nonzero amplitude outside [{x_min}, {x_max}]")
        return ScalarState(x_min, amps[a:b])


def point_mass_state(init: PointMassInitialState, radius: int = 0) -> CoinedState:
    """
    Place ``alpha`` at ``(0, +1)`` and ``beta`` at ``(0, -1)``.

    ``radius`` zero sites are added on each side of the origin.
    """
    init.check_normalized()
    if radius < 0:
        raise ValueError("radius must be non-negative")
    plus = np.zeros(2 * radius + 1, np.complex128)
    minus = np.zeros_like(plus)
    plus[radius] = init.alpha
    minus[radius] = init.beta
    return CoinedState(-radius, plus, minus)
