"""Chaotic 1D maps used as neurons, neural traces, and Lyapunov exponents.

Two maps are supported: the skew-tent map (a Generalized Luroth Series map,
referred to as GLS throughout the package) and the logistic map.  Both act
on the unit interval.  Images that would round to exactly 1.0 are clamped
to ``1 - 2**-52`` so iterates never leave ``[0, 1)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .exceptions import DomainError, ParameterError

log = logging.getLogger(__name__)

#: Largest value an iterate may take; 1.0 itself is mapped here.
UPPER_CLAMP = 1.0 - 2.0**-52

DEFAULT_CAP = 10_000
NEURON_LOGISTIC_R = 4.0


class MapKind(str, Enum):
    SKEW_TENT = "skew_tent"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class ChaoticMap:
    """A skew-tent map with branch point ``skew`` or a logistic map with parameter ``r``.

    Only the field relevant to ``kind`` is used.
    """

    kind: MapKind
    skew: float = 0.5
    r: float = NEURON_LOGISTIC_R

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        if self.kind is MapKind.SKEW_TENT:
            if not 0.0 < self.skew < 1.0:
                raise ParameterError(f"skew-tent skew must lie in (0, 1), got {self.skew}")
        elif not 0.0 < self.r <= 4.0:
            raise ParameterError(f"logistic r must lie in (0, 4], got {self.r}")

    @classmethod
    def skew_tent(cls, skew: float) -> "ChaoticMap":
        return cls(MapKind.SKEW_TENT, skew=skew)

    @classmethod
    def logistic(cls, r: float = NEURON_LOGISTIC_R) -> "ChaoticMap":
        return cls(MapKind.LOGISTIC, r=r)

    def __call__(self, state: float) -> float:
        return map_step(self, state)


@dataclass(frozen=True)
class Hyperparams:
    """Initial neural activity ``q``, discrimination threshold ``b``, detection radius ``epsilon``."""

    q: float
    b: float
    epsilon: float

    def __post_init__(self):
        for name in ("q", "b", "epsilon"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ParameterError(f"{name} must lie strictly inside (0, 1), got {value}")

    def as_dict(self) -> dict:
        return {"q": self.q, "b": self.b, "epsilon": self.epsilon}


@dataclass(frozen=True, eq=False)
class NeuralTrace:
    """Trajectory ``[q, f(q), f^2(q), ...]`` of one neuron for one stimulus.

    ``firing_time`` equals ``len(values)``.  ``detected`` is False when the
    iteration cap was hit before the trace entered the epsilon-ball.
    """

    values: np.ndarray
    detected: bool

    @property
    def firing_time(self) -> int:
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, NeuralTrace):
            return NotImplemented
        return self.detected == other.detected and np.array_equal(self.values, other.values)


def _stepper(cmap: ChaoticMap) -> Callable[[float], float]:
    # Unchecked single-step function; every iteration path in the package goes
    # through this so traces computed by different routes are bit-identical.
    if cmap.kind is MapKind.SKEW_TENT:
        b = cmap.skew
        one_minus_b = 1.0 - b

        def step(z: float) -> float:
            nxt = z / b if z < b else (1.0 - z) / one_minus_b
            return UPPER_CLAMP if nxt >= 1.0 else nxt

    else:
        r = cmap.r

        def step(x: float) -> float:
            nxt = r * x * (1.0 - x)
            return UPPER_CLAMP if nxt >= 1.0 else nxt

    return step


def map_step(cmap: ChaoticMap, state: float) -> float:
    """Apply the map once to ``state`` in ``[0, 1)``."""
    if not 0.0 <= state < 1.0:
        raise DomainError(f"state must lie in [0, 1), got {state}")
    return _stepper(cmap)(state)


def iterate(cmap: ChaoticMap, x0: float, length: int) -> np.ndarray:
    """Return ``[x0, f(x0), ..., f^(length-1)(x0)]`` as a float64 array."""
    step = _stepper(cmap)
    out = np.empty(length, dtype=np.float64)
    x = float(x0)
    for i in range(length):
        out[i] = x
        x = step(x)
    return out


def generate_trace(
    cmap: ChaoticMap,
    q: float,
    stimulus: float,
    epsilon: float,
    cap: int = DEFAULT_CAP,
) -> NeuralTrace:
    """Iterate from ``q`` until an iterate is strictly within ``epsilon`` of ``stimulus``.

    The returned trace includes the detecting iterate.  If no iterate among the
    first ``cap`` qualifies, the trace holds exactly ``cap`` values and
    ``detected`` is False.
    """
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie strictly inside (0, 1), got {q}")
    if not 0.0 < epsilon < 1.0:
        raise ParameterError(f"epsilon must lie strictly inside (0, 1), got {epsilon}")
    if not 0.0 <= stimulus <= 1.0:
        raise DomainError(f"stimulus must be normalized to [0, 1], got {stimulus}")
    if cap < 1:
        raise ParameterError(f"cap must be >= 1, got {cap}")

    step = _stepper(cmap)
    values = []
    x = float(q)
    for _ in range(cap):
        values.append(x)
        if abs(x - stimulus) < epsilon:
            return NeuralTrace(np.array(values), True)
        x = step(x)
    return NeuralTrace(np.array(values), False)


def lyapunov(
    cmap: ChaoticMap,
    x0: float,
    iterations: int = 1_000_000,
    burn_in: int = 0,
) -> float:
    """Average of ``ln|G'(x_j)|`` over ``iterations`` iterates following ``burn_in`` transient steps.

    Iterates where the derivative is undefined (the skew-tent branch point) or
    zero (logistic at 0.5) are skipped and replaced by one extra iterate.
    """
    if not 0.0 < x0 < 1.0:
        raise DomainError(f"x0 must lie in (0, 1), got {x0}")
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")

    step = _stepper(cmap)
    x = float(x0)
    for _ in range(burn_in):
        x = step(x)

    ln = math.log
    total = 0.0
    skipped = 0
    counted = 0
    # Separate loops per kind keep 10**6 iterations well under a second.
    if cmap.kind is MapKind.SKEW_TENT:
        b = cmap.skew
        left = ln(1.0 / b)
        right = ln(1.0 / (1.0 - b))
        n_left = n_right = 0
        while counted < iterations:
            if x < b:
                n_left += 1
                counted += 1
            elif x == b:
                skipped += 1
            else:
                n_right += 1
                counted += 1
            x = step(x)
        total = n_left * left + n_right * right
    else:
        r = cmap.r
        while counted < iterations:
            d = abs(r * (1.0 - 2.0 * x))
            if d == 0.0:
                skipped += 1
            else:
                total += ln(d)
                counted += 1
            x = step(x)

    if skipped:
        log.info("lyapunov: skipped %d non-differentiable iterates", skipped)
    return total / iterations


def skew_tent_lyapunov_exact(b: float) -> float:
    """Closed-form exponent ``-b ln b - (1-b) ln(1-b)`` of the skew-tent map."""
    return -b * math.log(b) - (1.0 - b) * math.log(1.0 - b)
