"""Per-server latency models.

Each server is described by a fixed two-way path delay ``d`` (seconds), a
service rate ``mu`` (jobs/second) and, for the general single-server queue,
the coefficient of variation ``cv`` of its service time.  The mean latency
seen by traffic offered at rate ``x`` is

    l(x) = d + (1/mu) * (1 + (1 + cv^2)/2 * x / (mu - x))

which reduces to ``d + 1/(mu - x)`` for cv=1 (exponential service) and to
the deterministic-service form for cv=0.  The marginal cost

    h(x) = l(x) + x * l'(x)

is the quantity equalized across active servers at the socially optimal
split.  Both functions are strictly increasing and convex on [0, mu) and
are inverted in closed form; user-supplied models fall back to bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import DomainError, SaturationError

EPS_SAT = 1e-9  # evaluations are kept at or below mu * (1 - EPS_SAT)
DEFAULT_RESOLUTION = 1e-12  # rate-axis resolution of numeric inversions


class QueueModel(str, Enum):
    MM1 = "mm1"
    MG1 = "mg1"
    MD1 = "md1"
    GENERIC = "generic"


@dataclass(frozen=True)
class GenericLatencyModel:
    """User-supplied latency curve and its analytic derivative.

    ``latency_fn`` maps an offered rate in [0, mu) to seconds and must be
    strictly increasing and convex with latency_fn(0) = d + 1/mu;
    ``derivative_fn`` is its exact derivative (no finite differences, so
    that l + x*l' stays exactly monotone for the solver).
    """

    latency_fn: Callable[[float], float]
    derivative_fn: Callable[[float], float]


@dataclass(frozen=True)
class ServerSpec:
    """One reachable server.

    d: fixed two-way path delay, seconds.
    mu: service rate, jobs/second.
    cv: coefficient of variation of the service time (1 for MM1, 0 for MD1).
    """

    d: float
    mu: float
    cv: float = 1.0
    model: QueueModel = QueueModel.MM1
    generic: GenericLatencyModel | None = None

    def __post_init__(self):
        if not (self.d >= 0.0):
            raise ValueError(f"delay must be >= 0, got {self.d}")
        if not (self.mu > 0.0):
            raise ValueError(f"service rate must be > 0, got {self.mu}")
        if not (self.cv >= 0.0):
            raise ValueError(f"cv must be >= 0, got {self.cv}")
        if self.model is QueueModel.MM1 and self.cv != 1.0:
            raise ValueError("MM1 requires cv = 1")
        if self.model is QueueModel.MD1 and self.cv != 0.0:
            raise ValueError("MD1 requires cv = 0")
        if (self.generic is not None) != (self.model is QueueModel.GENERIC):
            raise ValueError("generic latency functions go with model=GENERIC only")

    @classmethod
    def mm1(cls, d: float, mu: float) -> "ServerSpec":
        return cls(d, mu, 1.0, QueueModel.MM1)

    @classmethod
    def md1(cls, d: float, mu: float) -> "ServerSpec":
        return cls(d, mu, 0.0, QueueModel.MD1)

    @classmethod
    def mg1(cls, d: float, mu: float, cv: float) -> "ServerSpec":
        return cls(d, mu, cv, QueueModel.MG1)

    @classmethod
    def from_functions(
        cls,
        d: float,
        mu: float,
        latency_fn: Callable[[float], float],
        derivative_fn: Callable[[float], float],
    ) -> "ServerSpec":
        return cls(d, mu, 1.0, QueueModel.GENERIC, GenericLatencyModel(latency_fn, derivative_fn))


def zero_load_latency(s: ServerSpec) -> float:
    """Latency of an empty server: path delay plus one service interval."""
    return s.d + 1.0 / s.mu


def _check_rate(s: ServerSpec, x: float) -> None:
    if not (0.0 <= x < s.mu):
        raise DomainError(f"rate {x} outside the stable region [0, {s.mu})")


def latency(s: ServerSpec, x: float) -> float:
    """Mean latency l(x) of server ``s`` under offered rate ``x``."""
    _check_rate(s, x)
    if s.model is QueueModel.MM1:
        return s.d + 1.0 / (s.mu - x)
    if s.model is QueueModel.GENERIC:
        return s.generic.latency_fn(x)
    a = 0.5 * (1.0 + s.cv * s.cv)
    return s.d + (1.0 + a * x / (s.mu - x)) / s.mu


def latency_slope(s: ServerSpec, x: float) -> float:
    """First derivative l'(x), seconds per (jobs/second)."""
    _check_rate(s, x)
    if s.model is QueueModel.MM1:
        g = s.mu - x
        return 1.0 / (g * g)
    if s.model is QueueModel.GENERIC:
        return s.generic.derivative_fn(x)
    a = 0.5 * (1.0 + s.cv * s.cv)
    g = s.mu - x
    return a / (g * g)


def marginal_cost(s: ServerSpec, x: float) -> float:
    """Marginal cost h(x) = l(x) + x * l'(x); equals l(0) at x=0."""
    _check_rate(s, x)
    if s.model is QueueModel.MM1:
        g = s.mu - x
        return s.d + s.mu / (g * g)
    if s.model is QueueModel.GENERIC:
        return s.generic.latency_fn(x) + x * s.generic.derivative_fn(x)
    a = 0.5 * (1.0 + s.cv * s.cv)
    g = s.mu - x
    return s.d + (1.0 + a * (2.0 * s.mu - x) * x / (g * g)) / s.mu


def invert_latency(
    s: ServerSpec,
    target: float,
    resolution: float = DEFAULT_RESOLUTION,
    eps_sat: float = EPS_SAT,
) -> float:
    """Rate x with l(x) = target.  Requires target > l(0)."""
    if target <= zero_load_latency(s):
        raise DomainError(f"target {target} not above the zero-load latency {zero_load_latency(s)}")
    if s.model is QueueModel.MM1:
        return s.mu - 1.0 / (target - s.d)
    if s.model is QueueModel.GENERIC:
        return _bisect_rate(s.generic.latency_fn, target, s.mu * (1.0 - eps_sat), resolution)
    a = 0.5 * (1.0 + s.cv * s.cv)
    w = s.mu * (target - s.d) - 1.0
    return s.mu * w / (a + w)


def invert_marginal(
    s: ServerSpec,
    target: float,
    resolution: float = DEFAULT_RESOLUTION,
    eps_sat: float = EPS_SAT,
) -> float:
    """Rate x with h(x) = target.  Requires target > h(0) = l(0)."""
    if target <= zero_load_latency(s):
        raise DomainError(f"target {target} not above the zero-load marginal cost {zero_load_latency(s)}")
    if s.model is QueueModel.MM1:
        return s.mu - math.sqrt(s.mu / (target - s.d))
    if s.model is QueueModel.GENERIC:
        fn = s.generic.latency_fn
        fd = s.generic.derivative_fn
        return _bisect_rate(lambda x: fn(x) + x * fd(x), target, s.mu * (1.0 - eps_sat), resolution)
    a = 0.5 * (1.0 + s.cv * s.cv)
    w = s.mu * (target - s.d) - 1.0
    return s.mu * (1.0 - 1.0 / math.sqrt(1.0 + w / a))


def _bisect_rate(fn, target: float, hi: float, resolution: float) -> float:
    """Solve fn(x) = target for increasing fn on [0, hi] by bisection."""
    if fn(hi) < target:
        raise SaturationError(
            f"target {target} exceeds the model's value {fn(hi)} at the saturation guard"
        )
    lo = 0.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
