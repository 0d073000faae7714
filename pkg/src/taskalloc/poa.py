"""Price of anarchy of selfish task allocation.

The price of anarchy eta(lam) = alpha / U(p*) compares the average
latency at the Nash equilibrium with the optimal average latency at the
same arrival rate.  It equals 1 while a single server is active, grows
as selfish traffic delays the activation of slower servers, and tends
to a closed-form limit as the system approaches saturation.  Because
the curve is piecewise convex between consecutive equilibrium
activation thresholds, its maximum over all loads is attained either at
one of those thresholds or in the full-load limit, so the worst case is
found by evaluating a finite candidate set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedModelError
from .solver import (
    AllocationKind,
    Scenario,
    activation_thresholds,
    solve_nep,
    solve_optimal,
)

FULL_LOAD = "full-load limit"
GENERIC_LIMIT_RHO = 1.0 - 1e-6


@dataclass(frozen=True)
class PoaPoint:
    lam: float
    rho: float
    eta: float
    alpha: float
    u_opt: float
    j_opt: int
    j_nep: int


@dataclass(frozen=True)
class PoaCurve:
    points: tuple[PoaPoint, ...]


@dataclass(frozen=True)
class PoaCandidate:
    """One worst-case candidate: a named location, its load, its eta.

    ``lam`` is None for the full-load limit of a closed-form scenario,
    where eta comes from the asymptotic expression rather than a solve.
    """

    location: str
    lam: float | None
    eta: float


@dataclass(frozen=True)
class WorstCaseResult:
    max: PoaCandidate
    candidates: tuple[PoaCandidate, ...]


def poa_at(sc: Scenario, lam: float) -> PoaPoint:
    """Price of anarchy at one arrival rate."""
    opt = solve_optimal(sc, lam)
    nep = solve_nep(sc, lam)
    return PoaPoint(
        lam=lam,
        rho=lam / sc.total_mu,
        eta=nep.mean_latency / opt.mean_latency,
        alpha=nep.multiplier,
        u_opt=opt.mean_latency,
        j_opt=opt.active_count,
        j_nep=nep.active_count,
    )


def default_grid(sc: Scenario, count: int = 400, rho_lo: float = 0.01, rho_hi: float = 0.999) -> np.ndarray:
    """Load grid log-spaced in 1 - rho, to resolve the near-saturation rise."""
    gap = np.logspace(math.log10(1.0 - rho_lo), math.log10(1.0 - rho_hi), count)
    return sc.total_mu * (1.0 - gap)


def poa_sweep(sc: Scenario, grid) -> PoaCurve:
    """Price of anarchy over a strictly increasing grid of arrival rates."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence of arrival rates")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    return PoaCurve(points=tuple(poa_at(sc, float(lam)) for lam in grid))


def asymptotic_poa(sc: Scenario) -> float:
    """Closed-form limit of eta as the load approaches total capacity.

    Valid for the closed-form queue family; with a_j = (1 + cv_j^2)/2 the
    limit is (sum_j a_j) * (sum_j mu_j) / (sum_j sqrt(mu_j a_j))^2, which
    for all-exponential servers reduces to n * sum mu / (sum sqrt(mu))^2.
    """
    if sc.has_generic():
        raise UnsupportedModelError("no closed-form full-load limit for generic latency models")
    a = [0.5 * (1.0 + s.cv * s.cv) for s in sc.servers]
    root_sum = sum(math.sqrt(s.mu * aj) for s, aj in zip(sc.servers, a))
    return sum(a) * sc.total_mu / (root_sum * root_sum)


def worst_case_poa(sc: Scenario) -> WorstCaseResult:
    """Maximum of eta over all loads, from the finite candidate set.

    Candidates are the equilibrium activation thresholds of servers
    2..n (servers tied with the first activate at load 0, where eta is
    1, and are skipped) plus the full-load limit.
    """
    table = activation_thresholds(sc, AllocationKind.NEP)
    candidates: list[PoaCandidate] = []
    seen: set[float] = set()
    for j in range(1, len(table.loads)):
        lam = min(table.loads[j], sc.load_cap)
        if lam <= 0.0 or lam in seen:
            continue
        seen.add(lam)
        point = poa_at(sc, lam)
        candidates.append(
            PoaCandidate(location=f"nep activation of server {j + 1}", lam=lam, eta=point.eta)
        )
    if sc.has_generic():
        lam = GENERIC_LIMIT_RHO * sc.total_mu
        candidates.append(PoaCandidate(location=FULL_LOAD, lam=lam, eta=poa_at(sc, lam).eta))
    else:
        candidates.append(PoaCandidate(location=FULL_LOAD, lam=None, eta=asymptotic_poa(sc)))
    best = max(candidates, key=lambda c: c.eta)
    return WorstCaseResult(max=best, candidates=tuple(candidates))
