"""Discrete-event simulation of the allocation system.

Jobs arrive in one Poisson stream and are routed independently to
server i with probability p_i.  Each job crosses half the fixed path
delay, waits in a FIFO queue, is served (exponential, deterministic, or
gamma service matched on mean and coefficient of variation), and
crosses the return half of the delay; its latency is the full
send-to-receive time.  Queueing is resolved with the Lindley recursion
in vectorized form, so a run is a handful of array operations per
server rather than an event loop.

Runs are reproducible: every replication draws arrivals, routing, and
each server's service times from independent substreams derived from
the master seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, UnsupportedModelError
from .latency import QueueModel, ServerSpec
from .solver import AllocationKind, Scenario, solve_nep, solve_optimal

_ARRIVALS, _ROUTING, _SERVICE_BASE = 0, 1, 2


@dataclass(frozen=True)
class SimulationConfig:
    lam: float
    p: tuple[float, ...]
    horizon_jobs: int = 200_000
    warmup: float = 0.2
    seed: int = 0
    replications: int = 5
    raw_samples_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(q) for q in self.p))
        if not (self.lam > 0.0):
            raise DomainError(f"arrival rate must be > 0, got {self.lam}")
        if self.horizon_jobs <= 0:
            raise DomainError(f"horizon must be > 0 jobs, got {self.horizon_jobs}")
        if not (0.0 <= self.warmup <= 0.5):
            raise DomainError(f"warmup fraction must be in [0, 0.5], got {self.warmup}")
        if self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications}")
        if any(q < 0.0 for q in self.p) or abs(sum(self.p) - 1.0) > 1e-9:
            raise DomainError("routing probabilities must be non-negative and sum to 1")


@dataclass(frozen=True)
class ServerStats:
    mean_latency: float
    mean_sojourn: float
    utilization: float
    completed: int
    arrival_rate: float
    latency_ci: float


@dataclass(frozen=True)
class SimulationReport:
    per_server: tuple[ServerStats, ...]
    mean_latency: float
    mean_sojourn: float
    utilization: float
    completed: int
    latency_ci: float
    overloaded: bool
    replications: int


@dataclass(frozen=True)
class ValidationRecord:
    kind: AllocationKind
    lam: float
    analytic_latency: float
    empirical_latency: float
    latency_ci: float
    relative_gap: float
    tolerance: float
    passed: bool
    report: SimulationReport | None = field(repr=False, compare=False, default=None)


def _rng(seed: int, rep: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, rep, purpose)))


def _service_times(s: ServerSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    if s.model is QueueModel.MM1:
        return rng.exponential(1.0 / s.mu, size=count)
    if s.model is QueueModel.MD1 or s.cv == 0.0:
        return np.full(count, 1.0 / s.mu)
    if s.model is QueueModel.MG1:
        shape = 1.0 / (s.cv * s.cv)
        return rng.gamma(shape, s.cv * s.cv / s.mu, size=count)
    raise UnsupportedModelError("generic latency models define no service distribution")


def _one_replication(sc: Scenario, cfg: SimulationConfig, rep: int):
    n = len(sc.servers)
    n_jobs = cfg.horizon_jobs
    arrivals = np.cumsum(_rng(cfg.seed, rep, _ARRIVALS).exponential(1.0 / cfg.lam, size=n_jobs))
    p = np.asarray(cfg.p)
    choice = _rng(cfg.seed, rep, _ROUTING).choice(n, size=n_jobs, p=p / p.sum())

    cutoff = int(cfg.warmup * n_jobs)
    window = arrivals[-1] - (arrivals[cutoff] if cutoff > 0 else 0.0)

    lat_sum = np.zeros(n)
    soj_sum = np.zeros(n)
    busy = np.zeros(n)
    kept = np.zeros(n, dtype=int)
    raw: list[tuple[int, int, float, float]] = []

    for k, s in enumerate(sc.servers):
        idx = np.nonzero(choice == k)[0]
        if idx.size == 0:
            continue
        t_in = arrivals[idx] + 0.5 * s.d
        service = _service_times(s, idx.size, _rng(cfg.seed, rep, _SERVICE_BASE + k))
        # Lindley recursion: depart_i = C_i + max_{j<=i} (t_j - C_{j-1})
        csum = np.cumsum(service)
        depart = csum + np.maximum.accumulate(t_in - (csum - service))
        sojourn = depart - t_in
        latency = sojourn + s.d

        keep = idx >= cutoff
        lat_sum[k] = latency[keep].sum()
        soj_sum[k] = sojourn[keep].sum()
        busy[k] = service[keep].sum()
        kept[k] = int(keep.sum())
        if cfg.raw_samples_path is not None:
            for j, d_t, l_t in zip(idx[keep], depart[keep] + 0.5 * s.d, latency[keep]):
                raw.append((int(j), k, float(d_t), float(l_t)))

    if cfg.raw_samples_path is not None:
        path = cfg.raw_samples_path
        if cfg.replications > 1:
            stem, dot, ext = path.rpartition(".")
            path = f"{stem}.rep{rep}.{ext}" if dot else f"{path}.rep{rep}"
        raw.sort()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["job_id", "server", "depart_time", "latency_s"])
            writer.writerows(raw)

    return lat_sum, soj_sum, busy, kept, window


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    """Mean and 95% confidence half-width across replications, NaN-aware."""
    values = values[~np.isnan(values)]
    if values.size == 0:
        return math.nan, math.nan
    mean = float(values.mean())
    if values.size == 1:
        return mean, math.nan
    half = float(stats.t.ppf(0.975, values.size - 1) * values.std(ddof=1) / math.sqrt(values.size))
    return mean, half


def simulate(sc: Scenario, cfg: SimulationConfig) -> SimulationReport:
    """Run ``cfg.replications`` independent replications and aggregate."""
    n = len(sc.servers)
    if len(cfg.p) != n:
        raise DomainError(f"routing vector has {len(cfg.p)} entries for {n} servers")
    overloaded = any(q * cfg.lam >= s.mu for q, s in zip(cfg.p, sc.servers))

    reps = cfg.replications
    lat_mean = np.full((reps, n), np.nan)
    soj_mean = np.full((reps, n), np.nan)
    util = np.zeros((reps, n))
    rate = np.zeros((reps, n))
    agg_lat = np.zeros(reps)
    agg_soj = np.zeros(reps)
    agg_util = np.zeros(reps)
    counts = np.zeros((reps, n), dtype=int)

    for r in range(reps):
        lat_sum, soj_sum, busy, kept, window = _one_replication(sc, cfg, r)
        got = kept > 0
        lat_mean[r, got] = lat_sum[got] / kept[got]
        soj_mean[r, got] = soj_sum[got] / kept[got]
        util[r] = busy / window
        rate[r] = kept / window
        counts[r] = kept
        agg_lat[r] = lat_sum.sum() / kept.sum()
        agg_soj[r] = soj_sum.sum() / kept.sum()
        agg_util[r] = busy.sum() / (n * window)

    per_server = []
    for k in range(n):
        mean_k, ci_k = _mean_ci(lat_mean[:, k])
        soj_k, _ = _mean_ci(soj_mean[:, k])
        per_server.append(
            ServerStats(
                mean_latency=mean_k,
                mean_sojourn=soj_k,
                utilization=float(util[:, k].mean()),
                completed=int(counts[:, k].sum()),
                arrival_rate=float(rate[:, k].mean()),
                latency_ci=ci_k,
            )
        )
    agg_mean, agg_ci = _mean_ci(agg_lat)
    return SimulationReport(
        per_server=tuple(per_server),
        mean_latency=agg_mean,
        mean_sojourn=float(agg_soj.mean()),
        utilization=float(agg_util.mean()),
        completed=int(counts.sum()),
        latency_ci=agg_ci,
        overloaded=overloaded,
        replications=reps,
    )


def validate(
    sc: Scenario,
    lam: float,
    kind: AllocationKind,
    cfg: SimulationConfig | None = None,
    tolerance: float = 0.03,
) -> ValidationRecord:
    """Compare a solver's predicted latency against a simulation of its split."""
    solver = solve_optimal if kind is AllocationKind.OPTIMAL else solve_nep
    result = solver(sc, lam)
    if cfg is None:
        cfg = SimulationConfig(lam=lam, p=tuple(result.p))
    else:
        cfg = SimulationConfig(
            lam=lam,
            p=tuple(result.p),
            horizon_jobs=cfg.horizon_jobs,
            warmup=cfg.warmup,
            seed=cfg.seed,
            replications=cfg.replications,
            raw_samples_path=cfg.raw_samples_path,
        )
    report = simulate(sc, cfg)
    gap = abs(report.mean_latency - result.mean_latency) / result.mean_latency
    return ValidationRecord(
        kind=kind,
        lam=lam,
        analytic_latency=result.mean_latency,
        empirical_latency=report.mean_latency,
        latency_ci=report.latency_ci,
        relative_gap=gap,
        tolerance=tolerance,
        passed=bool(gap <= tolerance),
        report=report,
    )
