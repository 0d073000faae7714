"""Ordering, activation thresholds, and the two equalization solvers."""

import math

import numpy as np
import pytest

from taskalloc import (
    AllocationKind,
    InfeasibleLoadError,
    Scenario,
    ServerSpec,
    activation_thresholds,
    average_latency,
    latency,
    marginal_cost,
    solve_nep,
    solve_optimal,
    sort_servers,
    zero_load_latency,
)

from conftest import random_loads, random_scenario
from test_latency import as_generic

TOL = 10e-12  # 10 times the default resolution

SCENARIO1 = Scenario((ServerSpec.mm1(0.040, 15.0), ServerSpec.mm1(0.030, 9.0),
                      ServerSpec.mm1(0.150, 20.0)))


def test_sort_servers_examples():
    assert sort_servers(SCENARIO1) == (0, 1, 2)
    two = Scenario((ServerSpec.mm1(0.030, 9.0), ServerSpec.mm1(0.040, 15.0)))
    assert sort_servers(two) == (1, 0)
    assert sort_servers(Scenario((ServerSpec.mm1(0.0, 1.0),))) == (0,)


def test_sort_is_stable_on_ties():
    sc = Scenario((ServerSpec.mm1(0.1, 5.0), ServerSpec.mm1(0.1, 5.0),
                   ServerSpec.mm1(0.0, 2.0)))
    assert sort_servers(sc) == (0, 1, 2)


def test_threshold_examples(toy):
    topt = activation_thresholds(toy, AllocationKind.OPTIMAL)
    tnep = activation_thresholds(toy, AllocationKind.NEP)
    assert topt.loads[0] == 0.0 and tnep.loads[0] == 0.0
    assert topt.loads[1] == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-13)
    assert tnep.loads[1] == pytest.approx(1.0, rel=1e-13)

    s1 = activation_thresholds(SCENARIO1, AllocationKind.OPTIMAL)
    assert s1.loads[0] == 0.0

    twins = Scenario((ServerSpec.mm1(0.01, 3.0), ServerSpec.mm1(0.01, 3.0)))
    for kind in AllocationKind:
        assert activation_thresholds(twins, kind).loads == (0.0, 0.0)


def test_scenario1_threshold_values():
    topt = activation_thresholds(SCENARIO1, AllocationKind.OPTIMAL)
    tnep = activation_thresholds(SCENARIO1, AllocationKind.NEP)
    assert np.allclose(topt.loads, [0.0, 2.8200308558827465, 7.041472883391469], rtol=1e-12)
    assert np.allclose(tnep.loads, [0.0, 5.109890109890108, 11.867647058823529], rtol=1e-12)


def test_solve_optimal_examples(toy):
    res = solve_optimal(toy, 1.0)
    assert res.p == pytest.approx([0.8284271247461901, 0.17157287525380982], abs=1e-9)
    assert res.multiplier == pytest.approx(1.4571067811865475, rel=1e-10)
    assert res.mean_latency == pytest.approx(0.9142135623730949, rel=1e-10)
    assert res.active_count == 2

    single = Scenario((ServerSpec.mm1(0.02, 10.0),))
    res = solve_optimal(single, 4.0)
    assert res.p == pytest.approx([1.0], abs=0.0)
    assert res.mean_latency == pytest.approx(0.02 + 1.0 / 6.0, rel=1e-14)

    twins = Scenario((ServerSpec.mm1(0.0, 1.0), ServerSpec.mm1(0.0, 1.0)))
    res = solve_optimal(twins, 1.0)
    assert res.p == pytest.approx([0.5, 0.5], abs=1e-12)
    assert res.mean_latency == pytest.approx(2.0, rel=1e-12)


def test_solve_nep_examples(toy):
    res = solve_nep(toy, 1.5)
    assert res.multiplier == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert res.p == pytest.approx([5.0 / 6.0, 1.0 / 6.0], abs=1e-10)

    # at the exact activation threshold the new server still idles
    res = solve_nep(toy, 1.0)
    assert res.active_count == 1
    assert res.p[1] == 0.0
    assert res.multiplier == pytest.approx(1.0, rel=1e-13)

    twins = Scenario((ServerSpec.mm1(0.0, 1.0), ServerSpec.mm1(0.0, 1.0)))
    res = solve_nep(twins, 1.0)
    assert res.p == pytest.approx([0.5, 0.5], abs=1e-12)
    assert res.mean_latency == pytest.approx(2.0, rel=1e-12)


def test_optimal_boundary_convention(toy):
    lam = 2.0 - math.sqrt(2.0)
    res = solve_optimal(toy, lam)
    assert res.active_count == 1
    assert res.p[1] == 0.0


def test_average_latency_examples(toy):
    assert average_latency(toy, [1.0, 0.0], 1.0) == pytest.approx(1.0, rel=1e-15)
    assert average_latency(toy, [1.0, 0.0], 1e-9) == pytest.approx(0.5, rel=1e-6)
    p_star = [0.8284271247461901, 0.17157287525380982]
    assert average_latency(toy, p_star, 1.0) == pytest.approx(0.9142135623730949, rel=1e-12)


def test_average_latency_errors(toy):
    from taskalloc import DomainError
    with pytest.raises(DomainError):
        average_latency(toy, [0.2, 0.8], 1.5)  # second server overloaded
    with pytest.raises(DomainError):
        average_latency(toy, [0.7, 0.7], 1.0)  # not on the simplex


def test_infeasible_loads(toy):
    for lam in (0.0, -1.0, 3.0, 2.9999999999):
        with pytest.raises(InfeasibleLoadError):
            solve_optimal(toy, lam)
        with pytest.raises(InfeasibleLoadError):
            solve_nep(toy, lam)


def test_results_reported_in_input_order():
    shuffled = Scenario((SCENARIO1.servers[2], SCENARIO1.servers[0], SCENARIO1.servers[1]))
    assert sort_servers(shuffled) == (1, 2, 0)
    lam = 20.0
    base = solve_optimal(SCENARIO1, lam)
    perm = solve_optimal(shuffled, lam)
    assert perm.p[1] == pytest.approx(base.p[0], rel=1e-12)
    assert perm.p[2] == pytest.approx(base.p[1], rel=1e-12)
    assert perm.p[0] == pytest.approx(base.p[2], rel=1e-12)
    assert perm.multiplier == pytest.approx(base.multiplier, rel=1e-12)


def _check_kkt(sc, lam, res):
    gamma = res.multiplier
    order = res.order
    for pos, idx in enumerate(order):
        s = sc.servers[idx]
        x = res.p[idx] * lam
        if pos < res.active_count:
            assert res.p[idx] > 0.0
            assert abs(marginal_cost(s, x) - gamma) <= TOL * max(1.0, gamma)
        else:
            assert res.p[idx] == 0.0
            assert zero_load_latency(s) >= gamma - TOL * max(1.0, gamma)


def test_kkt_and_equalization_on_corpus(corpus):
    for sc, loads in corpus:
        for lam in loads:
            opt = solve_optimal(sc, lam)
            assert abs(float(opt.p.sum()) - 1.0) <= TOL
            assert np.all(opt.p >= 0.0)
            assert np.all(opt.p * lam < [s.mu for s in sc.servers])
            _check_kkt(sc, lam, opt)

            nep = solve_nep(sc, lam)
            alpha = nep.multiplier
            assert abs(float(nep.p.sum()) - 1.0) <= TOL
            for pos, idx in enumerate(nep.order):
                s = sc.servers[idx]
                if pos < nep.active_count:
                    lat = latency(s, nep.p[idx] * lam)
                    assert abs(lat - alpha) <= TOL * max(1.0, alpha)
                else:
                    assert zero_load_latency(s) >= alpha - TOL * max(1.0, alpha)

            # multiplier bounds and the optimality gap between the two regimes
            assert opt.mean_latency <= opt.multiplier + TOL
            assert opt.multiplier > nep.multiplier
            assert opt.mean_latency <= nep.mean_latency + TOL


def test_perturbations_never_beat_the_optimum(corpus):
    rng = np.random.default_rng(3)
    for sc, loads in corpus[:15]:
        lam = float(loads[0])
        res = solve_optimal(sc, lam)
        u_star = res.mean_latency
        n = len(sc.servers)
        caps = np.array([s.mu * (1.0 - sc.config.eps_sat) for s in sc.servers])
        for _ in range(20):
            i, j = rng.choice(n, size=2, replace=False)
            step = min(1e-3, res.p[i], (caps[j] - res.p[j] * lam) / lam)
            if step <= 0.0:
                continue
            q = res.p.copy()
            q[i] -= step
            q[j] += step
            assert average_latency(sc, q, lam) >= u_star - 1e-9


def test_nep_thresholds_dominate_optimal_on_corpus(corpus):
    for sc, _ in corpus:
        topt = activation_thresholds(sc, AllocationKind.OPTIMAL)
        tnep = activation_thresholds(sc, AllocationKind.NEP)
        assert topt.loads[0] == 0.0 and tnep.loads[0] == 0.0
        assert all(b >= a for a, b in zip(topt.loads, topt.loads[1:]))
        assert all(b >= a for a, b in zip(tnep.loads, tnep.loads[1:]))
        for opt_thr, nep_thr in zip(topt.loads, tnep.loads):
            if opt_thr == 0.0:
                assert nep_thr == 0.0
            else:
                assert nep_thr > opt_thr


def test_monotone_activation(corpus):
    for sc, _ in corpus[:10]:
        grid = np.linspace(0.01, 0.99, 40) * sc.total_mu
        for solver in (solve_optimal, solve_nep):
            counts = [solver(sc, lam).active_count for lam in grid]
            assert all(b >= a for a, b in zip(counts, counts[1:]))
            for lam, count in zip(grid, counts):
                res = solver(sc, lam)
                loaded = [idx for pos, idx in enumerate(res.order) if res.p[idx] > 0.0]
                assert set(loaded) == set(res.order[:count])


def test_generic_solve_matches_closed_form():
    sc = SCENARIO1
    gen = Scenario(tuple(as_generic(s) for s in sc.servers))
    for lam in (3.0, 10.0, 25.0, 40.0):
        for solver in (solve_optimal, solve_nep):
            a = solver(sc, lam)
            b = solver(gen, lam)
            assert b.active_count == a.active_count
            assert b.multiplier == pytest.approx(a.multiplier, rel=1e-9)
            assert b.p == pytest.approx(a.p, abs=1e-7)
            assert b.mean_latency == pytest.approx(a.mean_latency, rel=1e-9)


def test_scenario_requires_servers():
    with pytest.raises(ValueError):
        Scenario(())
