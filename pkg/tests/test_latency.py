"""Latency curves, marginal costs, and their inverses."""

import math

import numpy as np
import pytest

from taskalloc import (
    DomainError,
    SaturationError,
    QueueModel,
    ServerSpec,
    invert_latency,
    invert_marginal,
    latency,
    latency_slope,
    marginal_cost,
    zero_load_latency,
)

from conftest import random_server


def as_generic(s: ServerSpec) -> ServerSpec:
    """Wrap a closed-form server as a generic model with analytic derivatives."""
    a = 0.5 * (1.0 + s.cv * s.cv)
    d, mu = s.d, s.mu
    return ServerSpec.from_functions(
        d, mu,
        lambda x: d + (1.0 + a * x / (mu - x)) / mu,
        lambda x: a / (mu - x) ** 2,
    )


def test_zero_load_latency_is_d_plus_service_time():
    for s in (ServerSpec.mm1(0.04, 15.0), ServerSpec.md1(0.02, 4.66),
              ServerSpec.mg1(0.1, 3.0, 2.5)):
        assert zero_load_latency(s) == pytest.approx(s.d + 1.0 / s.mu, rel=1e-15)
        assert latency(s, 0.0) == pytest.approx(zero_load_latency(s), rel=1e-15)
        assert marginal_cost(s, 0.0) == pytest.approx(zero_load_latency(s), rel=1e-15)


def test_latency_values():
    assert latency(ServerSpec.mm1(0.04, 15.0), 0.0) == pytest.approx(0.04 + 1.0 / 15.0, rel=1e-15)
    assert latency(ServerSpec.mm1(0.0, 2.0), 1.0) == pytest.approx(1.0, rel=1e-15)
    assert latency(ServerSpec.mg1(0.0, 1.0, 3.0), 0.5) == pytest.approx(6.0, rel=1e-15)


def test_marginal_cost_values():
    assert marginal_cost(ServerSpec.mm1(0.0, 2.0), 0.0) == pytest.approx(0.5, rel=1e-15)
    assert marginal_cost(ServerSpec.mm1(0.0, 2.0), 1.0) == pytest.approx(2.0, rel=1e-15)
    s_mm1 = ServerSpec.mm1(0.07, 11.0)
    s_mg1 = ServerSpec.mg1(0.07, 11.0, 1.0)
    for x in np.linspace(0.0, 10.9, 23):
        assert marginal_cost(s_mg1, x) == pytest.approx(marginal_cost(s_mm1, x), rel=1e-12)


def test_invert_latency_values():
    assert invert_latency(ServerSpec.mm1(0.0, 2.0), 1.0) == pytest.approx(1.0, rel=1e-15)
    x = invert_latency(ServerSpec.mm1(0.04, 15.0), 0.106667 + 1e-12)
    assert 0.0 < x < 1e-3
    assert invert_latency(ServerSpec.mg1(0.0, 1.0, 3.0), 6.0) == pytest.approx(0.5, rel=1e-12)


def test_invert_marginal_values():
    assert invert_marginal(ServerSpec.mm1(0.0, 2.0), 2.0) == pytest.approx(1.0, rel=1e-14)
    x = invert_marginal(ServerSpec.mm1(0.0, 2.0), 0.5 + 1e-12)
    assert 0.0 < x < 1e-4
    s_mm1 = ServerSpec.mm1(0.03, 9.0)
    s_mg1 = ServerSpec.mg1(0.03, 9.0, 1.0)
    for t in np.linspace(0.15, 40.0, 17):
        assert invert_marginal(s_mg1, t) == pytest.approx(invert_marginal(s_mm1, t), rel=1e-12)


def test_domain_errors():
    s = ServerSpec.mm1(0.0, 2.0)
    for x in (-0.1, 2.0, 2.5):
        with pytest.raises(DomainError):
            latency(s, x)
        with pytest.raises(DomainError):
            marginal_cost(s, x)
        with pytest.raises(DomainError):
            latency_slope(s, x)
    with pytest.raises(DomainError):
        invert_latency(s, 0.5)  # at l(0)
    with pytest.raises(DomainError):
        invert_marginal(s, 0.4)  # below h(0)


def test_round_trip_inversions():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        s = random_server(rng)
        x = rng.uniform(1e-6, 1.0 - 1e-6) * s.mu
        assert invert_latency(s, latency(s, x)) == pytest.approx(x, rel=1e-11, abs=1e-11)
        assert invert_marginal(s, marginal_cost(s, x)) == pytest.approx(x, rel=1e-11, abs=1e-11)


def test_monotone_and_dominating():
    rng = np.random.default_rng(11)
    for _ in range(50):
        s = random_server(rng)
        xs = np.sort(rng.uniform(0.0, 1.0 - 1e-9, size=9)) * s.mu
        lats = [latency(s, x) for x in xs]
        margs = [marginal_cost(s, x) for x in xs]
        assert all(b > a for a, b in zip(lats, lats[1:]))
        assert all(b > a for a, b in zip(margs, margs[1:]))
        for x, lat in zip(xs, lats):
            if x > 0.0:
                assert lat > zero_load_latency(s)
                assert marginal_cost(s, x) > lat


def test_latency_convexity():
    rng = np.random.default_rng(13)
    for _ in range(200):
        s = random_server(rng)
        x1, x2 = np.sort(rng.uniform(0.0, 0.999, size=2)) * s.mu
        mid = latency(s, 0.5 * (x1 + x2))
        assert mid <= 0.5 * (latency(s, x1) + latency(s, x2)) + 1e-12


def test_generic_matches_closed_form():
    rng = np.random.default_rng(17)
    for _ in range(20):
        s = random_server(rng)
        g = as_generic(s)
        for frac in (0.1, 0.5, 0.9):
            x = frac * s.mu
            assert latency(g, x) == pytest.approx(latency(s, x), rel=1e-12)
            assert marginal_cost(g, x) == pytest.approx(marginal_cost(s, x), rel=1e-12)
        t = latency(s, 0.7 * s.mu)
        assert invert_latency(g, t) == pytest.approx(invert_latency(s, t), rel=1e-8)
        t = marginal_cost(s, 0.7 * s.mu)
        assert invert_marginal(g, t) == pytest.approx(invert_marginal(s, t), rel=1e-8)


def test_generic_saturation_error():
    # bounded latency model: saturates at 3.0 seconds
    g = ServerSpec.from_functions(0.0, 1.0, lambda x: 1.0 + 2.0 * x, lambda x: 2.0)
    with pytest.raises(SaturationError):
        invert_latency(g, 3.5)


def test_server_spec_validation():
    with pytest.raises(ValueError):
        ServerSpec(d=-0.1, mu=1.0)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=0.0)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=1.0, cv=-1.0)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=1.0, cv=2.0, model=QueueModel.MM1)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=1.0, cv=1.0, model=QueueModel.MD1)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=1.0, cv=1.0, model=QueueModel.GENERIC)
    with pytest.raises(ValueError):
        ServerSpec(d=0.0, mu=1.0, cv=1.0, model=QueueModel.MM1,
                   generic=as_generic(ServerSpec.mm1(0.0, 1.0)).generic)


def test_slope_is_derivative():
    rng = np.random.default_rng(19)
    for _ in range(50):
        s = random_server(rng)
        x = rng.uniform(0.05, 0.9) * s.mu
        eps = 1e-7 * s.mu
        fd = (latency(s, x + eps) - latency(s, x - eps)) / (2.0 * eps)
        assert latency_slope(s, x) == pytest.approx(fd, rel=1e-5)
        assert marginal_cost(s, x) == pytest.approx(latency(s, x) + x * latency_slope(s, x),
                                                    rel=1e-14)


def test_md1_is_half_mm1_queue_growth():
    # deterministic service halves the queueing term's growth
    mm1 = ServerSpec.mm1(0.0, 2.0)
    md1 = ServerSpec.md1(0.0, 2.0)
    x = 1.0
    queue_mm1 = latency(mm1, x) - zero_load_latency(mm1)
    queue_md1 = latency(md1, x) - zero_load_latency(md1)
    assert queue_md1 == pytest.approx(0.5 * queue_mm1, rel=1e-13)
