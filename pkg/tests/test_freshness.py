from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aoicontract.freshness import (
    DomainError,
    TimingParams,
    Variant,
    avg_aoi_ca,
    avg_aoi_theta,
    avg_latency_ca,
    avg_latency_theta,
    convexity_probe,
    oracle_metrics,
    update_cycle,
)

P, O = Variant.PAPER, Variant.ORACLE


@pytest.mark.parametrize("c,a,t,expected", [(3, 2, 2, 10), (1, 1, 1, 2), (15, 15, 2, 60)])
def test_update_cycle(c, a, t, expected):
    assert update_cycle(c, a, t) == expected


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, -2)])
def test_update_cycle_rejects_bad_input(args):
    with pytest.raises(DomainError):
        update_cycle(*args)


def test_timing_params_invariants():
    TimingParams(t=2, a=1, c_min=1, c_max=1)
    for kwargs in ({"t": 0}, {"a": 0}, {"c_min": 0}, {"c_min": 5, "c_max": 4}, {"a": 1.5}):
        with pytest.raises(DomainError):
            TimingParams(**kwargs)


# Expected values below were enumerated by hand from the arrival-period rule
# and re-checked with exact fractions; none come from the closed forms.
@pytest.mark.parametrize("c,a,t,latency,aoi", [
    (1, 1, 1, Fraction(3, 2), Fraction(1)),
    (2, 1, 1, Fraction(2), Fraction(1)),
    # latencies {3, 2, 1, 1, 1}, ages {1, 1, 1, 2, 3}
    (2, 3, 1, Fraction(8, 5), Fraction(8, 5)),
])
def test_oracle_enumeration(c, a, t, latency, aoi):
    m = oracle_metrics(c, a, t)
    assert m.avg_latency == float(latency)
    assert m.avg_aoi == float(aoi)
    assert m.theta == (c + a) * t


def test_oracle_needs_integer_periods():
    with pytest.raises(DomainError):
        oracle_metrics(1.5, 1, 1)


def test_latency_ca_examples():
    assert avg_latency_ca(1, 1, 1, P) == pytest.approx(1.5, abs=1e-15)
    assert avg_latency_ca(1, 1, 1, O) == pytest.approx(1.5, abs=1e-15)
    assert avg_latency_ca(2, 1, 1, O) == pytest.approx(2.0, abs=1e-15)
    assert avg_latency_ca(2, 1, 1, P) == pytest.approx(11 / 3, abs=1e-12)


def test_aoi_ca_examples():
    assert avg_aoi_ca(1, 1, 1) == 1.0
    for v in (P, O):
        assert avg_aoi_ca(2, 3, 1, v) == pytest.approx(1.6, abs=1e-15)


def test_theta_examples():
    assert avg_latency_theta(2, 1, 1, P) == pytest.approx(1.5)
    assert avg_latency_theta(3, 1, 1, P) == pytest.approx(11 / 3)
    assert avg_latency_theta(3, 1, 1, O) == pytest.approx(2.0)
    assert avg_aoi_theta(2, 1, 1, O) == pytest.approx(1.0)
    assert avg_aoi_theta(2, 1, 1, P) == pytest.approx(2.0)
    assert avg_aoi_theta(5, 3, 1, O) == pytest.approx(1.6)


@pytest.mark.parametrize("fn", [avg_latency_theta, avg_aoi_theta])
def test_theta_domain(fn):
    with pytest.raises(DomainError):
        fn(2.0, 1, 2.0)
    with pytest.raises(DomainError):
        fn(1.0, 1, 2.0)


def test_variant_parse():
    assert Variant.parse("Oracle") is O
    with pytest.raises(DomainError):
        Variant.parse("exact")


def test_oracle_matches_closed_forms_on_full_grid():
    for t in (1, 2):
        for c in range(1, 16):
            for a in range(1, 16):
                m = oracle_metrics(c, a, t)
                assert abs(avg_latency_ca(c, a, t, O) - m.avg_latency) <= 1e-12
                assert abs(avg_aoi_ca(c, a, t, P) - m.avg_aoi) <= 1e-12
                theta = (c + a) * t
                assert abs(avg_latency_theta(theta, a, t, P) - avg_latency_ca(c, a, t, P)) <= 1e-9
                assert abs(avg_latency_theta(theta, a, t, O) - m.avg_latency) <= 1e-12
                assert abs(avg_aoi_theta(theta, a, t, O) - m.avg_aoi) <= 1e-12
                gap = (c - 1) * c * t * (c + 3) / (2 * (c + a))
                assert abs(avg_latency_ca(c, a, t, P) - avg_latency_ca(c, a, t, O) - gap) <= 1e-9


@given(theta_excess=st.floats(1e-6, 200), a=st.integers(1, 20), t=st.floats(0.05, 10))
def test_metrics_bounded_below_by_period(theta_excess, a, t):
    theta = a * t + theta_excess
    assert avg_aoi_theta(theta, a, t, O) >= t * (1 - 1e-12)
    assert avg_latency_theta(theta, a, t, O) >= t * (1 - 1e-12)
    assert avg_aoi_theta(theta, a, t, P) >= t * (1 - 1e-12)
    # the printed latency form only stays above t for at least one collection period
    if theta >= (a + 1) * t:
        assert avg_latency_theta(theta, a, t, P) >= t * (1 - 1e-12)


def test_paper_latency_dips_below_period_for_fractional_collection():
    assert avg_latency_theta(1.5, 1, 1.0, P) < 1.0


@given(c=st.integers(1, 40), a=st.integers(1, 40), t=st.floats(0.05, 10))
def test_ca_metrics_bounded_below_by_period(c, a, t):
    for v in (P, O):
        assert avg_aoi_ca(c, a, t, v) >= t * (1 - 1e-12)
        assert avg_latency_ca(c, a, t, v) >= t * (1 - 1e-12)


def test_convexity_probe_examples():
    assert convexity_probe(2, 2, P, np.arange(5, 61))
    assert convexity_probe(1, 1, O, np.arange(2, 51), which=("aoi",))
    assert convexity_probe(3, 2, P, np.arange(7, 61))


def test_convexity_probe_detects_concavity(monkeypatch):
    import aoicontract.freshness as fr

    monkeypatch.setattr(fr, "avg_latency_theta", lambda th, a, t, v: -np.asarray(th) ** 2)
    assert not fr.convexity_probe(1, 1, P, [2, 3, 4, 5])


@pytest.mark.parametrize("grid", [[5, 6], [5, 7, 6], [4, 5, 6]])
def test_convexity_probe_rejects_bad_grid(grid):
    with pytest.raises(DomainError):
        convexity_probe(2, 2, P, grid)
