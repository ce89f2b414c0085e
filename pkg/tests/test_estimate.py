from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import detection_probability
from unitrace import EstimationParams, Rng, Verdict, gaa_estimate, iterated_estimate, parse_system, random_walk, sample_size

PLANTED = """
module m
v : [0..3] init 0;
[] v<3 -> v'=v+1 + v'=0;
endmodule
"""


@pytest.mark.parametrize(
    "eps,delta,n", [(0.1, 0.05, 185), (0.05, 0.01, 1060), (0.2, 0.1, 38), (0.01, 0.001, 38005)]
)
def test_sample_size(eps, delta, n):
    assert sample_size(eps, delta) == n


@pytest.mark.parametrize("eps,delta", [(0, 0.1), (0.1, 1), (-1, 0.5)])
def test_sample_size_rejects(eps, delta):
    with pytest.raises(ValueError):
        sample_size(eps, delta)


def test_two_successors_are_equiprobable():
    s = parse_system("module m v : [0..2] init 0; [] v=0 -> v'=1 + v'=2; endmodule")
    rng = Rng(0)
    ends = Counter(random_walk(s, 1, Verdict.always(), rng).path[-1] for _ in range(20_000))
    assert set(ends) == {(1,), (2,)}
    assert abs(ends[(1,)] / 20_000 - 0.5) < 0.02


def test_deadlocked_start():
    s = parse_system("module m v : [0..1] init 0; [] v=1 -> v'=0; endmodule")
    w = random_walk(s, 5, Verdict.when(s, "v=0"), Rng(1))
    assert w.deadlocked and w.path == ((0,),) and w.actions == () and w.detected == 1


def test_planted_oracle():
    s = parse_system(PLANTED)
    assert detection_probability(s, 3, lambda st: st[0] == 3) == Fraction(1, 8)


def test_always_true_estimates_one():
    s = parse_system(PLANTED)
    est = gaa_estimate(s, 3, Verdict.always(), EstimationParams(0.1, 0.05, 3), Rng(2))
    assert est.value == 1.0 and est.hits == est.n_samples == 185


def test_reproducible():
    s = parse_system(PLANTED)
    v = Verdict.when(s, "v=3")
    p = EstimationParams(0.1, 0.05, 3)
    assert gaa_estimate(s, 3, v, p, Rng(3)) == gaa_estimate(s, 3, v, p, Rng(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 6))
def test_estimate_is_a_fraction_of_n(seed, k):
    s = parse_system(PLANTED)
    est = gaa_estimate(s, k, Verdict.when(s, "v=3"), EstimationParams(0.2, 0.1, k), Rng(seed))
    assert 0 <= est.value <= 1
    assert est.value == est.hits / est.n_samples and 0 <= est.hits <= est.n_samples


def test_iterated_estimates_track_monotone_truth():
    s = parse_system(PLANTED)
    v = Verdict.when(s, "v=3")
    depths = [3, 5, 8, 12]
    truth = [detection_probability(s, k, lambda st: st[0] == 3) for k in depths]
    assert truth == sorted(truth)
    ests = iterated_estimate(s, v, 0.05, 0.01, depths, Rng(4), stop_when_stable=False)
    assert [e.k for e in ests] == depths
    for e, p in zip(ests, truth):
        assert abs(e.value - float(p)) < 0.05


def test_iterated_stops_when_stable():
    s = parse_system(PLANTED)
    ests = iterated_estimate(s, Verdict.always(), 0.1, 0.05, [1, 2, 3, 4], Rng(5))
    assert len(ests) == 2


def test_negative_depth():
    with pytest.raises(ValueError):
        EstimationParams(0.1, 0.1, -1)
