import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stairtest import InputError, build_stair, empirical_pmf, perturb, tv_distance_sparse
from stairtest.synthetic import MODES, DEFAULT_SUITE, make_suite

from oracles import dense_tv
from strategies import stairs


def test_zero_target_is_identity(small_p):
    for mode in MODES:
        q = perturb(small_p, 0.0, mode, receiver=3 if mode == "onto_zero_region" else None)
        assert np.array_equal(q.dense(), small_p.dense())


def test_onto_zero_region_example(small_p):
    q = perturb(small_p, 0.1, "onto_zero_region")
    assert q.dense() == pytest.approx([0.25, 0.25, 0.2, 0.2, 0.05, 0.05])
    assert dense_tv(q.dense(), small_p.dense()) == pytest.approx(0.1, abs=1e-12)
    assert q.exact_tv() == pytest.approx(0.1, abs=1e-12)


def test_within_support_example(small_p):
    q = perturb(small_p, 0.1, "within_support")
    assert (q.donor, q.receiver) == (1, 2)
    assert q.dense() == pytest.approx([0.25, 0.25, 0.25, 0.25, 0.0, 0.0])


def test_within_region_keeps_region_masses(small_p, default_space):
    q = perturb(small_p, 0.1, "within_region")
    assert q.dense() == pytest.approx([0.2, 0.4, 0.2, 0.2, 0.0, 0.0])
    p = build_stair(default_space, 4)
    for t in DEFAULT_SUITE:
        q = perturb(p, t, "within_region")
        region_mass = np.bincount(p.region_of(np.arange(p.space.size)), weights=q.dense())
        assert region_mass == pytest.approx(p.region_masses, abs=1e-12)


def test_default_suite_exact_tvs(default_space):
    p = build_stair(default_space, 4)
    for mode in MODES:
        suite = make_suite(p, DEFAULT_SUITE, mode)
        for t, q in zip(DEFAULT_SUITE, suite):
            assert abs(q.exact_tv() - t) <= 1e-12
            assert abs(dense_tv(q.dense(), p.dense()) - t) <= 1e-12
            assert q.dense().min() >= 0
            assert abs(q.dense().sum() - 1) <= 1e-12
        assert [q.exact_tv() for q in suite] == sorted(q.exact_tv() for q in suite)


def test_target_too_large(small_p):
    with pytest.raises(InputError):
        perturb(small_p, 0.6, "within_support")
    with pytest.raises(InputError):
        perturb(small_p, 0.3, "within_region")
    with pytest.raises(InputError):
        perturb(small_p, 0.1, "sideways")
    with pytest.raises(InputError):
        perturb(small_p, 0.1, "within_support", donor=3)


@settings(max_examples=100, deadline=None)
@given(stairs(), st.sampled_from(MODES), st.floats(0, 0.999))
def test_exact_tv_invariant(p, mode, frac):
    d = 0
    limit = p.region_masses[d] if mode != "within_region" else (p.sizes[d] // 2) * p.probs[d]
    if mode == "within_support" and p.s < 3:
        return
    if mode == "within_region" and p.sizes[d] < 2:
        return
    q = perturb(p, frac * limit, mode)
    assert abs(q.exact_tv() - frac * limit) <= 1e-12
    assert abs(dense_tv(q.dense(), p.dense()) - frac * limit) <= 1e-12
    assert q.dense().min() >= 0


def test_sampling_q1_matches_p(small_p):
    q = perturb(small_p, 0.0, "within_support")
    samples = q.sample(10**6, 0)
    assert tv_distance_sparse(small_p, empirical_pmf(samples)) < 0.01


def test_sampling_onto_zero_region_frequency(small_p):
    q = perturb(small_p, 0.15, "onto_zero_region")
    samples = q.sample(10**5, 1)
    in_zero = samples.counts[samples.indices >= 4].sum() / samples.m
    assert in_zero == pytest.approx(0.15, abs=0.005)


def test_sampling_reproducible(small_p):
    q = perturb(small_p, 0.1, "within_region")
    assert q.sample(500, 2) == q.sample(500, 2)
