"""Counter-stream generator checks against a reference SplitMix64 loop."""

from __future__ import annotations

import math

import numpy as np
import pytest

from reactivepp._rng import CounterStream, derive_key, mix64, raw64, uniform

MASK = (1 << 64) - 1


def splitmix_reference(seed: int, n: int) -> list[int]:
    """Textbook sequential SplitMix64: state += golden, then finalize."""
    out = []
    state = seed & MASK
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def test_reference_vector_seed_zero():
    # first output of SplitMix64 seeded with 0 (published test vector)
    assert splitmix_reference(0, 1)[0] == 0xE220A8397B1DCDAF
    assert int(raw64(0, 0)) == 0xE220A8397B1DCDAF


def test_raw64_matches_sequential_reference():
    for seed in (0, 1, 42, 0xDEADBEEF, MASK):
        ref = splitmix_reference(seed, 64)
        got = [int(raw64(seed, i)) for i in range(64)]
        assert got == ref


def test_vector_and_scalar_paths_agree_bitwise():
    key = derive_key(7, "paths")
    idx = np.arange(500, dtype=np.uint64)
    vec = uniform(key, idx)
    scal = np.array([uniform(key, int(i)) for i in range(500)])
    assert np.array_equal(vec, scal)
    assert np.array_equal(raw64(key, idx), [raw64(key, int(i)) for i in idx])


def test_mix64_array_matches_scalar():
    xs = np.array([0, 1, 2**63, MASK], dtype=np.uint64)
    assert np.array_equal(mix64(xs), [mix64(int(x)) for x in xs])


def test_uniform_open_closed_interval():
    key = derive_key(0, "range")
    u = uniform(key, np.arange(100000, dtype=np.uint64))
    assert np.all(u > 0.0)
    assert np.all(u <= 1.0)
    # mean of U(0,1]: 3-sigma band around 0.5
    assert abs(u.mean() - 0.5) < 3.0 * (1.0 / math.sqrt(12 * u.size))


def test_derive_key_distinguishes_types_and_order():
    assert derive_key(1, "a") != derive_key("a", 1)
    assert derive_key(1) != derive_key(1.0)
    assert derive_key("ab", "c") != derive_key("a", "bc")
    assert derive_key(3, "x") == derive_key(3, "x")
    with pytest.raises(TypeError):
        derive_key(object())


def test_stream_counter_advances():
    s = CounterStream(derive_key(5))
    a = s.uniform()
    b = s.uniform()
    assert a != b
    assert s.counter == 2
    s2 = CounterStream(derive_key(5))
    assert s2.uniform(2).tolist() == [a, b]


def test_stream_batched_and_single_draws_agree():
    key = derive_key(9, "batch")
    s1 = CounterStream(key)
    whole = s1.uniform(40)
    s2 = CounterStream(key)
    parts = np.concatenate([s2.uniform(3), s2.uniform(30), [s2.uniform() for _ in range(7)]])
    assert np.array_equal(whole, parts)


def test_exponential_inverse_cdf():
    key = derive_key(11)
    s = CounterStream(key)
    x = s.exponential(scale=2.5, n=1000)
    u = uniform(key, np.arange(1000, dtype=np.uint64))
    assert np.allclose(x, -np.log(u) * 2.5, rtol=0, atol=0)
    assert np.all(x >= 0)


def test_normal_consumes_two_draws_each():
    s = CounterStream(derive_key(13))
    s.normal()
    assert s.counter == 2
    s.normal(5)
    assert s.counter == 12


def test_normal_moments():
    s = CounterStream(derive_key(17))
    z = s.normal(200000)
    n = z.size
    assert abs(z.mean()) < 3.0 / math.sqrt(n)
    assert abs(z.std() - 1.0) < 3.0 / math.sqrt(2 * n)


def test_integers_bounds_and_coverage():
    s = CounterStream(derive_key(19))
    draws = s.integers(7, n=5000)
    assert draws.min() == 0
    assert draws.max() == 6
    counts = np.bincount(draws, minlength=7)
    # each cell: binomial(5000, 1/7), 4-sigma band
    sigma = math.sqrt(5000 * (1 / 7) * (6 / 7))
    assert np.all(np.abs(counts - 5000 / 7) < 4 * sigma)


def test_shuffle_pick_is_prefix_of_permutation():
    s = CounterStream(derive_key(23))
    picked = s.shuffle_pick(100, 30)
    assert picked.size == 30
    assert len(set(picked.tolist())) == 30
    assert all(0 <= p < 100 for p in picked)
    full = CounterStream(derive_key(23)).shuffle_pick(100, 100)
    assert sorted(full.tolist()) == list(range(100))


def test_shuffle_pick_uniform_membership():
    # each index appears in a 10-of-40 pick with probability 1/4
    hits = np.zeros(40)
    n_trials = 4000
    for t in range(n_trials):
        s = CounterStream(derive_key("member", t))
        hits[s.shuffle_pick(40, 10)] += 1
    sigma = math.sqrt(n_trials * 0.25 * 0.75)
    assert np.all(np.abs(hits - n_trials * 0.25) < 4.5 * sigma)


def test_streams_with_different_keys_decorrelate():
    a = CounterStream(derive_key(1, "left")).uniform(4096)
    b = CounterStream(derive_key(1, "right")).uniform(4096)
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 0.08
