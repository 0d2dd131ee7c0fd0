from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spca_wells.errors import InvalidMoveError, InvalidParameterError
from spca_wells.model import (as_support, beta_bayes, build_observation, hamiltonian, hamiltonian_delta,
                              instance_from_dict, instance_to_dict, overlap, sample_goe, sample_signal,
                              split_observation)
from spca_wells.rng import Rng

from conftest import make_instance, zero_noise


def test_goe_variances():
    n = 300
    w = sample_goe(n, Rng(11))
    assert np.array_equal(w, w.T)
    off = w[np.triu_indices(n, 1)]
    assert abs(off.var() * n - 1) < 0.03
    assert abs(np.diag(w).var() * n / 2 - 1) < 0.25
    assert abs(off.mean()) < 3 / n


def test_observation_adds_spike():
    inst = zero_noise(6, (1, 4), 2.0)
    expected = np.zeros((6, 6))
    expected[np.ix_([1, 4], [1, 4])] = 1.0
    assert np.array_equal(inst.y, expected)
    assert hamiltonian(inst, (1, 4)) == -4.0


def test_signal_uniform_over_subsets():
    r = Rng(4)
    counts = {}
    for _ in range(20000):
        s = sample_signal(5, 2, r)
        counts[s] = counts.get(s, 0) + 1
    assert set(counts) == set(itertools.combinations(range(5), 2))
    chi2 = sum((c - 2000) ** 2 / 2000 for c in counts.values())
    assert chi2 < 27.88  # 0.999 quantile, 9 dof


def test_signal_errors():
    with pytest.raises(InvalidParameterError):
        sample_signal(3, 4, Rng(0))
    with pytest.raises(InvalidParameterError):
        sample_signal(3, 0, Rng(0))


def test_beta_bayes():
    assert beta_bayes(2.0, 100, 10) == 10.0
    with pytest.raises(InvalidParameterError):
        beta_bayes(0.0, 10, 2)


def test_support_validation():
    assert as_support([3, 1], 5) == (1, 3)
    for bad in ([1, 1], [5], [-1]):
        with pytest.raises(InvalidParameterError):
            as_support(bad, 5)
    assert overlap((1, 2, 3), (3, 4)) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), data=st.data())
def test_delta_matches_difference(seed, data):
    inst = make_instance(9, 3, 1.3, seed)
    v = tuple(sorted(data.draw(st.sets(st.integers(0, 8), min_size=1, max_size=8))))
    out = data.draw(st.sampled_from(v))
    inn = data.draw(st.sampled_from([i for i in range(9) if i not in v]))
    u = tuple(sorted(set(v) - {out} | {inn}))
    assert abs(hamiltonian_delta(inst, v, out, inn) - (hamiltonian(inst, u) - hamiltonian(inst, v))) < 1e-12


def test_delta_rejects_bad_moves(small_instance):
    with pytest.raises(InvalidMoveError):
        hamiltonian_delta(small_instance, (0, 1), 2, 3)
    with pytest.raises(InvalidMoveError):
        hamiltonian_delta(small_instance, (0, 1), 0, 1)


def test_serialization_round_trip_is_exact(small_instance):
    back = instance_from_dict(instance_to_dict(small_instance))
    assert np.array_equal(back.y, small_instance.y)
    assert back.x == small_instance.x and back.lam == small_instance.lam


def test_with_lambda_keeps_noise(small_instance):
    other = small_instance.with_lambda(4.0)
    assert np.array_equal(other.w, small_instance.w)
    idx = np.array(small_instance.x)
    diff = other.y - small_instance.y
    assert np.allclose(diff[np.ix_(idx, idx)], (4.0 - 1.5) / 3)


def test_split_observation(small_instance):
    y1, y2 = split_observation(small_instance, Rng(3))
    assert np.allclose((y1.y + y2.y) / math.sqrt(2), small_instance.y)
    assert y1.lam == pytest.approx(1.5 / math.sqrt(2))
    spike = y1.lam / 3 * np.outer(*(2 * [np.isin(np.arange(10), small_instance.x)]))
    assert np.allclose(y1.y - y1.w, spike)


def test_split_noise_is_independent_goe():
    n, reps = 40, 200
    a, b = [], []
    for s in range(reps):
        inst = make_instance(n, 3, 1.0, s)
        y1, y2 = split_observation(inst, Rng(s, 1))
        a.append(y1.w[np.triu_indices(n, 1)])
        b.append(y2.w[np.triu_indices(n, 1)])
    a, b = np.concatenate(a), np.concatenate(b)
    assert abs(a.var() * n - 1) < 0.03
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_negative_lambda_rejected():
    with pytest.raises(InvalidParameterError):
        build_observation((0,), -1.0, np.zeros((3, 3)))
