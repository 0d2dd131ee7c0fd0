from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spca_wells.enumeration import (EnergyBlock, LogSumExp, check_budget, class_blocks, enumerate_supports,
                                    logsumexp, overlap_range)
from spca_wells.errors import EnumerationTooLargeError
from spca_wells.model import hamiltonian

from conftest import make_instance


def test_enumeration_is_complete_and_lexicographic():
    sups = list(enumerate_supports(8, 3))
    assert len(sups) == math.comb(8, 3)
    assert sups == sorted(set(sups))


def test_budget():
    with pytest.raises(EnumerationTooLargeError) as info:
        check_budget(30, 10, budget=1000)
    assert info.value.count == math.comb(30, 10)
    assert check_budget(30, 10, budget=None) == math.comb(30, 10)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 9), data=st.data(), seed=st.integers(0, 1000))
def test_class_blocks_partition_supports(n, data, seed):
    k = data.draw(st.integers(1, n))
    kp = data.draw(st.integers(1, n))
    inst = make_instance(n, k, 1.0, seed)
    seen = []
    for m in overlap_range(n, k, kp):
        for blk in class_blocks(inst.y, inst.x, kp, m, block=7):
            for p in range(blk.energy.size):
                s = blk.support(p)
                assert len(set(s) & set(inst.x)) == m
                assert abs(blk.energy[p] - hamiltonian(inst, s)) < 1e-12
                seen.append(s)
            assert [tuple(r) for r in blk.supports()] == [blk.support(p) for p in range(blk.energy.size)]
    assert sorted(seen) == list(enumerate_supports(n, kp))


def test_empty_overlap_class_yields_nothing(small_instance):
    assert list(class_blocks(small_instance.y, small_instance.x, 3, 4)) == []
    assert overlap_range(5, 4, 3) == range(2, 4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-700, 700), min_size=1, max_size=40), st.integers(1, 7))
def test_streaming_logsumexp(values, chunk):
    acc = LogSumExp()
    for i in range(0, len(values), chunk):
        acc.add(values[i:i + chunk])
    a = np.array(values)
    ref = a.max() + math.log(np.exp(a - a.max()).sum())
    assert acc.value == pytest.approx(ref, abs=1e-12, rel=1e-12)


def test_logsumexp_edge_cases():
    assert logsumexp([]) == -math.inf
    assert logsumexp([-math.inf, -math.inf]) == -math.inf
    assert logsumexp([1e4, 1e4]) == pytest.approx(1e4 + math.log(2))
    a, b = LogSumExp(), LogSumExp()
    a.add([0.0])
    b.add([0.0, 1.0])
    a.merge(b)
    assert a.value == pytest.approx(logsumexp([0.0, 0.0, 1.0]))


def test_energy_block_indexing():
    blk = EnergyBlock(1, np.array([[0], [2]]), np.array([[1], [3], [4]]), np.zeros(6))
    assert blk.support(4) == (2, 3)
