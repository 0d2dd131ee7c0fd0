from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from spca_wells.model import build_observation, generate_instance, hamiltonian
from spca_wells.rng import Rng


def make_instance(n, k, lam, seed, noise_scale=1.0):
    return generate_instance(n, k, lam, Rng(seed), noise_scale=noise_scale)


def zero_noise(n, x, lam):
    return build_observation(x, lam, np.zeros((n, n)))


def flat_energies(inst, k_prime):
    """Independent oracle: every support, its overlap and canonical energy."""
    xs = set(inst.x)
    out = []
    for v in itertools.combinations(range(inst.n), k_prime):
        out.append((v, len(xs.intersection(v)), hamiltonian(inst, v)))
    return out


def flat_phi(inst, k_prime):
    best = {}
    for v, m, h in flat_energies(inst, k_prime):
        if m not in best or (h, v) < best[m]:
            best[m] = (h, v)
    return best


def flat_log_masses(inst, beta, k_prime):
    groups = {}
    for v, m, h in flat_energies(inst, k_prime):
        groups.setdefault(m, []).append(-beta * h)
    out = {}
    for m, vals in groups.items():
        a = np.array(vals)
        out[m] = float(a.max() + np.log(np.exp(a - a.max()).sum()))
    return out


def brute_pair_counts(n, k, kp):
    """Histogram of shared indices over ordered pairs within each overlap class (bitmask oracle)."""
    masks = np.array([sum(1 << i for i in c) for c in itertools.combinations(range(n), kp)], dtype=np.uint64)
    xmask = np.uint64((1 << k) - 1)
    ov = np.bitwise_count(masks & xmask)
    out = {}
    for ell in np.unique(ov):
        cls = masks[ov == ell]
        shared = np.bitwise_count(cls[:, None] & cls[None, :]).ravel()
        out[int(ell)] = np.bincount(shared, minlength=kp + 1)
    return out


def first_passage_means(P, absorbing):
    """Solve ``(I - Q) m = 1`` on the transient states."""
    transient = np.flatnonzero(~absorbing)
    Q = P[np.ix_(transient, transient)]
    m = np.linalg.solve(np.eye(transient.size) - Q, np.ones(transient.size))
    full = np.zeros(P.shape[0])
    full[transient] = m
    return full


def se(p, reps):
    return math.sqrt(max(p * (1 - p), 0.0) / reps)


@pytest.fixture
def small_instance():
    return make_instance(10, 3, 1.5, 7)
