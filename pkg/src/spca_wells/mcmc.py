"""Metropolis dynamics on the swap graph of k'-sparse supports.

Two supports are neighbours when they differ by one swap (Hamming distance 2).
A step proposes a uniformly random swap and accepts it with probability
``min(1, exp(-beta * dH))``; a rejection is a self-loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .enumeration import DEFAULT_BUDGET, check_budget, enumerate_supports
from .errors import EnumerationTooLargeError, InvalidParameterError, ZeroMassError
from .gibbs import ConditionalSampler, RegionSpec, few_depth, gibbs_profile
from .model import Instance, as_support, hamiltonian_delta, sample_signal
from .parallel import parallel_map
from .rng import Rng

INIT_MODES = ("conditional", "uniform", "fixed")
_REJECTION_CAP = 10**6


@dataclass(frozen=True)
class ChainConfig:
    beta: float
    k_prime: int
    ell: int
    t_max: int
    replications: int = 1
    init: str = "conditional"
    fixed: tuple | None = None
    record_trace: bool = False
    budget: int | None = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.beta >= 0 or math.isinf(self.beta):
            raise InvalidParameterError("beta must be finite and nonnegative")
        if self.t_max < 1 or self.replications < 1:
            raise InvalidParameterError("t_max and replications must be >= 1")
        if self.init not in INIT_MODES:
            raise InvalidParameterError(f"init must be one of {INIT_MODES}")
        if self.init == "fixed" and self.fixed is None:
            raise InvalidParameterError("fixed init needs a support")


@dataclass
class HitResult:
    """``tau`` is None exactly when the chain timed out."""

    tau: int | None
    timed_out: bool
    accepted: int
    steps: int
    trace: np.ndarray | None = None


class _Chain:
    """Mutable chain state: sorted support and sorted complement."""

    def __init__(self, inst: Instance, beta: float, state):
        self.inst = inst
        self.beta = beta
        self.state = sorted(state)
        members = set(self.state)
        self.comp = [i for i in range(inst.n) if i not in members]
        self.signal = set(inst.x)
        self.overlap = sum(1 for i in self.state if i in self.signal)
        self.pairs = len(self.state) * len(self.comp)

    def step(self, rng: Rng) -> bool:
        p = rng.integer(self.pairs)
        a, b = divmod(p, len(self.comp))
        i_out, i_in = self.state[a], self.comp[b]
        dh = hamiltonian_delta(self.inst, self.state, i_out, i_in)
        if dh > 0 and self.beta > 0 and rng.uniform() >= math.exp(-self.beta * dh):
            return False
        del self.state[a]
        del self.comp[b]
        _insort(self.state, i_in)
        _insort(self.comp, i_out)
        self.overlap += (i_in in self.signal) - (i_out in self.signal)
        return True


def _insort(seq: list, value: int) -> None:
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    seq.insert(lo, value)


def metropolis_step(state, inst: Instance, beta: float, rng: Rng) -> tuple:
    """One Metropolis move from ``state``.

    The swap ``(i_out, i_in)`` is drawn with one uniform: ``i_out`` from the sorted
    support and ``i_in`` from the sorted complement. An acceptance uniform is
    drawn only for uphill moves at positive ``beta``.
    """
    state = as_support(state, inst.n)
    if not 0 < len(state) < inst.n:
        raise InvalidParameterError("the swap graph needs 0 < k' < n")
    chain = _Chain(inst, beta, state)
    chain.step(rng)
    return tuple(chain.state)


def _uniform_support(n: int, k_prime: int, rng: Rng) -> tuple:
    return sample_signal(n, k_prime, rng)


def initial_state(inst: Instance, cfg: ChainConfig, rng: Rng, sampler: ConditionalSampler | None = None) -> tuple:
    """Draw the starting support for one replication."""
    region = RegionSpec(cfg.ell, "A")
    if cfg.init == "fixed":
        v = as_support(cfg.fixed, inst.n, cfg.k_prime)
        if not region.contains(len(set(v) & set(inst.x))):
            raise InvalidParameterError(f"fixed init {v} is not inside region A (overlap < {cfg.ell})")
        return v
    if cfg.init == "uniform":
        return _uniform_support(inst.n, cfg.k_prime, rng)
    if sampler is not None:
        return sampler.sample(rng)
    try:
        check_budget(inst.n, cfg.k_prime, cfg.budget)
    except EnumerationTooLargeError:
        if cfg.beta != 0:
            raise
        # at beta = 0 the conditional law is uniform on A, so rejection is exact
        signal = set(inst.x)
        for _ in range(_REJECTION_CAP):
            v = _uniform_support(inst.n, cfg.k_prime, rng)
            if len(signal.intersection(v)) < cfg.ell:
                return v
        raise ZeroMassError("rejection sampling from region A did not terminate")
    return ConditionalSampler(inst, cfg.beta, cfg.k_prime, region, budget=cfg.budget).sample(rng)


def _validate(inst: Instance, cfg: ChainConfig) -> None:
    if cfg.k_prime >= inst.n:
        raise InvalidParameterError("k' = n leaves a single state; the chain is degenerate")
    RegionSpec(cfg.ell, "A").validate(inst.k, cfg.k_prime)


def run_chain(inst: Instance, cfg: ChainConfig, start, rng: Rng) -> HitResult:
    """Run from ``start`` until the overlap reaches ``ell`` or ``t_max`` steps pass."""
    chain = _Chain(inst, cfg.beta, start)
    trace = np.empty(cfg.t_max + 1, dtype=np.int32) if cfg.record_trace else None
    if trace is not None:
        trace[0] = chain.overlap
    accepted = 0
    for t in range(1, cfg.t_max + 1):
        accepted += chain.step(rng)
        if trace is not None:
            trace[t] = chain.overlap
        if chain.overlap >= cfg.ell:
            return HitResult(t, False, accepted, t, None if trace is None else trace[:t + 1])
    return HitResult(None, True, accepted, cfg.t_max, trace)


def hitting_time(inst: Instance, cfg: ChainConfig, rng: Rng, sampler: ConditionalSampler | None = None) -> HitResult:
    """First step at which the chain leaves region A (overlap >= ell)."""
    _validate(inst, cfg)
    start = initial_state(inst, cfg, rng, sampler)
    return run_chain(inst, cfg, start, rng)


def _replicate(rep: int, inst, cfg, rng, sampler) -> HitResult:
    return hitting_time(inst, cfg, rng.spawn(rep), sampler)


def hitting_times(inst: Instance, cfg: ChainConfig, rng: Rng, threads: int | None = 1) -> list[HitResult]:
    """``cfg.replications`` independent chains; replication ``r`` uses stream ``rng.spawn(r)``."""
    _validate(inst, cfg)
    sampler = None
    if cfg.init == "conditional" and cfg.replications > 1:
        try:
            sampler = ConditionalSampler(inst, cfg.beta, cfg.k_prime, RegionSpec(cfg.ell, "A"), budget=cfg.budget)
        except EnumerationTooLargeError:
            if cfg.beta != 0:
                raise
    fn = partial(_replicate, inst=inst, cfg=cfg, rng=rng, sampler=sampler)
    return parallel_map(fn, range(cfg.replications), threads)


@dataclass
class EscapeTable:
    rows: list
    depth: float
    replications: int
    timeout_count: int
    seed: int | None = None

    def summary(self) -> dict:
        return {"depth_used": self.depth, "replications": self.replications,
                "seed": self.seed, "timeout_count": self.timeout_count}


def time_grid(t_max: int, points: int = 20) -> list[int]:
    """Distinct integers, logarithmically spaced from 1 to ``t_max``."""
    grid = np.unique(np.rint(np.geomspace(1, t_max, max(points, 1))).astype(np.int64))
    return [int(t) for t in grid]


def escape_experiment(inst: Instance, cfg: ChainConfig, rng: Rng, points: int = 20,
                      depth: float | None = None, threads: int | None = 1) -> EscapeTable:
    """Empirical ``Pr{tau <= t}`` next to the bound ``t * exp(-D)``.

    Timed-out chains count as not having escaped by any ``t <= t_max``.
    """
    if depth is None:
        depth = few_depth(gibbs_profile(inst, cfg.beta, cfg.k_prime, budget=cfg.budget), cfg.ell)
    results = hitting_times(inst, cfg, rng, threads)
    taus = np.array([r.tau for r in results if not r.timed_out], dtype=np.int64)
    rows = []
    for t in time_grid(cfg.t_max, points):
        emp = float(np.count_nonzero(taus <= t)) / cfg.replications
        with np.errstate(over="ignore"):
            bound = float(t * np.exp(-depth))
        rows.append((t, emp, bound, bound >= 1.0))
    timeouts = sum(r.timed_out for r in results)
    return EscapeTable(rows, float(depth), cfg.replications, timeouts, inst.seed)


def random_walk_cover(n: int, k_prime: int, target, t_max: int, rng: Rng, start=None) -> HitResult:
    """Unweighted (beta = 0) walk until it lands on ``target``.

    The start is uniform on all k'-supports unless given; ``tau = 0`` when it
    already equals the target.
    """
    target = as_support(target, n, k_prime)
    if not 0 < k_prime < n:
        raise InvalidParameterError("the swap graph needs 0 < k' < n")
    if t_max < 1:
        raise InvalidParameterError("t_max must be >= 1")
    state = sorted(_uniform_support(n, k_prime, rng) if start is None else as_support(start, n, k_prime))
    if tuple(state) == target:
        return HitResult(0, False, 0, 0)
    members = set(state)
    comp = [i for i in range(n) if i not in members]
    goal = list(target)
    pairs = k_prime * (n - k_prime)
    for t in range(1, t_max + 1):
        a, b = divmod(rng.integer(pairs), n - k_prime)
        i_out, i_in = state[a], comp[b]
        del state[a]
        del comp[b]
        _insort(state, i_in)
        _insort(comp, i_out)
        if state == goal:
            return HitResult(t, False, t, t)
    return HitResult(None, True, t_max, t_max)


def random_walk_tail_bound(n: int, k_prime: int, t: float) -> float:
    """Markov bound ``k' n^(2k') / t`` on ``Pr{tau >= t}`` from a uniform start."""
    if t <= 0:
        raise InvalidParameterError("t must be positive")
    return k_prime * float(n) ** (2 * k_prime) / t


def transition_matrix(inst: Instance, beta: float, k_prime: int, max_states: int = 10**4):
    """Explicit transition matrix over all k'-supports in lexicographic order."""
    if not 0 < k_prime < inst.n:
        raise InvalidParameterError("the swap graph needs 0 < k' < n")
    states = list(enumerate_supports(inst.n, k_prime, budget=max_states))
    index = {s: i for i, s in enumerate(states)}
    size = len(states)
    prob = 1.0 / (k_prime * (inst.n - k_prime))
    mat = np.zeros((size, size))
    for i, v in enumerate(states):
        members = set(v)
        for i_out in v:
            for i_in in range(inst.n):
                if i_in in members:
                    continue
                dh = hamiltonian_delta(inst, v, i_out, i_in)
                u = tuple(sorted((members - {i_out}) | {i_in}))
                mat[i, index[u]] += prob * (1.0 if dh <= 0 else math.exp(-beta * dh))
        mat[i, i] += 1.0 - mat[i].sum()
    return states, mat
