"""Exact Gibbs measures over k'-sparse supports, resolved by overlap with the signal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import DEFAULT_BUDGET, LogSumExp, check_budget, class_blocks, logsumexp, overlap_range
from .errors import InvalidParameterError, UndefinedDepthError, ZeroMassError
from .model import Instance
from .rng import Rng

REGION_KINDS = ("A", "B", "not_A")


@dataclass(frozen=True)
class RegionSpec:
    """``A``: overlap < ell; ``B``: ell <= overlap <= 2*ell; ``not_A``: overlap >= ell."""

    ell: int
    kind: str = "A"

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise InvalidParameterError(f"unknown region kind {self.kind!r}")
        if self.ell < 1:
            raise InvalidParameterError("ell must be a positive integer")

    def validate(self, k: int, k_prime: int) -> None:
        if not 1 <= 2 * self.ell <= min(k, k_prime):
            raise InvalidParameterError(
                f"need 1 <= 2*ell <= min(k, k') = {min(k, k_prime)}, got ell={self.ell}")

    def contains(self, m: int) -> bool:
        if self.kind == "A":
            return m < self.ell
        if self.kind == "B":
            return self.ell <= m <= 2 * self.ell
        return m >= self.ell


@dataclass(frozen=True)
class GibbsProfile:
    beta: float
    n: int
    k: int
    k_prime: int
    log_mass: np.ndarray
    log_z: float

    def log_region(self, region: RegionSpec) -> float:
        return logsumexp([lm for m, lm in enumerate(self.log_mass) if region.contains(m)])


def _check_beta(beta: float) -> None:
    if not beta >= 0 or math.isinf(beta):
        raise InvalidParameterError(f"beta must be finite and nonnegative, got {beta}")


def gibbs_profile(inst: Instance, beta: float, k_prime: int, budget: int | None = DEFAULT_BUDGET) -> GibbsProfile:
    """Per-overlap log partition masses ``log sum_{<v,x>=m} exp(-beta H(v))``.

    At ``beta == 0`` every weight is one and the masses are the exact class sizes.
    """
    _check_beta(beta)
    check_budget(inst.n, k_prime, budget)
    top = min(inst.k, k_prime)
    log_mass = np.full(top + 1, -math.inf)
    for m in overlap_range(inst.n, inst.k, k_prime):
        if beta == 0:
            log_mass[m] = math.log(math.comb(inst.k, m) * math.comb(inst.n - inst.k, k_prime - m))
            continue
        acc = LogSumExp()
        for blk in class_blocks(inst.y, inst.x, k_prime, m):
            acc.add(-beta * blk.energy)
        log_mass[m] = acc.value
    log_mass.setflags(write=False)
    return GibbsProfile(beta=float(beta), n=inst.n, k=inst.k, k_prime=k_prime,
                        log_mass=log_mass, log_z=logsumexp(log_mass))


def few_depth(profile: GibbsProfile, ell: int) -> float:
    """Free-energy-well depth ``log mu(A) - log mu(B)`` at correlation ``ell``."""
    RegionSpec(ell).validate(profile.k, profile.k_prime)
    log_b = logsumexp(profile.log_mass[ell:2 * ell + 1])
    if log_b == -math.inf:
        raise UndefinedDepthError(f"region B is empty at ell={ell}")
    return logsumexp(profile.log_mass[:ell]) - log_b


def free_energy_curve(profile: GibbsProfile) -> list[tuple[int, float, float]]:
    """Rows ``(m, log_mass, probability)`` for every overlap class."""
    rows = []
    for m, lm in enumerate(profile.log_mass):
        prob = math.exp(lm - profile.log_z) if lm > -math.inf else 0.0
        rows.append((m, float(lm), prob))
    return rows


def _region_classes(inst: Instance, k_prime: int, region: RegionSpec):
    return [m for m in overlap_range(inst.n, inst.k, k_prime) if region.contains(m)]


def sample_conditional(inst: Instance, beta: float, k_prime: int, region: RegionSpec, rng: Rng,
                       budget: int | None = DEFAULT_BUDGET) -> tuple:
    """One exact draw from the Gibbs measure conditioned on ``region``.

    Two streaming passes: the first finds the region's maximum log-weight and
    total mass, the second walks the cumulative mass up to ``u * total``.
    Consumes exactly one uniform.
    """
    _check_beta(beta)
    check_budget(inst.n, k_prime, budget)
    classes = _region_classes(inst, k_prime, region)
    top = -math.inf
    for m in classes:
        for blk in class_blocks(inst.y, inst.x, k_prime, m):
            top = max(top, float((-beta * blk.energy).max()))
    if top == -math.inf:
        raise ZeroMassError(f"region {region} has no supports")
    total = 0.0
    for m in classes:
        for blk in class_blocks(inst.y, inst.x, k_prime, m):
            total += float(np.exp(-beta * blk.energy - top).sum())
    target = rng.uniform() * total
    running = 0.0
    last = None
    for m in classes:
        for blk in class_blocks(inst.y, inst.x, k_prime, m):
            cum = running + np.cumsum(np.exp(-beta * blk.energy - top))
            hit = int(np.searchsorted(cum, target, side="right"))
            if hit < cum.size:
                return blk.support(hit)
            running = float(cum[-1])
            last = blk.support(cum.size - 1)
    return last


class ConditionalSampler:
    """Materialized version of :func:`sample_conditional` for repeated draws.

    Uses the same enumeration order and consumes one uniform per draw.
    """

    def __init__(self, inst: Instance, beta: float, k_prime: int, region: RegionSpec,
                 budget: int | None = DEFAULT_BUDGET):
        _check_beta(beta)
        check_budget(inst.n, k_prime, budget)
        supports, logw = [], []
        for m in _region_classes(inst, k_prime, region):
            for blk in class_blocks(inst.y, inst.x, k_prime, m):
                supports.append(blk.supports())
                logw.append(-beta * blk.energy)
        if not supports:
            raise ZeroMassError(f"region {region} has no supports")
        self.supports = np.concatenate(supports)
        logw = np.concatenate(logw)
        self.cumulative = np.cumsum(np.exp(logw - logw.max()))

    def __len__(self):
        return self.supports.shape[0]

    def sample(self, rng: Rng) -> tuple:
        target = rng.uniform() * self.cumulative[-1]
        i = min(int(np.searchsorted(self.cumulative, target, side="right")), len(self) - 1)
        return tuple(self.supports[i].tolist())
