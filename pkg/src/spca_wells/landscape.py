"""Restricted optima over overlap classes and the overlap gap certificate.

``phi(ell)`` is the least energy among k'-supports sharing exactly ``ell``
indices with the signal; ``psi(ell)`` is the largest noise quadratic form over
the same class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .enumeration import DEFAULT_BUDGET, check_budget, class_blocks, overlap_range
from .errors import InvalidParameterError, UndefinedDepthError
from .gibbs import GibbsProfile, few_depth, gibbs_profile
from .model import Instance, hamiltonian
from .parallel import parallel_map
from .theory import log_binomial

_TIE = 1e-9


@dataclass(frozen=True)
class PhiCurve:
    """``values[ell]`` for ``ell = 0 .. min(k, k')``; infeasible classes hold ``inf``.

    ``ell_min = floor(k k'/n)`` marks the lower end of the informative range; the
    curve itself is stored for every feasible overlap.
    """

    n: int
    k: int
    k_prime: int
    ell_min: int
    ell_max: int
    values: np.ndarray
    argmins: list = field(repr=False)
    seed: int | None = None

    def feasible(self, ell: int) -> bool:
        return 0 <= ell <= self.ell_max and self.argmins[ell] is not None

    @property
    def feasible_ells(self) -> list[int]:
        return [ell for ell in range(self.ell_max + 1) if self.argmins[ell] is not None]

    def rows(self):
        for ell in range(self.ell_max + 1):
            yield ell, float(self.values[ell]), self.argmins[ell]


def _class_minimum(ell: int, inst: Instance, k_prime: int):
    """Canonical minimum of the class: block energies shortlist, ``hamiltonian`` decides.

    Shortlisted supports are keyed by their canonical energy, keeping the
    lexicographically smallest support per value.
    """
    best = math.inf
    cands: dict[float, tuple] = {}
    for blk in class_blocks(inst.y, inst.x, k_prime, ell):
        best = min(best, float(blk.energy.min()))
        for p in np.flatnonzero(blk.energy <= best + _TIE):
            s = blk.support(int(p))
            h = hamiltonian(inst, s)
            if h not in cands or s < cands[h]:
                cands[h] = s
        if cands:
            floor = min(cands)
            cands = {h: s for h, s in cands.items() if h <= floor + _TIE}
    if not cands:
        return math.inf, None
    value = min(cands)
    return value, cands[value]


def phi_curve(inst: Instance, k_prime: int, budget: int | None = DEFAULT_BUDGET, threads: int | None = 1) -> PhiCurve:
    """Restricted minima of the energy for every overlap, by nested enumeration.

    Ties are broken toward the lexicographically smallest support.
    """
    check_budget(inst.n, k_prime, budget)
    top = min(inst.k, k_prime)
    feasible = list(overlap_range(inst.n, inst.k, k_prime))
    found = parallel_map(partial(_class_minimum, inst=inst, k_prime=k_prime), feasible, threads)
    values = np.full(top + 1, math.inf)
    argmins: list = [None] * (top + 1)
    for ell, (value, support) in zip(feasible, found):
        values[ell] = value
        argmins[ell] = support
    values.setflags(write=False)
    return PhiCurve(inst.n, inst.k, k_prime, inst.k * k_prime // inst.n, top, values, argmins, inst.seed)


def psi_curve(w: np.ndarray, x, k_prime: int, ell: int, budget: int | None = DEFAULT_BUDGET) -> float:
    """Largest ``v^T w v`` over supports with overlap ``ell``; ``-inf`` for an empty class."""
    w = np.asarray(w, dtype=float)
    check_budget(w.shape[0], k_prime, budget)
    best = -math.inf
    for blk in class_blocks(w, x, k_prime, ell):
        best = max(best, float(-blk.energy.min()))
    return best


@dataclass(frozen=True)
class OgpCertificate:
    holds: bool
    zeta1: int
    zeta2: int
    r: float
    witness_low: tuple | None
    witness_high: tuple | None
    seed: int | None = None

    @property
    def gap(self) -> int:
        return self.zeta2 - self.zeta1

    def to_dict(self) -> dict:
        return {
            "holds": self.holds, "zeta1": self.zeta1, "zeta2": self.zeta2, "r": self.r,
            "gap": self.gap,
            "witness_low": None if self.witness_low is None else list(self.witness_low),
            "witness_high": None if self.witness_high is None else list(self.witness_high),
            "seed": self.seed,
        }


def _side_min(curve: PhiCurve, ells) -> tuple[float, int | None]:
    best, arg = math.inf, None
    for ell in ells:
        if curve.feasible(ell) and curve.values[ell] < best:
            best, arg = float(curve.values[ell]), ell
    return best, arg


def _verdict(curve: PhiCurve, zeta1: int, zeta2: int, r: float) -> OgpCertificate:
    low, l1 = _side_min(curve, range(0, zeta1 + 1))
    high, l2 = _side_min(curve, range(zeta2, curve.ell_max + 1))
    band, _ = _side_min(curve, range(zeta1 + 1, zeta2))
    holds = l1 is not None and l2 is not None and max(low, high) <= r < band
    return OgpCertificate(
        holds, zeta1, zeta2, float(r),
        curve.argmins[l1] if holds else None,
        curve.argmins[l2] if holds else None,
        curve.seed,
    )


def ogp_certify(inst: Instance, k_prime: int, zeta1: int, zeta2: int, r: float,
                curve: PhiCurve | None = None, budget: int | None = DEFAULT_BUDGET) -> OgpCertificate:
    """Check the gap condition: ``max{phi(l1), phi(l2)} <= r < min_{zeta1 < l < zeta2} phi(l)``.

    ``l1 <= zeta1`` and ``l2 >= zeta2`` range over feasible overlaps; the
    witnesses are the corresponding restricted minimizers.
    """
    if zeta2 <= zeta1 + 2:
        raise InvalidParameterError(f"need zeta2 > zeta1 + 2, got ({zeta1}, {zeta2})")
    if curve is None:
        curve = phi_curve(inst, k_prime, budget)
    if not any(curve.feasible(ell) for ell in range(zeta1 + 1, zeta2)):
        raise InvalidParameterError(f"no feasible overlap strictly inside ({zeta1}, {zeta2})")
    return _verdict(curve, zeta1, zeta2, r)


def ogp_scan(inst: Instance, k_prime: int, curve: PhiCurve | None = None,
             budget: int | None = DEFAULT_BUDGET) -> OgpCertificate | None:
    """Widest certificate over all bands and thresholds, or None.

    Thresholds are midpoints of consecutive distinct curve values: the verdict
    only changes when ``r`` crosses a value of the curve.
    """
    if curve is None:
        curve = phi_curve(inst, k_prime, budget)
    ells = curve.feasible_ells
    if not ells:
        return None
    levels = sorted(set(float(curve.values[ell]) for ell in ells))
    thresholds = [(a + b) / 2.0 for a, b in zip(levels, levels[1:])]
    lo, hi = ells[0], ells[-1]
    best = None
    for z1 in range(lo, hi + 1):
        for z2 in range(z1 + 3, hi + 1):
            if best is not None and z2 - z1 <= best.gap:
                continue
            if not any(curve.feasible(ell) for ell in range(z1 + 1, z2)):
                continue
            for r in thresholds:
                cert = _verdict(curve, z1, z2, r)
                if cert.holds:
                    best = cert
                    break
    return best


@dataclass(frozen=True)
class SandwichResult:
    depth: float
    center: float
    lower: float
    upper: float
    passed: bool
    literal_center: float
    literal_passed: bool


def few_sandwich_check(inst: Instance, beta: float, k_prime: int, ell: int,
                       curve: PhiCurve | None = None, profile: GibbsProfile | None = None,
                       budget: int | None = DEFAULT_BUDGET) -> SandwichResult:
    """Compare the exact depth with ``beta [min_B phi - min_A phi]`` up to ``log C(n, k')``.

    ``A`` is overlap < ell and ``B`` is ell <= overlap <= 2 ell. The ``literal``
    fields evaluate the same bound with the two minima swapped and the first
    taken over overlap <= ell. Empty ``A`` or ``B`` raises UndefinedDepthError.
    """
    if profile is None:
        profile = gibbs_profile(inst, beta, k_prime, budget)
    if curve is None:
        curve = phi_curve(inst, k_prime, budget)
    depth = few_depth(profile, ell)
    min_a, _ = _side_min(curve, range(0, ell))
    if math.isinf(min_a):
        raise UndefinedDepthError(f"region A is empty at ell={ell}")
    min_b, _ = _side_min(curve, range(ell, 2 * ell + 1))
    min_le, _ = _side_min(curve, range(0, ell + 1))
    slack = log_binomial(inst.n, k_prime)
    center = 0.0 if beta == 0 else beta * (min_b - min_a)
    literal = 0.0 if beta == 0 else beta * (min_le - min_b)
    return SandwichResult(
        depth=depth, center=center, lower=center - slack, upper=center + slack,
        passed=abs(depth - center) <= slack + 1e-8,
        literal_center=literal, literal_passed=abs(depth - literal) <= slack + 1e-8,
    )
