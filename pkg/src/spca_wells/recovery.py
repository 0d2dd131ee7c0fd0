"""Support recovery baselines and the boosting step.

Success always means exact equality of the estimated support with the signal.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .enumeration import DEFAULT_BUDGET, check_budget
from .errors import InvalidParameterError
from .landscape import phi_curve
from .model import Instance, split_observation
from .rng import Rng


@dataclass(frozen=True)
class RecoveryResult:
    estimate: tuple
    method: str
    exact: bool
    overlap: int
    wall_time: float
    k_prime: int | None = None
    enumerations: int = 0
    intermediate_overlap: int | None = None


def _result(inst: Instance, estimate, method: str, start: float, **extra) -> RecoveryResult:
    estimate = tuple(sorted(int(i) for i in estimate))
    ov = len(set(estimate) & set(inst.x))
    exact = len(estimate) == inst.k and ov == inst.k
    return RecoveryResult(estimate, method, exact, ov, time.perf_counter() - start, **extra)


def top_k(scores: np.ndarray, k: int) -> tuple:
    """Indices of the ``k`` largest scores, ties toward the smaller index."""
    order = np.lexsort((np.arange(scores.size), -scores))
    return tuple(sorted(int(i) for i in order[:k]))


def signed_top_k(scores: np.ndarray, k: int) -> tuple:
    """Top ``k`` of ``s * scores`` with ``s = ±1`` chosen to widen the k-th/(k+1)-th gap."""
    best, best_gap = None, -math.inf
    for s in (1.0, -1.0):
        z = s * scores
        srt = np.sort(z)[::-1]
        gap = math.inf if k >= z.size else float(srt[k - 1] - srt[k])
        if gap > best_gap:
            best, best_gap = top_k(z, k), gap
    return best


def diagonal_thresholding(inst: Instance) -> RecoveryResult:
    """The ``k`` largest diagonal entries of ``y``."""
    start = time.perf_counter()
    return _result(inst, top_k(np.diag(inst.y).copy(), inst.k), "diagonal", start)


@dataclass(frozen=True)
class PowerResult:
    vector: np.ndarray
    eigenvalue: float
    iterations: int
    converged: bool
    degenerate: bool


def _iterate(apply, v: np.ndarray, stop: float, max_iter: int):
    for it in range(1, max_iter + 1):
        w = apply(v)
        theta = float(v @ w)
        if np.linalg.norm(w - theta * v) <= stop:
            return v, theta, it, True
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return v, 0.0, it, True
        v = w / norm
    return v, float(v @ apply(v)), max_iter, False


def power_iteration(y: np.ndarray, rng: Rng, tol: float = 1e-8, max_iter: int = 10000) -> PowerResult:
    """Dominant eigenvector of a symmetric matrix from a random Gaussian start.

    Stops once ``||Yv - (v^T Y v) v|| <= tol * ||Y||_F``. A deflated second run
    flags ``degenerate`` when the next eigenvalue matches the first in magnitude.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    stop = tol * np.linalg.norm(y)
    v = rng.normals(n)
    v /= np.linalg.norm(v)
    v, theta, its, ok = _iterate(lambda u: y @ u, v, stop, max_iter)
    degenerate = False
    if n > 1 and theta != 0.0:
        u = rng.normals(n)
        u -= (u @ v) * v
        u /= np.linalg.norm(u)
        _, theta2, _, _ = _iterate(lambda z: y @ z - theta * (v @ z) * v, u, stop, min(max_iter, 500))
        degenerate = abs(theta2) >= abs(theta) * (1 - 1e-8)
    return PowerResult(v, theta, its, ok, degenerate)


def pca(inst: Instance, rng: Rng, tol: float = 1e-8, max_iter: int = 10000) -> RecoveryResult:
    """Top ``k`` coordinates of the sign-resolved leading eigenvector."""
    start = time.perf_counter()
    pr = power_iteration(inst.y, rng, tol, max_iter)
    return _result(inst, signed_top_k(pr.vector, inst.k), "pca", start)


def boost_threshold(n: int, k: int, lam: float, epsilon: float = 0.0, constant: float = 4.0) -> float:
    """Correlation ``|<v, x>|/||v||`` above which boosting provably succeeds."""
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    return (constant + epsilon) * (k / lam) * math.sqrt(math.log(n) / n)


def boost_margin(v: np.ndarray, inst: Instance, epsilon: float = 0.0, constant: float = 4.0) -> float:
    """Ratio of the guess's correlation with the signal to the boosting threshold."""
    v = np.asarray(v, dtype=float)
    corr = abs(float(v[list(inst.x)].sum())) / float(np.linalg.norm(v))
    return corr / boost_threshold(inst.n, inst.k, inst.lam, epsilon, constant)


def boost(inst2: Instance, v: np.ndarray) -> tuple:
    """Threshold ``Y2 v`` to a size-k support; ``v`` must be independent of ``Y2``'s noise."""
    v = np.asarray(v, dtype=float)
    if v.shape != (inst2.n,):
        raise InvalidParameterError(f"guess must have length {inst2.n}")
    if not np.any(v):
        raise InvalidParameterError("cannot boost the zero vector")
    return signed_top_k(inst2.y @ v, inst2.k)


def indicator(support, n: int) -> np.ndarray:
    v = np.zeros(n)
    v[list(support)] = 1.0
    return v


def pca_boost(inst: Instance, rng: Rng, tol: float = 1e-8, max_iter: int = 10000) -> RecoveryResult:
    """Leading eigenvector of one half of a split observation, boosted on the other."""
    start = time.perf_counter()
    y1, y2 = split_observation(inst, rng)
    pr = power_iteration(y1.y, rng, tol, max_iter)
    return _result(inst, boost(y2, pr.vector), "pca_boost", start)


def _argmax_support(inst: Instance, k_prime: int, budget) -> tuple:
    curve = phi_curve(inst, k_prime, budget)
    return min((curve.values[ell], curve.argmins[ell]) for ell in curve.feasible_ells)[1]


def mle_exhaustive(inst: Instance, budget: int | None = DEFAULT_BUDGET) -> RecoveryResult:
    """Exact maximizer of ``v^T y v`` over k-supports; ties toward the smallest support."""
    start = time.perf_counter()
    count = check_budget(inst.n, inst.k, budget)
    return _result(inst, _argmax_support(inst, inst.k, budget), "mle", start,
                   k_prime=inst.k, enumerations=count)


def subexp_sparsity(n: int, k: int, lam: float, c_mult: float = 1.0) -> int:
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    return min(n, max(1, math.floor(c_mult * k * k / (lam * lam * n) + 0.5)))


def subexp_search(inst: Instance, rng: Rng, c_mult: float = 1.0, budget: int | None = DEFAULT_BUDGET) -> RecoveryResult:
    """Exhaustive k'-sparse search on one half, boosted on the other, ``k' ~ c k^2/(lam^2 n)``."""
    start = time.perf_counter()
    kp = subexp_sparsity(inst.n, inst.k, inst.lam, c_mult)
    count = check_budget(inst.n, kp, budget)
    y1, y2 = split_observation(inst, rng)
    guess = _argmax_support(y1, kp, budget)
    est = boost(y2, indicator(guess, inst.n))
    return _result(inst, est, "subexp", start, k_prime=kp, enumerations=count,
                   intermediate_overlap=len(set(guess) & set(inst.x)))


METHODS = ("diagonal", "pca", "pca_boost", "mle", "subexp")


def run_method(name: str, inst: Instance, rng: Rng, budget: int | None = DEFAULT_BUDGET,
               c_mult: float = 1.0, tol: float = 1e-8, max_iter: int = 10000) -> RecoveryResult:
    if name == "diagonal":
        return diagonal_thresholding(inst)
    if name == "pca":
        return pca(inst, rng, tol, max_iter)
    if name == "pca_boost":
        return pca_boost(inst, rng, tol, max_iter)
    if name == "mle":
        return mle_exhaustive(inst, budget)
    if name == "subexp":
        return subexp_search(inst, rng, c_mult, budget)
    raise InvalidParameterError(f"unknown method {name!r}; choose from {METHODS}")
