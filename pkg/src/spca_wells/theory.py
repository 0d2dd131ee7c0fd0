"""Deterministic landscape quantities evaluated from closed forms.

Nothing here draws random numbers. Asymptotic side conditions are evaluated as
plain inequalities with unit constants and returned as flags.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import InvalidParameterError

LOG2 = math.log(2.0)
_EXACT_MAX = 64


class _LogFactorials:
    """Grow-only table of log(i!) built with Neumaier-compensated summation."""

    def __init__(self):
        self._values = [0.0]
        self._sum = 0.0
        self._comp = 0.0
        self._lock = threading.Lock()

    def __call__(self, a: int) -> float:
        if a >= len(self._values):
            self._extend(a)
        return self._values[a]

    def _extend(self, a: int) -> None:
        with self._lock:
            for i in range(len(self._values), a + 1):
                term = math.log(i)
                t = self._sum + term
                if abs(self._sum) >= abs(term):
                    self._comp += (self._sum - t) + term
                else:
                    self._comp += (term - t) + self._sum
                self._sum = t
                self._values.append(self._sum + self._comp)


log_factorial = _LogFactorials()


def log_binomial(a: int, b: int) -> float:
    """``log C(a, b)``; exact big-integer path for ``a <= 64``, log-factorial table above."""
    if a < 0 or b < 0 or b > a:
        raise InvalidParameterError(f"log_binomial needs 0 <= b <= a, got ({a}, {b})")
    if a <= _EXACT_MAX:
        return math.log(math.comb(a, b))
    return log_factorial(a) - log_factorial(b) - log_factorial(a - b)


def comb0(a: int, b: int) -> int:
    """Binomial coefficient that is zero outside ``0 <= b <= a``."""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class ModelParams:
    n: int
    k: int
    k_prime: int
    lam: float
    beta: float | None = None
    delta: float = 0.1

    def __post_init__(self):
        if not (1 <= self.k <= self.n and 1 <= self.k_prime <= self.n):
            raise InvalidParameterError(f"need 1 <= k, k' <= n; got {self}")
        if not self.lam > 0:
            raise InvalidParameterError("lambda must be positive")
        if self.beta is not None and self.beta < 0:
            raise InvalidParameterError("beta must be nonnegative")
        if not 0 < self.delta < 1:
            raise InvalidParameterError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class CurvePoint:
    ell: int
    gamma: float
    first_moment_threshold: float
    finite_difference: float | None = None


def class_log_count(n: int, k: int, k_prime: int, ell: int) -> float:
    """``log[C(k, ell) C(n-k, k'-ell)]``: size of the overlap-``ell`` class."""
    return log_binomial(k, ell) + log_binomial(n - k, k_prime - ell)


def gamma_domain(p: ModelParams) -> range:
    lo = max(p.k * p.k_prime // p.n, p.k_prime - (p.n - p.k))
    return range(lo, min(p.k, p.k_prime) + 1)


def _check_domain(p: ModelParams, ell: int) -> None:
    dom = gamma_domain(p)
    if ell not in dom:
        raise InvalidParameterError(f"ell={ell} outside the curve domain [{dom.start}, {dom.stop - 1}]")


def first_moment_threshold(p: ModelParams, ell: int, alpha_n: float) -> float:
    """Level below which the restricted optimum at overlap ``ell`` is unlikely to fall."""
    if alpha_n < 0:
        raise InvalidParameterError("alpha_n must be nonnegative")
    _check_domain(p, ell)
    entropy = class_log_count(p.n, p.k, p.k_prime, ell)
    return -p.lam * ell**2 / p.k - 2.0 * p.k_prime * math.sqrt((entropy + alpha_n) / p.n)


def gamma_value(p: ModelParams, ell: int) -> float:
    return first_moment_threshold(p, ell, 0.0)


def gamma_curve(p: ModelParams, ell: int, alpha_n: float = 0.0) -> CurvePoint:
    g = gamma_value(p, ell)
    fd = gamma_value(p, ell + 1) - g if ell + 1 in gamma_domain(p) else None
    return CurvePoint(ell, g, first_moment_threshold(p, ell, alpha_n), fd)


def first_moment_probability_bound(alpha_n: float, k_prime: int | None = None) -> float:
    """``exp(-alpha)/sqrt(alpha)`` per overlap, times ``k'`` after the union over overlaps."""
    if alpha_n <= 0:
        raise InvalidParameterError("alpha_n must be positive for the tail bound")
    per_ell = math.exp(-alpha_n) / math.sqrt(alpha_n)
    return per_ell if k_prime is None else k_prime * per_ell


class EllC(NamedTuple):
    value: float
    in_regime: bool


def ell_c(p: ModelParams) -> EllC:
    """Predicted turning scale of the Γ curve; ``in_regime`` is False when the inner log argument is <= 1."""
    if p.k_prime >= p.n:
        raise InvalidParameterError("ell_c needs k' < n")
    lnk = math.log(p.n / p.k_prime)
    inner = math.sqrt(p.n / (p.k_prime * lnk)) / (2.0 * p.lam)
    value = p.k * math.sqrt(p.k_prime / (p.n * lnk)) / (2.0 * p.lam) * math.log(inner)
    return EllC(value, inner > 1.0)


def gap_n(p: ModelParams, constant: float = 1.0) -> float:
    """Energy gap scale ``D k'k/(lambda n)``; the constant defaults to 1."""
    return constant * p.k_prime * p.k / (p.lam * p.n)


def gamma_shape_report(p: ModelParams, delta: float | None = None) -> dict:
    """Scan the Γ curve and compare its shape with the predicted monotonicity pattern."""
    delta = p.delta if delta is None else delta
    dom = list(gamma_domain(p))
    values = [gamma_value(p, ell) for ell in dom]
    diffs = [b - a for a, b in zip(values, values[1:])]
    argmax = dom[max(range(len(values)), key=lambda i: (values[i], -i))]
    prefix = 0
    for d in diffs:
        if d <= 0:
            break
        prefix += 1
    onset = None
    for i in range(len(diffs) - 1, -1, -1):
        if diffs[i] >= 0:
            break
        onset = dom[i]
    lc = ell_c(p) if p.k_prime < p.n else EllC(math.nan, False)
    report = {
        "n": p.n, "k": p.k, "k_prime": p.k_prime, "lambda": p.lam, "delta": delta,
        "ell_min": dom[0], "ell_max": dom[-1],
        "argmax": argmax,
        "increasing_prefix_length": prefix,
        "decreasing_suffix_onset": onset,
        "ell_c": lc.value, "ell_c_in_regime": lc.in_regime,
    }
    if lc.in_regime:
        inc_end = math.floor((1 - delta) * lc.value) - 1
        dec_start = 10 * math.ceil(lc.value) - 1
        inc = [diffs[i] > 0 for i, ell in enumerate(dom[:-1]) if ell <= inc_end]
        dec = [diffs[i] <= -p.lam * ell / p.k for i, ell in enumerate(dom[:-1]) if ell >= dec_start]
        report.update({
            "predicted_increasing_through": inc_end,
            "increasing_matches": all(inc),
            "predicted_decreasing_from": dec_start,
            "decreasing_matches": all(dec),
            "argmax_in_window": (1 - delta) * lc.value <= argmax <= 10 * lc.value,
        })
    return report


@dataclass(frozen=True)
class InformativeRanges:
    ell_low: float
    ell_high: float
    k_prime_valid: bool
    k_prime_bounds: tuple[float, float]
    ell_values: list[int] = field(default_factory=list)


def informative_ranges(p: ModelParams) -> InformativeRanges:
    """Overlaps worth reaching and sparsities worth searching.

    Overlaps must exceed ``max(1, kk'/n)`` strictly (no slack factor) and stay
    below the boosting level; ``k'`` is informative when ``min(k, k')`` clears
    the boosting threshold of a fully correlated support.
    """
    logn = math.log(p.n)
    low = max(1.0, p.k * p.k_prime / p.n)
    boost_level = p.k / p.lam * math.sqrt(p.k_prime / p.n * logn)
    high = boost_level / 2.0
    bounds = (p.k**2 * logn / (p.lam**2 * p.n), p.n * p.lam**2 / logn)
    ells = [ell for ell in range(math.floor(low) + 1, math.floor(high) + 1) if ell > low]
    return InformativeRanges(low, high, min(p.k, p.k_prime) >= boost_level, bounds, ells)


class HighTempBound(NamedTuple):
    value: float
    probability_floor: float
    ell_condition: bool
    sparsity_condition: bool
    region_condition: bool

    @property
    def applicable(self) -> bool:
        return self.ell_condition and self.sparsity_condition and self.region_condition


def high_temp_depth_bound(p: ModelParams, ell: int) -> HighTempBound:
    """Entropy lower bound ``-(4 beta lam/k) ell^2 + (log2/2) ell - log2`` with its side conditions."""
    if ell < 1:
        raise InvalidParameterError("ell must be >= 1")
    beta = 0.0 if p.beta is None else p.beta
    value = -4.0 * beta * p.lam / p.k * ell**2 + LOG2 / 2.0 * ell - LOG2
    return HighTempBound(
        value=value,
        probability_floor=1.0 - 2.0 ** (-(ell - 2) / 2.0),
        ell_condition=ell >= 2 * math.e * p.k * (p.k_prime / p.n) ** (1 - p.delta),
        sparsity_condition=p.k_prime <= p.n ** (1 - p.delta),
        region_condition=1 <= 2 * ell <= min(p.k, p.k_prime),
    )


class ChosenEll(NamedTuple):
    ell: int
    guaranteed_depth: float
    case: str


def choose_ell_high_temp(p: ModelParams, l1: float, l2: float) -> ChosenEll:
    """Correlation level guaranteeing a deep well for a given temperature.

    ``ell = (log2/16) k/(beta lam)`` between the two temperature breakpoints, ``l2``
    at higher temperature; rounded down and kept inside ``[l1, l2]``.
    """
    if l1 > l2:
        raise InvalidParameterError("need L1 <= L2")
    beta = 0.0 if p.beta is None else p.beta
    b1 = LOG2 / 16.0 * p.k / (p.lam * l1)
    b2 = LOG2 / 16.0 * p.k / (p.lam * l2)
    if beta > b1 * (1 + 1e-12):
        raise InvalidParameterError(f"beta={beta} exceeds the high-temperature limit {b1}")
    if beta <= b2:
        real, case = float(l2), "ell=L2"
    else:
        real, case = LOG2 / 16.0 * p.k / (beta * p.lam), "interior"
    lo, hi = math.ceil(l1 - 1e-9), math.floor(l2 + 1e-9)
    if lo > hi:
        raise InvalidParameterError(f"no integer correlation in [{l1}, {l2}]")
    # tolerance absorbs representation error when the real value is an integer
    ell = min(max(math.floor(real + 1e-9), lo), hi)
    scale = l2 if beta == 0 else min(LOG2 / 16.0 * p.k / (beta * p.lam), l2)
    return ChosenEll(ell, LOG2 / 4.0 * scale - LOG2, case)


def pair_overlap_count(p: ModelParams, ell: int, m: int) -> int:
    """Ordered pairs ``(v, u)`` of k'-supports, both with overlap ``ell`` with the signal, sharing ``m`` indices."""
    n, k, kp = p.n, p.k, p.k_prime
    size = comb0(k, ell) * comb0(n - k, kp - ell)
    if size == 0:
        return 0
    rest = n - k - kp + ell
    inner = sum(
        comb0(ell, m0) * comb0(k - ell, ell - m0) * comb0(kp - ell, m - m0) * comb0(rest, kp - ell - m + m0)
        for m0 in range(0, min(m, ell) + 1)
    )
    return size * inner


class TailMass(NamedTuple):
    exact: float
    bound: float
    applicable: bool
    holds: bool


def tail_mass_bound(p: ModelParams, ell: int, delta: float | None = None) -> TailMass:
    """Uniform mass of ``{overlap >= ell}`` against ``2^(1-ell)``; exact rational comparison."""
    delta = p.delta if delta is None else delta
    n, k, kp = p.n, p.k, p.k_prime
    num = sum(comb0(k, t) * comb0(n - k, kp - t) for t in range(max(ell, 0), min(k, kp) + 1))
    frac = Fraction(num, math.comb(n, kp))
    bound = Fraction(2) ** (1 - ell)
    return TailMass(float(frac), float(bound), ell >= 2 * math.e * k * (kp / n) ** (1 - delta), frac <= bound)


class BinomRatio(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


def binom_ratio_check(n: int, k_prime: int, t: int, delta: float) -> BinomRatio:
    """Compare ``log[C(n, k'-t)/C(n, k')]`` with ``-t (1-delta) log(n/k')``."""
    if not (0 <= t <= k_prime and k_prime >= 1 and k_prime <= n ** (1 - delta) + 1e-9):
        raise InvalidParameterError(f"need 0 <= t <= k' <= n^(1-delta); got n={n}, k'={k_prime}, t={t}")
    lhs = math.log(Fraction(math.comb(n, k_prime - t), math.comb(n, k_prime)))
    rhs = -t * (1 - delta) * math.log(n / k_prime)
    return BinomRatio(lhs, rhs, lhs <= rhs + 1e-12)


def conjectured_runtime(p: ModelParams) -> float:
    """Reference exponent ``k^2/(lambda^2 n)`` of the conjectured runtime scale."""
    return p.k**2 / (p.lam**2 * p.n)


def curve_rows(p: ModelParams, alpha_n: float = 0.0) -> list[CurvePoint]:
    return [gamma_curve(p, ell, alpha_n) for ell in gamma_domain(p)]
