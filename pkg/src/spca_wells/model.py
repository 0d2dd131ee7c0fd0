"""Spiked-Wigner instances and the Hamiltonian over sparse supports.

A support is a sorted tuple of distinct indices in ``[0, n)``; it stands for the
binary vector with ones at those indices.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidMoveError, InvalidParameterError
from .rng import Rng

Support = tuple


def as_support(indices: Iterable[int], n: int, size: int | None = None) -> tuple:
    """Validate and canonicalize a support (sorted tuple of distinct indices)."""
    s = tuple(sorted(int(i) for i in indices))
    if len(set(s)) != len(s):
        raise InvalidParameterError(f"support has repeated indices: {s}")
    if s and (s[0] < 0 or s[-1] >= n):
        raise InvalidParameterError(f"support {s} not within [0, {n})")
    if size is not None and len(s) != size:
        raise InvalidParameterError(f"support has {len(s)} elements, expected {size}")
    return s


def overlap(v: Sequence[int], x: Sequence[int]) -> int:
    """Number of shared indices ``|v ∩ x|``."""
    return len(set(v).intersection(x))


def beta_bayes(lam: float, n: int, k: int) -> float:
    """Inverse temperature at which the Gibbs measure is the posterior: λn/(2k)."""
    if k < 1 or lam <= 0:
        raise InvalidParameterError("beta_bayes needs k >= 1 and lambda > 0")
    return lam * n / (2.0 * k)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Instance:
    """Observation ``y = (lam/k) x x^T + w`` together with its generating pieces."""

    n: int
    k: int
    lam: float
    x: tuple
    w: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    seed: int | None = None
    noise_scale: float = 1.0

    def with_lambda(self, lam: float) -> "Instance":
        """Same signal and noise, different signal strength."""
        return build_observation(self.x, lam, self.w, seed=self.seed, noise_scale=self.noise_scale)


def sample_signal(n: int, k: int, rng: Rng) -> tuple:
    """Uniformly random k-subset of ``[0, n)`` by partial Fisher-Yates."""
    if k < 1 or k > n:
        raise InvalidParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    pool = list(range(n))
    for i in range(k):
        j = i + rng.integer(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return tuple(sorted(pool[:k]))


def sample_goe(n: int, rng: Rng, scale: float = 1.0) -> np.ndarray:
    """GOE(n) matrix: off-diagonal variance 1/n, diagonal 2/n.

    Upper-triangle entries (diagonal included) are filled row-major from the
    Box-Muller stream, then mirrored.
    """
    if n < 1:
        raise InvalidParameterError("GOE dimension must be positive")
    iu, ju = np.triu_indices(n)
    z = rng.normals(iu.size)
    sd = np.where(iu == ju, math.sqrt(2.0 / n), math.sqrt(1.0 / n)) * scale
    w = np.zeros((n, n))
    w[iu, ju] = z * sd
    w[ju, iu] = w[iu, ju]
    return w


def build_observation(x: Sequence[int], lam: float, w: np.ndarray, seed: int | None = None,
                      noise_scale: float = 1.0) -> Instance:
    if lam < 0 or not math.isfinite(lam):
        raise InvalidParameterError(f"lambda must be a nonnegative finite number, got {lam}")
    if len(x) == 0:
        raise InvalidParameterError("signal support must be nonempty")
    n = w.shape[0]
    x = as_support(x, n)
    k = len(x)
    w = np.array(w, dtype=float)
    y = w.copy()
    idx = np.asarray(x)
    y[np.ix_(idx, idx)] += lam / k
    return Instance(n=n, k=k, lam=float(lam), x=x, w=_readonly(w), y=_readonly(y),
                    seed=seed, noise_scale=float(noise_scale))


def generate_instance(n: int, k: int, lam: float, rng: Rng, noise_scale: float = 1.0) -> Instance:
    """Draw the signal first, then the noise, from one stream."""
    x = sample_signal(n, k, rng)
    w = sample_goe(n, rng, scale=noise_scale)
    return build_observation(x, lam, w, seed=rng.seed, noise_scale=noise_scale)


def split_observation(inst: Instance, rng: Rng) -> tuple[Instance, Instance]:
    """Split ``y`` into two observations with independent noise and strength λ/√2.

    With fresh noise ``g`` distributed like ``w``: ``y1 = (y + g)/√2`` and
    ``y2 = (y - g)/√2``; ``(w ± g)/√2`` are independent GOE matrices.
    """
    g = sample_goe(inst.n, rng, scale=inst.noise_scale)
    r2 = math.sqrt(2.0)
    lam = inst.lam / r2
    halves = []
    for sign in (1.0, -1.0):
        w = (inst.w + sign * g) / r2
        y = (inst.y + sign * g) / r2
        halves.append(Instance(n=inst.n, k=inst.k, lam=lam, x=inst.x, w=_readonly(w), y=_readonly(y),
                               seed=inst.seed, noise_scale=inst.noise_scale))
    return halves[0], halves[1]


def hamiltonian(inst: Instance, v: Sequence[int]) -> float:
    """Energy ``H(v) = -v^T y v`` (diagonal included)."""
    idx = np.asarray(v, dtype=np.intp)
    if idx.size == 0:
        return 0.0
    return -float(inst.y[np.ix_(idx, idx)].sum())


def quadratic_form(m: np.ndarray, v: Sequence[int]) -> float:
    """``v^T m v`` for a binary vector given by its support."""
    idx = np.asarray(v, dtype=np.intp)
    return float(m[np.ix_(idx, idx)].sum()) if idx.size else 0.0


def hamiltonian_delta(inst: Instance, v: Sequence[int], i_out: int, i_in: int) -> float:
    """``H(v') - H(v)`` for ``v' = v - {i_out} + {i_in}``, in O(|v|) time."""
    members = set(v)
    if i_out not in members or i_in in members:
        raise InvalidMoveError(f"cannot swap out {i_out} / in {i_in} for support {tuple(v)}")
    y = inst.y
    idx = np.asarray(v, dtype=np.intp)
    r_out = y[i_out, idx].sum()
    r_in = y[i_in, idx].sum()
    return float(2.0 * r_out - y[i_out, i_out] - 2.0 * r_in + 2.0 * y[i_in, i_out] - y[i_in, i_in])


# -- serialization -------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    iu, ju = np.triu_indices(inst.n)
    upper = np.ascontiguousarray(inst.w[iu, ju], dtype="<f8")
    doc = {
        "n": inst.n,
        "k": inst.k,
        "lambda": inst.lam,
        "seed": inst.seed,
        "x": list(inst.x),
        "w": base64.b64encode(upper.tobytes()).decode("ascii"),
    }
    if inst.noise_scale != 1.0:
        doc["noise_scale"] = inst.noise_scale
    return doc


def instance_from_dict(doc: dict) -> Instance:
    n = int(doc["n"])
    upper = np.frombuffer(base64.b64decode(doc["w"]), dtype="<f8")
    if upper.size != n * (n + 1) // 2:
        raise InvalidParameterError("noise payload does not match the dimension")
    iu, ju = np.triu_indices(n)
    w = np.zeros((n, n))
    w[iu, ju] = upper
    w[ju, iu] = upper
    inst = build_observation(doc["x"], float(doc["lambda"]), w, seed=doc.get("seed"),
                             noise_scale=float(doc.get("noise_scale", 1.0)))
    if inst.k != int(doc["k"]):
        raise InvalidParameterError("declared k does not match the signal support")
    return inst


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
