"""Pauli error strings, channel distributions, and the metrics on them.

An n-qubit Pauli error is a tensor product of single-qubit Paulis, written
as n base-4 digits (0=I, 1=X, 2=Y, 3=Z) with the first qubit as the most
significant digit, so every error string has an integer index in [0, 4^n).
A Pauli channel is completely described by a probability distribution over
those 4^n strings.  This module provides the two interchangeable storage
layouts for such distributions (dense vector, sparse mapping), the lp
distances, Shannon entropy, support size, the entropy-continuity bound used
for error budgets, and the standard channel constructors.

All operations are pure functions on immutable values and are safe for
concurrent use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .rng import make_rng

PAULI_LABELS = "IXYZ"

#: Dense weight vectors are refused above this many qubits (4^10 is ~1M
#: entries); larger systems must use the sparse representation.
DENSE_QUBIT_LIMIT = 10

#: User-supplied weights may deviate from unit total by this much before
#: rejection; accepted inputs are renormalized exactly once.
NORMALIZATION_ATOL = 1e-9


class ShapeError(ValueError):
    """Operands describe systems of different sizes."""


class ResourceLimitError(RuntimeError):
    """Requested computation exceeds the configured size limits."""


# ---------------------------------------------------------------------------
# Pauli strings


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis as base-4 digits.

    ``digits[k]`` is the Pauli on qubit k (0=I, 1=X, 2=Y, 3=Z); the first
    qubit is the most significant digit of the integer index.
    """

    n: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        if len(self.digits) != self.n:
            raise ValueError(
                f"expected {self.n} digits, got {len(self.digits)}"
            )
        if any(d not in (0, 1, 2, 3) for d in self.digits):
            raise ValueError(f"digits must lie in {{0,1,2,3}}: {self.digits}")

    @property
    def index(self) -> int:
        """Base-4 integer index in [0, 4^n), first qubit most significant."""
        i = 0
        for d in self.digits:
            i = 4 * i + d
        return i

    @property
    def labels(self) -> str:
        """Human-readable label string such as ``"IXZ"``."""
        return "".join(PAULI_LABELS[d] for d in self.digits)


def encode(labels: str | Sequence[str]) -> tuple[PauliString, int]:
    """Map a label sequence like ``"ZX"`` to its PauliString and index.

    Raises ValueError for an empty sequence or an unknown symbol.
    """
    symbols = list(labels)
    if not symbols:
        raise ValueError("Pauli label sequence must be non-empty")
    digits = []
    for s in symbols:
        pos = PAULI_LABELS.find(str(s))
        if pos < 0:
            raise ValueError(f"unknown Pauli label {s!r}; expected one of I, X, Y, Z")
        digits.append(pos)
    ps = PauliString(len(digits), tuple(digits))
    return ps, ps.index


def decode(index: int, n: int) -> PauliString:
    """Inverse of :func:`encode`: integer index back to a PauliString."""
    if n <= 0:
        raise ValueError(f"qubit count must be positive, got {n}")
    if not 0 <= index < 4**n:
        raise ValueError(f"index {index} out of range [0, 4^{n})")
    digits = tuple((index >> (2 * (n - 1 - k))) & 3 for k in range(n))
    return PauliString(n, digits)


# ---------------------------------------------------------------------------
# Channel distributions


def _validated_weights(w: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{what}: weights must be finite")
    if np.any(w < 0):
        raise ValueError(f"{what}: weights must be nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > NORMALIZATION_ATOL:
        raise ValueError(
            f"{what}: weights sum to {total!r}, outside 1 +/- {NORMALIZATION_ATOL}"
        )
    # Renormalize exactly once so downstream algebra sees unit total.
    return w / total


class PauliDistribution:
    """Probability distribution over the 4^n Pauli error strings.

    Two storage layouts are supported and compare equal under every metric
    in this module:

    * dense: a length-4^n vector (only up to ``DENSE_QUBIT_LIMIT`` qubits);
    * sparse: aligned arrays of support indices and probabilities, for
      channels whose support is small compared to 4^n.

    Construction validates nonnegativity and unit total (within
    ``NORMALIZATION_ATOL``) and renormalizes exactly once.  Instances are
    immutable; exact zeros are preserved (dense) or dropped (sparse), so
    ``support_size`` is an exact count rather than a thresholded one.
    """

    __slots__ = ("n", "_dense", "_support", "_probs")

    def __init__(self, n: int, *, _dense=None, _support=None, _probs=None):
        if n <= 0:
            raise ValueError(f"qubit count must be positive, got {n}")
        self.n = int(n)
        self._dense = _dense
        self._support = _support
        self._probs = _probs

    # -- constructors

    @classmethod
    def from_dense(cls, n: int, weights) -> "PauliDistribution":
        if n > DENSE_QUBIT_LIMIT:
            raise ResourceLimitError(
                f"dense storage limited to {DENSE_QUBIT_LIMIT} qubits; "
                f"use from_sparse for n={n}"
            )
        w = np.asarray(weights, dtype=float)
        if w.shape != (4**n,):
            raise ShapeError(f"expected {4**n} weights for n={n}, got shape {w.shape}")
        w = _validated_weights(w, "dense distribution")
        w.flags.writeable = False
        return cls(n, _dense=w)

    @classmethod
    def from_sparse(cls, n: int, weights: Mapping[int, float]) -> "PauliDistribution":
        if not weights:
            raise ValueError("sparse distribution needs at least one entry")
        idx = np.fromiter((int(i) for i in weights.keys()), dtype=np.int64)
        w = np.fromiter((float(v) for v in weights.values()), dtype=float)
        if np.any(idx < 0) or np.any(idx >= 4**n):
            raise ValueError(f"support indices out of range [0, 4^{n})")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("duplicate support indices")
        w = _validated_weights(w, "sparse distribution")
        keep = w > 0
        idx, w = idx[keep], w[keep]
        order = np.argsort(idx)
        idx, w = idx[order], w[order]
        idx.flags.writeable = False
        w.flags.writeable = False
        return cls(n, _support=idx, _probs=w)

    # -- views

    @property
    def k(self) -> int:
        """Domain size 4^n."""
        return 4**self.n

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def weight(self, index: int) -> float:
        if not 0 <= index < self.k:
            raise ValueError(f"index {index} out of range [0, 4^{self.n})")
        if self.is_dense:
            return float(self._dense[index])
        pos = np.searchsorted(self._support, index)
        if pos < len(self._support) and self._support[pos] == index:
            return float(self._probs[pos])
        return 0.0

    def support(self) -> np.ndarray:
        """Sorted indices with strictly positive weight."""
        if self.is_dense:
            return np.nonzero(self._dense)[0]
        return self._support

    def support_probs(self) -> np.ndarray:
        """Probabilities aligned with :meth:`support`."""
        if self.is_dense:
            return self._dense[self._dense > 0]
        return self._probs

    def items(self) -> Iterator[tuple[int, float]]:
        """Iterate (index, probability) over the support in index order."""
        return zip(self.support().tolist(), self.support_probs().tolist())

    def to_dense(self) -> np.ndarray:
        """Full 4^n weight vector (refused above ``DENSE_QUBIT_LIMIT``)."""
        if self.is_dense:
            return self._dense
        if self.n > DENSE_QUBIT_LIMIT:
            raise ResourceLimitError(
                f"cannot densify a {self.n}-qubit distribution"
            )
        w = np.zeros(self.k)
        w[self._support] = self._probs
        return w

    def as_mapping(self) -> dict[int, float]:
        return dict(self.items())

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        layout = "dense" if self.is_dense else f"sparse[{len(self._support)}]"
        return f"PauliDistribution(n={self.n}, {layout})"


def _aligned(P: PauliDistribution, Q: PauliDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Weight vectors of both operands over a common index set.

    Indices outside either support carry zero weight in both operands and
    never affect any lp distance, so sparse pairs are aligned on the union
    of their supports instead of the full 4^n domain.
    """
    if P.n != Q.n:
        raise ShapeError(f"qubit counts differ: {P.n} vs {Q.n}")
    if P.is_dense or Q.is_dense:
        return P.to_dense(), Q.to_dense()
    union = np.union1d(P.support(), Q.support())

    def lookup(D: PauliDistribution) -> np.ndarray:
        out = np.zeros(len(union))
        pos = np.searchsorted(union, D.support())
        out[pos] = D.support_probs()
        return out

    return lookup(P), lookup(Q)


def check_norm_order(p: float) -> float:
    """Validate an lp norm order: any real p >= 1, including math.inf."""
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"norm order must satisfy p >= 1, got {p}")
    return p


def parse_norm_order(value) -> float:
    """Parse a norm order from user input; accepts "inf" for infinity."""
    if isinstance(value, str):
        text = value.strip().lower()
        p = math.inf if text in {"inf", "infinity", "oo"} else float(text)
    else:
        p = float(value)
    return check_norm_order(p)


def lp_distance(P: PauliDistribution, Q: PauliDistribution, p: float) -> float:
    """lp distance (sum |P(i)-Q(i)|^p)^(1/p); max pointwise gap for p=inf."""
    p = check_norm_order(p)
    a, b = _aligned(P, Q)
    diff = np.abs(a - b)
    if math.isinf(p):
        return float(diff.max(initial=0.0))
    if p == 1:
        return float(diff.sum())
    return float((diff**p).sum() ** (1.0 / p))


def shannon_entropy(P: PauliDistribution) -> float:
    """Shannon entropy of the error distribution in bits (0 log 0 := 0)."""
    w = P.support_probs()
    return float(-(w * np.log2(w)).sum()) if len(w) else 0.0


def support_size(P: PauliDistribution) -> int:
    """Number of error strings with strictly positive probability."""
    return int(len(P.support()))


def binary_entropy(eps: float) -> float:
    """Binary entropy in bits; endpoints 0 and 1 map to 0."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"binary_entropy defined on [0, 1], got {eps}")
    if eps in (0.0, 1.0):
        return 0.0
    return float(-eps * math.log2(eps) - (1.0 - eps) * math.log2(1.0 - eps))


def fannes_audenaert_bound(eps: float, n: int) -> float:
    """Continuity bound on the entropy gap of two n-qubit error distributions.

    For total-variation distance eps < 1/2 the entropies differ by at most
    ``eps * log2(4^n - 1) + binary_entropy(eps)`` bits.
    """
    if n <= 0:
        raise ValueError(f"qubit count must be positive, got {n}")
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"bound requires total variation < 1/2, got {eps}")
    return eps * math.log2(4.0**n - 1.0) + binary_entropy(eps)


# ---------------------------------------------------------------------------
# Standard channels


def identity_channel(n: int) -> PauliDistribution:
    """Noiseless channel: point mass on the all-identity string."""
    return PauliDistribution.from_sparse(n, {0: 1.0})


def depolarizing_channel(q: float, n: int) -> PauliDistribution:
    """Identity with probability 1-q, uniform over all 4^n strings with q."""
    _check_unit(q, "q")
    if n > DENSE_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"depolarizing channel has full support; n={n} exceeds the dense limit"
        )
    w = np.full(4**n, q / 4**n)
    w[0] += 1.0 - q
    return PauliDistribution.from_dense(n, w)


def uniform_channel(n: int) -> PauliDistribution:
    """Uniform distribution over all 4^n error strings (white noise)."""
    return depolarizing_channel(1.0, n)


def _iid_single_qubit_channel(q: float, error_digit: int, n: int) -> PauliDistribution:
    """Per-qubit i.i.d. mixture of identity (1-q) and one error type (q)."""
    _check_unit(q, "q")
    weights: dict[int, float] = {}
    for mask in range(2**n):
        nerr = int(mask).bit_count()
        w = (1.0 - q) ** (n - nerr) * q**nerr
        if w == 0.0:
            continue
        index = 0
        for k in range(n):
            bit = (mask >> (n - 1 - k)) & 1
            index = 4 * index + (error_digit if bit else 0)
        weights[index] = w
    return PauliDistribution.from_sparse(n, weights)


def bit_flip_channel(q: float, n: int) -> PauliDistribution:
    """Each qubit independently suffers an X error with probability q."""
    return _iid_single_qubit_channel(q, 1, n)


def dephasing_channel(q: float, n: int) -> PauliDistribution:
    """Each qubit independently suffers a Z error with probability q."""
    return _iid_single_qubit_channel(q, 3, n)


def sparse_random_channel(s: int, n: int, seed) -> PauliDistribution:
    """Random channel with support size s and flat-Dirichlet weights.

    The weight multiset depends only on (s, seed); the support indices are
    then drawn uniformly without replacement from [0, 4^n).
    """
    if not 1 <= s <= 4**n:
        raise ValueError(f"support size must lie in [1, 4^{n}], got {s}")
    rng = make_rng(seed)
    probs = rng.dirichlet(np.ones(s))
    # Rejection-sample distinct indices; s is small compared to 4^n in any
    # realistic use, so this terminates quickly without O(4^n) memory.
    chosen: list[int] = []
    seen: set[int] = set()
    while len(chosen) < s:
        draw = rng.integers(0, 4**n, size=s - len(chosen))
        for v in draw.tolist():
            if v not in seen:
                seen.add(v)
                chosen.append(v)
    return PauliDistribution.from_sparse(n, dict(zip(chosen, probs)))


def random_dense_channel(n: int, seed) -> PauliDistribution:
    """Flat-Dirichlet random distribution over all 4^n strings."""
    rng = make_rng(seed)
    return PauliDistribution.from_dense(n, rng.dirichlet(np.ones(4**n)))


def _check_unit(q: float, name: str) -> None:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {q}")


def make_channel(preset: str, n: int, *, q: float | None = None,
                 s: int | None = None, seed=None) -> PauliDistribution:
    """Construct a channel by preset name.

    Presets: ``identity``, ``depolarizing(q)``, ``bit_flip(q)``,
    ``dephasing(q)``, ``uniform``, ``sparse_random(s, seed)``.
    """
    if preset == "identity":
        return identity_channel(n)
    if preset == "uniform":
        return uniform_channel(n)
    if preset == "depolarizing":
        return depolarizing_channel(_require(q, "q", preset), n)
    if preset == "bit_flip":
        return bit_flip_channel(_require(q, "q", preset), n)
    if preset == "dephasing":
        return dephasing_channel(_require(q, "q", preset), n)
    if preset == "sparse_random":
        if seed is None:
            raise ValueError("sparse_random preset needs a seed")
        return sparse_random_channel(int(_require(s, "s", preset)), n, seed)
    raise ValueError(f"unknown channel preset {preset!r}")


def _require(value, name: str, preset: str):
    if value is None:
        raise ValueError(f"preset {preset!r} requires parameter {name!r}")
    return value


# ---------------------------------------------------------------------------
# Channel file format


def load_channel(path) -> PauliDistribution:
    """Load a channel from JSON: {"n": int, "weights": {"IXZ...": prob}}.

    Omitted labels mean zero weight; the label alphabet is ``IXYZ`` and the
    usual normalization tolerance applies.
    """
    data = json.loads(Path(path).read_text())
    try:
        n = int(data["n"])
        raw = data["weights"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"channel file {path}: expected keys 'n' and 'weights'") from exc
    if not isinstance(raw, dict) or not raw:
        raise ValueError(f"channel file {path}: 'weights' must be a non-empty mapping")
    mapping: dict[int, float] = {}
    for label, w in raw.items():
        ps, idx = encode(label)
        if ps.n != n:
            raise ValueError(
                f"channel file {path}: label {label!r} has length {ps.n}, expected {n}"
            )
        if idx in mapping:
            raise ValueError(f"channel file {path}: duplicate label {label!r}")
        mapping[idx] = float(w)
    return PauliDistribution.from_sparse(n, mapping)


def save_channel(P: PauliDistribution, path) -> None:
    """Write a channel in the JSON file format (support entries only)."""
    weights = {decode(int(i), P.n).labels: float(w) for i, w in P.items()}
    payload = {"n": P.n, "weights": weights}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Accuracy/confidence parameter bundle


@dataclass(frozen=True)
class LpParams:
    """Norm order, accuracy and failure probability for estimation tasks.

    ``p`` may be ``math.inf`` (stored exactly, not as a large float).
    """

    p: float
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        check_norm_order(self.p)
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
