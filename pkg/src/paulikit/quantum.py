"""Exact small-n verification of Bell-measurement sampling, and the
classical sampler it justifies.

The verification oracle works directly in matrix algebra: it builds the
channel's Choi state by applying the channel's Kraus operators to half of a
maximally entangled state, then measures it in the Bell basis two
independent ways -- via Bell-basis projectors, and via an explicit
gate-level circuit (H/CNOT entangling pairs, channel on one half, uncompute,
computational-basis readout).  Both must reproduce the channel's error
distribution exactly; once that is verified, one channel use is
interchangeable with one classical sample of the distribution, which is
what :func:`draw_samples` produces.  Every strategy here is non-adaptive:
measurement settings never depend on earlier outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import (
    PauliDistribution,
    ResourceLimitError,
    ShapeError,
    decode,
    lp_distance,
)
from .rng import make_rng, normalize_seed

#: Exact density-matrix routines are refused above this many qubits by
#: default: the Choi state of an n-qubit channel is a 4^n x 4^n matrix
#: (n=5 is ~16 MB, n=6 would be ~268 MB).
N_MAX_EXACT = 5

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGENVALUE_ATOL = 1e-10

SIGMA = (
    np.array([[1, 0], [0, 1]], dtype=complex),      # I
    np.array([[0, 1], [1, 0]], dtype=complex),      # X
    np.array([[0, -1j], [1j, 0]], dtype=complex),   # Y
    np.array([[1, 0], [0, -1]], dtype=complex),     # Z
)

# Measurement bits per qubit pair after the uncompute circuit, mapped to the
# Pauli digit they reveal.  First bit is the phase bit (the qubit that got
# the Hadamards), second is the flip bit: (0,0)->I, (0,1)->X, (1,1)->Y,
# (1,0)->Z.  Global phases (the -i on Y) never survive the Born rule, so
# only the bit pattern matters.
BITS_TO_DIGIT = {(0, 0): 0, (0, 1): 1, (1, 1): 2, (1, 0): 3}

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def pauli_matrix(digits) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the Pauli string with the given digits."""
    return reduce(np.kron, (SIGMA[d] for d in digits))


class DensityMatrix:
    """Complex density operator: Hermitian, unit trace, PSD (all to 1e-10)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix) -> None:
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"density matrix must be square, got {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ShapeError(f"dimension must be a power of 2, got {dim}")
        if np.abs(m - m.conj().T).max() > HERMITICITY_ATOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > TRACE_ATOL or abs(np.trace(m).imag) > TRACE_ATOL:
            raise ValueError("matrix trace differs from 1 beyond tolerance")
        if np.linalg.eigvalsh(m).min() < -EIGENVALUE_ATOL:
            raise ValueError("matrix has a negative eigenvalue beyond tolerance")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def basis_state(cls, n: int, index: int = 0) -> "DensityMatrix":
        m = np.zeros((2**n, 2**n), dtype=complex)
        m[index, index] = 1.0
        return cls(m)

    @classmethod
    def from_state_vector(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(2**n, dtype=complex) / 2**n)


@dataclass(frozen=True)
class SampleBatch:
    """N i.i.d. error-string indices drawn from a channel's distribution.

    ``count`` doubles as the number of channel applications spent: one
    sample costs exactly one channel use, no more and no fewer.
    """

    n: int
    outcomes: np.ndarray
    seed: tuple[int, ...]
    count: int

    def __post_init__(self) -> None:
        out = np.asarray(self.outcomes, dtype=np.int64)
        if out.ndim != 1:
            raise ValueError("outcomes must be a 1-D sequence")
        if self.count != len(out):
            raise ValueError(f"count={self.count} but {len(out)} outcomes")
        if len(out) and (out.min() < 0 or out.max() >= 4**self.n):
            raise ValueError(f"outcomes out of range [0, 4^{self.n})")
        out.flags.writeable = False
        object.__setattr__(self, "outcomes", out)
        object.__setattr__(self, "seed", normalize_seed(self.seed))

    @property
    def queries(self) -> int:
        """Channel applications consumed to obtain this batch (= count)."""
        return self.count


# ---------------------------------------------------------------------------
# Exact channel action


def apply_channel(P: PauliDistribution, rho: DensityMatrix) -> DensityMatrix:
    """Mixture of Pauli conjugations: sum_i P(i) tau_i rho tau_i^dagger."""
    if rho.dim != 2**P.n:
        raise ShapeError(f"state dimension {rho.dim} != 2^{P.n}")
    out = np.zeros_like(rho.matrix)
    for index, w in P.items():
        tau = pauli_matrix(decode(index, P.n).digits)
        out += w * (tau @ rho.matrix @ tau.conj().T)
    return DensityMatrix(out)


def _phi_plus_vector(n: int) -> np.ndarray:
    """Maximally entangled 2^(-n/2) sum_i |ii> on A (x) A'."""
    d = 2**n
    phi = np.zeros(d * d, dtype=complex)
    phi[np.arange(d) * d + np.arange(d)] = 1.0 / math.sqrt(d)
    return phi


def choi_state(P: PauliDistribution, n_max_exact: int = N_MAX_EXACT) -> DensityMatrix:
    """Choi state: the channel applied to half of a maximally entangled state.

    The 4^n-dimensional output is assembled term by term from the channel's
    Kraus operators acting on the second half of |Phi_n>.
    """
    n = P.n
    if n > n_max_exact:
        raise ResourceLimitError(f"choi_state limited to {n_max_exact} qubits, got {n}")
    d = 2**n
    phi = _phi_plus_vector(n)
    eye = np.eye(d, dtype=complex)
    lam = np.zeros((d * d, d * d), dtype=complex)
    for index, w in P.items():
        tau = pauli_matrix(decode(index, n).digits)
        v = np.kron(eye, tau) @ phi
        lam += w * np.outer(v, v.conj())
    return DensityMatrix(lam)


def bell_outcome_distribution(
    P: PauliDistribution, n_max_exact: int = N_MAX_EXACT
) -> PauliDistribution:
    """Born probabilities of the 4^n Bell-basis projectors on the Choi state.

    Computed by explicit matrix algebra: each Bell vector is constructed as
    (I (x) tau_i)|Phi_n> and its probability is <v| Lambda |v>.
    """
    n = P.n
    if n > n_max_exact:
        raise ResourceLimitError(
            f"bell_outcome_distribution limited to {n_max_exact} qubits, got {n}"
        )
    lam = choi_state(P, n_max_exact).matrix
    d = 2**n
    phi = _phi_plus_vector(n)
    eye = np.eye(d, dtype=complex)
    probs = np.empty(4**n)
    for j in range(4**n):
        tau = pauli_matrix(decode(j, n).digits)
        v = np.kron(eye, tau) @ phi
        probs[j] = np.real(np.vdot(v, lam @ v))
    return PauliDistribution.from_dense(n, np.clip(probs, 0.0, None))


def bell_circuit_distribution(
    P: PauliDistribution, n_max_exact: int = N_MAX_EXACT
) -> PauliDistribution:
    """Gate-level simulation of the Bell sampling circuit.

    Qubits are interleaved as [control_1, target_1, ..., control_n,
    target_n].  Each pair is entangled by H then CNOT, the channel acts
    jointly on the n target qubits, the entangler is uncomputed (CNOT then
    H), and all 2n qubits are read in the computational basis.  Bit pairs
    map to Pauli digits via ``BITS_TO_DIGIT``.
    """
    n = P.n
    if n > n_max_exact:
        raise ResourceLimitError(
            f"bell_circuit_distribution limited to {n_max_exact} qubits, got {n}"
        )
    pair_prep = _CNOT @ np.kron(_HADAMARD, SIGMA[0])
    pair_unprep = np.kron(_HADAMARD, SIGMA[0]) @ _CNOT
    prep = reduce(np.kron, [pair_prep] * n)
    unprep = reduce(np.kron, [pair_unprep] * n)

    psi0 = prep[:, 0]  # circuit input is |0...0>
    readout = np.zeros(4**n)
    for index, w in P.items():
        digits = decode(index, n).digits
        kraus = reduce(np.kron, (np.kron(SIGMA[0], SIGMA[d]) for d in digits))
        branch = unprep @ (kraus @ psi0)
        readout += w * np.abs(branch) ** 2

    probs = np.zeros(4**n)
    for z in range(4**n):
        pauli_index = 0
        for pair in range(n):
            b1 = (z >> (2 * n - 1 - 2 * pair)) & 1
            b2 = (z >> (2 * n - 2 - 2 * pair)) & 1
            pauli_index = 4 * pauli_index + BITS_TO_DIGIT[(b1, b2)]
        probs[pauli_index] += readout[z]
    return PauliDistribution.from_dense(n, probs)


def verify_bell_sampling(P: PauliDistribution, n_max_exact: int = N_MAX_EXACT) -> dict:
    """Max pointwise deviations between the two oracles and the channel law."""
    exact = bell_outcome_distribution(P, n_max_exact)
    circuit = bell_circuit_distribution(P, n_max_exact)
    return {
        "projector_vs_channel": lp_distance(exact, P, math.inf),
        "circuit_vs_channel": lp_distance(circuit, P, math.inf),
        "circuit_vs_projector": lp_distance(circuit, exact, math.inf),
    }


# ---------------------------------------------------------------------------
# Classical sampling


def draw_samples(P: PauliDistribution, N: int, seed) -> SampleBatch:
    """N i.i.d. draws from the error distribution via inverse CDF.

    Deterministic given the seed/stream identifier.  Dense and sparse
    representations of the same distribution yield identical batches, since
    zero-weight bins can never be selected.
    """
    if N < 0:
        raise ValueError(f"sample count must be nonnegative, got {N}")
    rng = make_rng(seed)
    support = P.support()
    cdf = np.cumsum(P.support_probs())
    cdf[-1] = 1.0  # guard the top edge against rounding
    u = rng.random(N)
    outcomes = support[np.searchsorted(cdf, u, side="right")]
    return SampleBatch(n=P.n, outcomes=outcomes, seed=normalize_seed(seed), count=int(N))


def simulate_channel_from_samples(
    P: PauliDistribution, rho: DensityMatrix, seed
) -> DensityMatrix:
    """One channel application realized classically: sample i, conjugate by tau_i.

    Averaging over many seeds converges to :func:`apply_channel`.
    """
    if rho.dim != 2**P.n:
        raise ShapeError(f"state dimension {rho.dim} != 2^{P.n}")
    batch = draw_samples(P, 1, seed)
    tau = pauli_matrix(decode(int(batch.outcomes[0]), P.n).digits)
    return DensityMatrix(tau @ rho.matrix @ tau.conj().T)
