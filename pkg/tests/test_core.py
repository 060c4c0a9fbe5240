import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paulikit import core
from paulikit.core import (
    LpParams,
    PauliDistribution,
    PauliString,
    ResourceLimitError,
    ShapeError,
    binary_entropy,
    decode,
    encode,
    fannes_audenaert_bound,
    load_channel,
    lp_distance,
    make_channel,
    parse_norm_order,
    save_channel,
    shannon_entropy,
    support_size,
)

from conftest import random_dense

digit_lists = st.lists(st.integers(0, 3), min_size=1, max_size=8)


# ---------------------------------------------------------------------------
# Pauli strings


def test_encode_examples():
    assert encode("II")[1] == 0
    assert encode("Y")[1] == 2
    assert encode("ZX")[1] == 13  # 3*4 + 1, first qubit most significant


def test_encode_rejects_unknown_symbol():
    with pytest.raises(ValueError, match="unknown Pauli label"):
        encode("IQ")
    with pytest.raises(ValueError, match="non-empty"):
        encode("")


@given(digit_lists)
def test_index_roundtrip(digits):
    ps = PauliString(len(digits), tuple(digits))
    assert decode(ps.index, ps.n) == ps
    assert encode(ps.labels)[0] == ps
    assert 0 <= ps.index < 4**ps.n


def test_pauli_string_invariants():
    with pytest.raises(ValueError):
        PauliString(2, (0,))
    with pytest.raises(ValueError):
        PauliString(1, (4,))
    with pytest.raises(ValueError):
        decode(-1, 2)
    with pytest.raises(ValueError):
        decode(16, 2)


# ---------------------------------------------------------------------------
# Distributions and metrics


def test_lp_distance_examples():
    point = PauliDistribution.from_sparse(1, {0: 1.0})
    uniform = core.uniform_channel(1)
    assert lp_distance(point, point, 1) == 0.0
    assert lp_distance(point, uniform, 1) == pytest.approx(1.5, abs=1e-12)
    assert lp_distance(point, uniform, math.inf) == pytest.approx(0.75, abs=1e-12)


def test_lp_distance_errors():
    P = core.uniform_channel(1)
    Q = core.uniform_channel(2)
    with pytest.raises(ShapeError):
        lp_distance(P, Q, 1)
    with pytest.raises(ValueError):
        lp_distance(P, P, 0.5)


@given(st.integers(0, 2**31), st.floats(1.0, 6.0), st.floats(0.0, 6.0))
@settings(max_examples=60, deadline=None)
def test_lp_monotone_in_p(seed, p, bump):
    P = random_dense(2, (9000, seed))
    Q = random_dense(2, (9001, seed))
    q = p + bump
    assert lp_distance(P, Q, q) <= lp_distance(P, Q, p) + 1e-12
    assert lp_distance(P, Q, math.inf) <= lp_distance(P, Q, p) + 1e-12


@given(st.integers(0, 2**31), st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]))
@settings(max_examples=60, deadline=None)
def test_lp_triangle_inequality(seed, p):
    P = random_dense(2, (9002, seed))
    Q = random_dense(2, (9003, seed))
    R = random_dense(2, (9004, seed))
    assert lp_distance(P, Q, p) <= (
        lp_distance(P, R, p) + lp_distance(R, Q, p) + 1e-12
    )


@given(st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_l1_is_twice_total_variation(seed):
    P = random_dense(2, (9005, seed))
    U = core.uniform_channel(2)
    tv = float(np.maximum(P.to_dense() - U.to_dense(), 0.0).sum())
    assert lp_distance(P, U, 1) == pytest.approx(2.0 * tv, abs=1e-12)


@given(st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_entropy_permutation_invariant(seed):
    P = random_dense(2, (9006, seed))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(16)
    Q = PauliDistribution.from_dense(2, P.to_dense()[perm])
    assert shannon_entropy(P) == pytest.approx(shannon_entropy(Q), abs=1e-12)


def test_entropy_examples():
    assert shannon_entropy(core.uniform_channel(3)) == pytest.approx(6.0, abs=1e-12)
    assert shannon_entropy(core.identity_channel(3)) == 0.0


def test_support_size_examples():
    assert support_size(core.identity_channel(2)) == 1
    assert support_size(core.uniform_channel(2)) == 16


def test_dense_sparse_agreement():
    P_dense = random_dense(2, 77)
    P_sparse = PauliDistribution.from_sparse(2, P_dense.as_mapping())
    Q = random_dense(2, 78)
    for p in (1.0, 1.5, 2.0, math.inf):
        assert lp_distance(P_dense, Q, p) == pytest.approx(
            lp_distance(P_sparse, Q, p), abs=1e-12
        )
    assert shannon_entropy(P_dense) == pytest.approx(shannon_entropy(P_sparse), abs=1e-12)
    assert support_size(P_dense) == support_size(P_sparse)
    # sparse-sparse alignment must cover both supports
    A = PauliDistribution.from_sparse(2, {0: 0.5, 3: 0.5})
    B = PauliDistribution.from_sparse(2, {1: 1.0})
    assert lp_distance(A, B, 1) == pytest.approx(2.0, abs=1e-12)


def test_validation_rules():
    with pytest.raises(ValueError, match="nonnegative"):
        PauliDistribution.from_dense(1, [1.2, -0.2, 0.0, 0.0])
    with pytest.raises(ValueError, match="sum"):
        PauliDistribution.from_dense(1, [0.5, 0.4, 0.0, 0.0])
    # within tolerance: accepted and renormalized to exactly unit total
    w = np.array([0.25, 0.25, 0.25, 0.25 + 5e-10])
    P = PauliDistribution.from_dense(1, w)
    assert P.to_dense().sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ResourceLimitError):
        PauliDistribution.from_dense(11, [])
    with pytest.raises(ValueError):
        PauliDistribution.from_sparse(1, {})
    with pytest.raises(ValueError, match="out of range"):
        PauliDistribution.from_sparse(1, {4: 1.0})


def test_exact_zero_support():
    P = PauliDistribution.from_dense(1, [0.5, 0.0, 0.5, 0.0])
    assert support_size(P) == 2
    S = PauliDistribution.from_sparse(1, {0: 0.5, 1: 0.0, 2: 0.5})
    assert support_size(S) == 2  # exact zeros dropped, no thresholding


# ---------------------------------------------------------------------------
# Entropy bounds


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)
    assert binary_entropy(0.09) == pytest.approx(0.436, abs=1e-3)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_fannes_audenaert_bound():
    assert fannes_audenaert_bound(0.09, 10) == pytest.approx(2.236, abs=5e-3)
    assert fannes_audenaert_bound(1e-9, 10) < 1e-6
    with pytest.raises(ValueError):
        fannes_audenaert_bound(0.5, 10)


def test_entropy_gap_bounded_for_worked_pair():
    k = 4**10
    P = PauliDistribution.from_dense(10, _two_level(k, 0.99))
    Phat = PauliDistribution.from_dense(10, _two_level(k, 0.9))
    tv = lp_distance(P, Phat, 1) / 2.0
    assert tv == pytest.approx(0.09, abs=1e-9)
    gap = abs(shannon_entropy(Phat) - shannon_entropy(P))
    assert gap == pytest.approx(2.188, abs=5e-3)
    assert gap <= fannes_audenaert_bound(tv, 10)
    assert support_size(P) == k


def _two_level(k: int, head: float) -> np.ndarray:
    w = np.full(k, (1.0 - head) / (k - 1))
    w[0] = head
    return w


# ---------------------------------------------------------------------------
# Channel constructors


def test_make_channel_examples():
    assert make_channel("identity", 2).as_mapping() == {0: 1.0}
    dep = make_channel("depolarizing", 1, q=1.0)
    np.testing.assert_allclose(dep.to_dense(), np.full(4, 0.25))
    bf = make_channel("bit_flip", 1, q=0.25)
    assert bf.as_mapping() == pytest.approx({0: 0.75, 1: 0.25})
    dz = make_channel("dephasing", 1, q=0.25)
    assert dz.as_mapping() == pytest.approx({0: 0.75, 3: 0.25})


def test_bit_flip_multi_qubit_is_iid():
    P = core.bit_flip_channel(0.25, 2)
    # digits only I/X; weight (1-q)^(#I) q^(#X)
    assert P.weight(encode("II")[1]) == pytest.approx(0.5625)
    assert P.weight(encode("IX")[1]) == pytest.approx(0.1875)
    assert P.weight(encode("XX")[1]) == pytest.approx(0.0625)
    assert P.weight(encode("IZ")[1]) == 0.0


def test_sparse_random_channel():
    P = core.sparse_random_channel(5, 3, 123)
    Q = core.sparse_random_channel(5, 3, 123)
    assert support_size(P) == 5
    assert P.as_mapping() == Q.as_mapping()  # deterministic in the seed
    assert P.support_probs().sum() == pytest.approx(1.0, abs=1e-12)
    # weight multiset depends only on (s, seed), not on n
    R = core.sparse_random_channel(5, 6, 123)
    np.testing.assert_allclose(
        np.sort(P.support_probs()), np.sort(R.support_probs()), atol=1e-15
    )
    with pytest.raises(ValueError):
        core.sparse_random_channel(17, 2, 1)
    with pytest.raises(ValueError):
        make_channel("depolarizing", 1, q=1.5)
    with pytest.raises(ValueError):
        make_channel("nonsense", 1)


# ---------------------------------------------------------------------------
# File format


def test_channel_file_roundtrip(tmp_path):
    P = core.sparse_random_channel(4, 2, 5)
    path = tmp_path / "chan.json"
    save_channel(P, path)
    Q = load_channel(path)
    assert Q.n == P.n
    assert Q.as_mapping() == pytest.approx(P.as_mapping())


def test_channel_file_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 2, "weights": {"IXZ": 1.0}}))
    with pytest.raises(ValueError, match="length"):
        load_channel(path)
    path.write_text(json.dumps({"n": 1, "weights": {"Q": 1.0}}))
    with pytest.raises(ValueError, match="unknown Pauli label"):
        load_channel(path)
    path.write_text(json.dumps({"weights": {"I": 1.0}}))
    with pytest.raises(ValueError, match="expected keys"):
        load_channel(path)
    # omitted labels mean zero; normalization tolerance enforced
    path.write_text(json.dumps({"n": 1, "weights": {"I": 0.7, "X": 0.3 + 2e-10}}))
    P = load_channel(path)
    assert support_size(P) == 2


# ---------------------------------------------------------------------------
# Parameter bundles


def test_lp_params_validation():
    LpParams(math.inf, 0.1, 0.1)  # inf representable exactly
    with pytest.raises(ValueError):
        LpParams(0.9, 0.1, 0.1)
    with pytest.raises(ValueError):
        LpParams(1, 0.0, 0.1)
    with pytest.raises(ValueError):
        LpParams(1, 0.1, 1.0)


def test_parse_norm_order():
    assert parse_norm_order("inf") == math.inf
    assert parse_norm_order("2") == 2.0
    assert parse_norm_order(1) == 1.0
    with pytest.raises(ValueError):
        parse_norm_order("0.3")
