from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osdlab.gf2 import (
    BinaryMatrix,
    BitWord,
    Permutation,
    RankDeficientError,
    apply_permutation,
    compose,
    encode,
    encode_many,
    format_matrix,
    gauss_echelon,
    hamming_distance,
    pack_bits,
    parse_matrix,
    rank,
    unpack_bits,
    xor_into,
)

HAMMING = BinaryMatrix.from_rows(["1000110", "0100011", "0010111", "0001101"])


def bitwords(length):
    return st.integers(0, 2**length - 1).map(lambda v: BitWord(length, v))


def matrices(max_k=6, max_n=12):
    return st.integers(1, max_k).flatmap(
        lambda k: st.integers(k, max_n).flatmap(
            lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=k, max_size=k)
        )
    ).map(lambda rows: BinaryMatrix.from_dense(np.array(rows, dtype=np.uint8)))


def codeword_set(G):
    k = G.rows
    U = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8)
    return {tuple(c) for c in encode_many(U, G)}


# ----- packing and BitWord ---------------------------------------------------


@pytest.mark.parametrize("n", [1, 7, 63, 64, 65, 130])
def test_pack_roundtrip(n):
    rng = np.random.default_rng(n)
    bits = rng.integers(0, 2, size=(5, n), dtype=np.uint8)
    packed = pack_bits(bits)
    assert packed.shape == (5, (n + 63) // 64)
    assert np.array_equal(unpack_bits(packed, n), bits)


def test_bitword_storage_is_clean():
    with pytest.raises(ValueError):
        BitWord(3, 0b1000)
    assert BitWord.from_string("1000").value == 1
    w = BitWord.from_string("1011")
    assert list(w) == [1, 0, 1, 1]
    assert w.weight == 3
    assert w.support() == [0, 2, 3]
    assert str(w) == "1011"


def test_xor_examples():
    z = BitWord.zeros(4)
    assert xor_into(z, z) == z
    assert xor_into(BitWord.from_string("1010"), BitWord.from_string("0110")) == BitWord.from_string("1100")
    with pytest.raises(ValueError):
        xor_into(BitWord.zeros(3), BitWord.zeros(4))


@given(bitwords(40), bitwords(40))
def test_xor_self_inverse_and_distance(a, b):
    assert xor_into(a, a) == BitWord.zeros(40)
    assert hamming_distance(a, b) == xor_into(a, b).weight


# ----- encoding ---------------------------------------------------------------


def test_encode_examples():
    assert encode(BitWord.zeros(4), HAMMING) == BitWord.zeros(7)
    for i in range(4):
        assert encode(BitWord.unit(4, i), HAMMING) == HAMMING.row(i)
    assert str(encode(BitWord.from_string("1000"), HAMMING)) == "1000110"
    with pytest.raises(ValueError):
        encode(BitWord.zeros(3), HAMMING)


@given(bitwords(4), bitwords(4))
def test_encode_linear(u, v):
    assert encode(u ^ v, HAMMING) == encode(u, HAMMING) ^ encode(v, HAMMING)


def test_encode_many_matches_encode():
    rng = np.random.default_rng(1)
    U = rng.integers(0, 2, size=(50, 4), dtype=np.uint8)
    C = encode_many(U, HAMMING)
    for u, c in zip(U, C):
        assert encode(BitWord.from_bits(u), HAMMING) == BitWord.from_bits(c)
    assert np.array_equal(C[:, :4], U)


# ----- permutations -----------------------------------------------------------


def test_permutation_examples():
    v = ("a", "b", "c")
    assert apply_permutation(Permutation.identity(3), v) == v
    assert apply_permutation(Permutation.from_one_based((3, 2, 1)), v) == ("c", "b", "a")
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))
    with pytest.raises(ValueError):
        apply_permutation(Permutation.identity(2), v)


@given(st.permutations(list(range(9))), st.lists(st.integers(), min_size=9, max_size=9))
def test_permutation_group_laws(perm, v):
    p = Permutation(tuple(perm))
    assert apply_permutation(compose(p, p.inverse()), v) == v
    assert compose(p, p.inverse()).is_identity()
    q = Permutation(tuple(reversed(perm)))
    assert apply_permutation(compose(p, q), v) == apply_permutation(q, apply_permutation(p, v))


def test_permutation_on_arrays_and_words():
    p = Permutation.from_one_based((2, 3, 1))
    assert np.array_equal(p.apply(np.array([[10, 20, 30]])), [[20, 30, 10]])
    assert p.apply(BitWord.from_string("100")) == BitWord.from_string("001")
    assert p.one_based() == (2, 3, 1)


# ----- elimination ------------------------------------------------------------


def test_gauss_on_systematic_is_identity():
    R, perm, r = gauss_echelon(HAMMING)
    assert R == HAMMING and perm.is_identity() and r == 4


def test_gauss_needs_column_swap():
    G = BinaryMatrix.from_rows(["0110", "0111"])
    R, perm, r = gauss_echelon(G)
    # columns 2 and 4 carry the pivots; column 3 equals column 2 in the reduced rows
    assert r == 2
    assert perm.one_based() == (2, 4, 1, 3)
    assert np.array_equal(R.dense[:, :2], np.eye(2, dtype=np.uint8))
    assert codeword_set(R) == {tuple(apply_permutation(perm, np.array(c))) for c in codeword_set(G)}


def test_gauss_rank_deficient():
    with pytest.raises(RankDeficientError):
        gauss_echelon(BinaryMatrix.from_rows(["1100", "1100"]))
    with pytest.raises(RankDeficientError):
        gauss_echelon(BinaryMatrix.from_rows(["0110", "0111"]), allow_column_swaps=False)


def test_gauss_unreduced_is_upper_triangular():
    G = BinaryMatrix.from_rows(["1101", "1011", "0111"])
    R, perm, _ = gauss_echelon(G, reduced=False)
    left = R.dense[:, :3]
    assert np.array_equal(np.tril(left), np.eye(3, dtype=np.uint8))


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_gauss_preserves_code(G):
    k = G.rows
    if rank(G) < k:
        with pytest.raises(RankDeficientError):
            gauss_echelon(G)
        return
    R, perm, r = gauss_echelon(G)
    assert r == k and rank(R) == k
    assert R.is_systematic()
    permuted = {tuple(apply_permutation(perm, np.array(c))) for c in codeword_set(G)}
    assert codeword_set(R) == permuted


@settings(max_examples=40, deadline=None)
@given(matrices(), st.randoms(use_true_random=False))
def test_gauss_column_order(G, rnd):
    if rank(G) < G.rows:
        return
    order = list(range(G.cols))
    rnd.shuffle(order)
    R, perm, _ = gauss_echelon(G, column_order=order)
    # pivots are taken greedily in scan order
    first = [order.index(c) for c in perm.map[: G.rows]]
    assert first == sorted(first)
    assert codeword_set(R) == {tuple(apply_permutation(perm, np.array(c))) for c in codeword_set(G)}


def test_rank():
    assert rank(HAMMING) == 4
    assert rank(BinaryMatrix.from_rows(["110", "011", "101"])) == 2
    assert rank(BinaryMatrix.from_rows(["10", "01", "11"])) == 2


# ----- text format ------------------------------------------------------------


def test_matrix_text_roundtrip(tmp_path):
    text = format_matrix(HAMMING)
    assert text.splitlines()[0].split() == ["4", "7"]
    assert parse_matrix(text) == HAMMING
    messy = "  4 7\n1 0 0 0 1 1 0\n\n0100011\n 0010111 \n0001101\n"
    assert parse_matrix(messy) == HAMMING
    with pytest.raises(ValueError):
        parse_matrix("2 3\n101\n")
    with pytest.raises(ValueError):
        parse_matrix("1 3\n102\n")
