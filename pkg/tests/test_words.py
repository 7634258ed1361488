import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cuntz import (
    EndoHandle,
    Perm,
    apply_endo,
    chain_product,
    convolve,
    perm_to_matrix,
    rank,
    unrank,
)
from cuntz.algebra import WordSum, alg_equal

from conftest import random_perm, shift_unitary_perm


def test_rank_examples():
    assert rank((1, 1, 1), 2) == 0
    assert unrank(0, 2, 3) == (1, 1, 1)
    assert rank((2, 2, 2), 2) == 7
    assert rank((2, 3), 3) == 1 * 3 + 2


def test_rank_errors():
    with pytest.raises(ValueError):
        rank((0, 1), 2)
    with pytest.raises(ValueError):
        rank((1, 3), 2)
    with pytest.raises(ValueError):
        unrank(8, 2, 3)
    with pytest.raises(ValueError):
        unrank(-1, 2, 2)


@given(st.integers(2, 4), st.integers(0, 4), st.data())
def test_rank_unrank_roundtrip(n, k, data):
    r = data.draw(st.integers(0, n ** k - 1))
    assert rank(unrank(r, n, k), n) == r


def test_perm_validation():
    with pytest.raises(ValueError):
        Perm(2, 2, [0, 1, 2, 2])
    with pytest.raises(ValueError):
        Perm(2, 2, [0, 1, 2])
    with pytest.raises(ValueError):
        Perm.from_one_line("2 2 : 0 1 3 3")


def test_one_line_roundtrip(flip_flop):
    text = flip_flop.to_one_line()
    assert text == "2 1 : 1 0"
    assert Perm.from_one_line(text) == flip_flop


def test_embed_identity():
    e = Perm.identity(2, 1).embed(3)
    assert e == Perm.identity(2, 3)


def test_embed_flip(flip_flop):
    e = flip_flop.embed(2)
    # (1,1)->(2,1), (1,2)->(2,2), (2,1)->(1,1), (2,2)->(1,2)
    assert e.image == (2, 3, 0, 1)
    assert flip_flop.embed(1) is flip_flop


def test_embed_lower_level_fails(flip_flop):
    with pytest.raises(ValueError):
        flip_flop.embed(0)


def test_shift_examples(flip_flop):
    assert Perm.identity(2, 2).shift() == Perm.identity(2, 3)
    s = flip_flop.shift()
    # (1,1)->(1,2), (1,2)->(1,1), (2,1)->(2,2), (2,2)->(2,1)
    assert s.image == (1, 0, 3, 2)


def test_double_shift_fixes_two_letters():
    rng = np.random.default_rng(0)
    p = random_perm(rng, 2, 1)
    s2 = p.shift().shift()
    for r, v in enumerate(s2.image):
        assert r // 2 == v // 2  # first two letters untouched


def test_chain_product_identity():
    for r in (1, 2, 3):
        assert chain_product(Perm.identity(2, 2), r) == Perm.identity(2, r + 1)


def test_chain_product_flip(flip_flop):
    u2 = chain_product(flip_flop, 2)
    assert u2.image == (3, 2, 1, 0)  # 11<->22, 12<->21
    assert chain_product(flip_flop, 1) == flip_flop


def test_chain_product_matches_matrices():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = random_perm(rng, 2, 2)
        r = 3
        got = perm_to_matrix(chain_product(p, r)).data
        u = perm_to_matrix(p).data
        eye = np.eye(2)
        want = (
            np.kron(u, np.eye(4))
            @ np.kron(np.kron(eye, u), eye)
            @ np.kron(np.eye(4), u)
        )
        assert (got == want).all()


def test_chain_product_cocycle():
    # u_{r+s} = u_r . phi^r(u_s)
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = random_perm(rng, 2, 2)
        r, s = 2, 2
        lhs = chain_product(p, r + s)
        rhs_tail = chain_product(p, s)
        for _ in range(r):
            rhs_tail = rhs_tail.shift()
        rhs = chain_product(p, r).embed(lhs.k) * rhs_tail
        assert lhs == rhs


def test_shift_embed_commute():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_perm(rng, 3, 1)
        assert p.shift().embed(3) == p.embed(2).shift()


def test_convolve_identity_neutral():
    rng = np.random.default_rng(4)
    q = random_perm(rng, 2, 2)
    e = Perm.identity(2, 1)
    assert convolve(e, q) == q
    assert convolve(q, e) == q


def test_convolve_flip_involution(flip_flop):
    assert convolve(flip_flop, flip_flop) == Perm.identity(2, 1)


def test_convolve_shift_squares_to_double_shift(shift_unitary):
    c = convolve(shift_unitary, shift_unitary)
    s1 = WordSum.generator(2, 1)
    got = apply_endo(c, s1)
    want = apply_endo(shift_unitary, apply_endo(shift_unitary, s1))
    assert alg_equal(got, want)
    # and the double shift is sum_{i,j} S_i S_j S_1 S_j^* S_i^*
    direct = WordSum(2)
    for i in (1, 2):
        for j in (1, 2):
            direct = direct + WordSum.word(2, (i, j, 1), (i, j))
    assert alg_equal(got, direct)


def test_convolve_associative_sampled():
    rng = np.random.default_rng(5)
    for n, levels in ((2, (2, 2, 2)), (3, (2, 2, 1)), (2, (1, 2, 2))):
        for _ in range(10):
            p = random_perm(rng, n, levels[0])
            q = random_perm(rng, n, levels[1])
            r = random_perm(rng, n, levels[2])
            left = convolve(convolve(p, q), r)
            right = convolve(p, convolve(q, r))
            m = max(left.k, right.k)
            assert left.embed(m) == right.embed(m)


def test_convolve_matches_matrix_product():
    rng = np.random.default_rng(6)
    combos = [(2, 2, 2), (2, 2, 3), (2, 3, 2), (2, 1, 3), (3, 2, 2), (3, 1, 2)]
    for n, k, h in combos:
        for _ in range(8):
            p = random_perm(rng, n, k)
            q = random_perm(rng, n, h)
            c = convolve(p, q)
            L = c.k
            uh = perm_to_matrix(chain_product(p, q.k)).data
            lam_q = uh @ perm_to_matrix(q.embed(L)).data @ uh.T
            want = lam_q @ perm_to_matrix(p.embed(L)).data
            assert (perm_to_matrix(c).data == want).all()


def test_endo_handle_cache():
    p = shift_unitary_perm(2)
    h = EndoHandle(p)
    assert h.chain(1) is p
    assert h.chain(3) is h.chain(3)
    assert h.chain(3) == chain_product(p, 3)


def test_apply_word(flip_flop):
    assert flip_flop.apply_word((1,)) == (2,)
    assert flip_flop.embed(3).apply_word((1, 2, 1)) == (2, 2, 1)
