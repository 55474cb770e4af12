import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasibell import symmetrize as sym
from quasibell.errors import BlochOutOfBall, NonUnitDirection, StepOutOfRange, TooManyFactors

from conftest import rand_units, unit_vectors

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
X, Y, Z = np.eye(3)
H = np.sqrt(3) / 2
HEX_A = np.array([[1, 0, 0], [0.5, H, 0], [0.5, -H, 0]])


def perm_average(dirs):
    mats = [np.tensordot(d, PAULI, axes=1) for d in dirs]
    total = np.zeros((2, 2), dtype=complex)
    for perm in itertools.permutations(range(len(mats))):
        m = np.eye(2, dtype=complex)
        for i in perm:
            m = m @ mats[i]
        total += m
    total /= math.factorial(len(mats))
    return np.real(np.trace(total)) / 2, np.real([np.trace(total @ s) / 2 for s in PAULI])


def matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for m in matchings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + m


def pairing_oracle(dirs):
    k = len(dirs)
    g = dirs @ dirs.T
    if k % 2 == 0:
        s = sum(np.prod([g[i, j] for i, j in m]) for m in matchings(list(range(k))))
        return s / sym.double_factorial(k - 1), np.zeros(3)
    v = np.zeros(3)
    for u in range(k):
        rest = [i for i in range(k) if i != u]
        v += sum(np.prod([g[i, j] for i, j in m]) for m in matchings(rest)) * dirs[u]
    return 0.0, v / sym.double_factorial(k)


def test_double_factorial():
    assert [sym.double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]


def test_matching_count_is_double_factorial():
    for k in (2, 4, 6, 8):
        assert sum(1 for _ in matchings(list(range(k)))) == sym.double_factorial(k - 1)


# -- brute force --------------------------------------------------------------

def test_bruteforce_examples():
    r = sym.symmetrize_bruteforce([X, Y])
    assert abs(r.scalar) < 1e-15 and np.max(np.abs(r.vector)) < 1e-15
    assert abs(sym.symmetrize_bruteforce([Z, Z]).scalar - 1) < 1e-15
    assert np.max(np.abs(sym.symmetrize_bruteforce(HEX_A).vector)) < 1e-15


def test_bruteforce_matches_literal_permutation_average(rng):
    for k in range(1, 7):
        d = rand_units(rng, k)
        s, v = perm_average(d)
        r = sym.symmetrize_bruteforce(d)
        assert abs(r.scalar - s) < 1e-12
        assert np.max(np.abs(r.vector - v)) < 1e-12


def test_bruteforce_parallel_directions_is_plain_product():
    for k in range(1, 8):
        r = sym.symmetrize_bruteforce([Z] * k)
        expected = (1.0, np.zeros(3)) if k % 2 == 0 else (0.0, Z)
        assert abs(r.scalar - expected[0]) < 1e-12
        assert np.max(np.abs(r.vector - expected[1])) < 1e-12


def test_bruteforce_hermitian(rng):
    r = sym.symmetrize_bruteforce(rand_units(rng, 5))
    m = r.matrix()
    assert np.max(np.abs(m - m.conj().T)) < 1e-12


def test_bruteforce_guard(rng):
    with pytest.raises(TooManyFactors):
        sym.symmetrize_bruteforce(rand_units(rng, 10))


def test_unit_directions_required():
    with pytest.raises(NonUnitDirection):
        sym.symmetrize_pairing([[1, 1, 0], X])


# -- closed forms -------------------------------------------------------------

def test_pair_examples():
    assert sym.symmetrize_pair(X, Y).scalar == 0
    assert sym.symmetrize_pair(Z, Z).scalar == 1
    assert abs(sym.symmetrize_pair(X, [0.5, H, 0]).scalar - 0.5) < 1e-15


def test_triple_examples():
    np.testing.assert_allclose(sym.symmetrize_triple(Z, Z, Z).vector, Z, atol=1e-15)
    assert np.max(np.abs(sym.symmetrize_triple(*HEX_A).vector)) < 1e-15
    assert np.max(np.abs(sym.symmetrize_triple(X, Y, Z).vector)) < 1e-15


def test_order2_triple_reduces_to_signed_sum():
    # pairwise products -1/2 and +1/2 make the triple vector (-a0 + a1 + a2)/6
    a = HEX_A
    expected = (-a[0] + a[1] + a[2]) / 6
    np.testing.assert_allclose(sym.symmetrize_triple(*a).vector, expected, atol=1e-15)


@given(unit_vectors, unit_vectors, unit_vectors)
def test_triple_formula(a0, a1, a2):
    v = ((a1 @ a2) * a0 + (a2 @ a0) * a1 + (a0 @ a1) * a2) / 3
    r = sym.symmetrize_triple(a0, a1, a2)
    assert np.max(np.abs(r.vector - v)) < 1e-12 and r.scalar == 0
    assert np.linalg.norm(r.vector) <= 1 + 1e-12


# -- pairing route ------------------------------------------------------------

def test_pairing_matches_explicit_matchings(rng):
    for k in range(1, 10):
        d = rand_units(rng, k)
        s, v = pairing_oracle(d)
        r = sym.symmetrize_pairing(d)
        assert abs(r.scalar - s) < 1e-12
        assert np.max(np.abs(r.vector - v)) < 1e-12


def test_pairing_matches_bruteforce(rng):
    for k in range(1, 8):
        for _ in range(100):
            d = rand_units(rng, k)
            a, b = sym.symmetrize_pairing(d), sym.symmetrize_bruteforce(d)
            assert abs(a.scalar - b.scalar) < 1e-10
            assert np.max(np.abs(a.vector - b.vector)) < 1e-10


def test_pairing_k9_against_bruteforce(rng):
    d = rand_units(rng, 9)
    a, b = sym.symmetrize_pairing(d), sym.symmetrize_bruteforce(d)
    assert np.max(np.abs(a.vector - b.vector)) < 1e-10


def test_parity_law(rng):
    for k in range(2, 8):
        for _ in range(100):
            r = sym.symmetrize_pairing(rand_units(rng, k))
            if k % 2:
                assert abs(r.scalar) < 1e-10
            else:
                assert np.max(np.abs(r.vector)) < 1e-10


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_permutation_invariance(k, seed):
    rng = np.random.default_rng(seed)
    d = rand_units(rng, k)
    p = rng.permutation(k)
    a, b = sym.symmetrize_pairing(d), sym.symmetrize_pairing(d[p])
    assert abs(a.scalar - b.scalar) < 1e-12
    assert np.max(np.abs(a.vector - b.vector)) < 1e-12


def test_vector_norm_at_most_one_for_odd_k(rng):
    worst = 0.0
    for k in (1, 3, 5, 7):
        for _ in range(300):
            worst = max(worst, np.linalg.norm(sym.symmetrize_pairing(rand_units(rng, k)).vector))
    assert worst <= 1 + 1e-12


def test_subset_product_uses_chosen_indices(rng):
    d = rand_units(rng, 5)
    r = sym.subset_product(d, (0, 2, 4))
    np.testing.assert_allclose(r.vector, sym.symmetrize_triple(d[0], d[2], d[4]).vector, atol=1e-14)


# -- Moyal route --------------------------------------------------------------

def test_moyal_triples_match_closed_form(rng):
    for _ in range(20):
        d = rand_units(rng, 3)
        m = sym.moyal_product_matrix(d, step=1e-2)
        ref = np.tensordot(sym.symmetrize_triple(*d).vector, PAULI, axes=1)
        assert np.max(np.abs(m - ref)) < 1e-5


def test_moyal_order2_optimum_is_zero():
    assert np.max(np.abs(sym.moyal_product_matrix(HEX_A))) < 1e-6


def test_moyal_orthogonal_pair():
    r = sym.moyal_product_operator([X, Y])
    assert abs(r.scalar) < 1e-6 and np.max(np.abs(r.vector)) < 1e-6


def test_moyal_chain_up_to_six(rng):
    for k in range(1, 7):
        for _ in range(5):
            d = rand_units(rng, k)
            a, b = sym.moyal_product_operator(d), sym.symmetrize_pairing(d)
            assert abs(a.scalar - b.scalar) < 1e-5
            assert np.max(np.abs(a.vector - b.vector)) < 1e-5


def test_moyal_step_range():
    with pytest.raises(StepOutOfRange):
        sym.moyal_product_matrix([X, Y], step=0.2)
    with pytest.raises(StepOutOfRange):
        sym.moyal_product_matrix([X, Y], step=0)


def test_moyal_error_shrinks_with_step(rng):
    d = rand_units(rng, 3)
    ref = np.tensordot(sym.symmetrize_triple(*d).vector, PAULI, axes=1)
    coarse = np.max(np.abs(sym.moyal_product_matrix(d, step=0.08, richardson=False) - ref))
    fine = np.max(np.abs(sym.moyal_product_matrix(d, step=0.02, richardson=False) - ref))
    assert fine < coarse / 8


# -- expectations and tables --------------------------------------------------

def test_expectation_examples(rng):
    a0, a1 = rand_units(rng, 2)
    for u in ([0, 0, 0], [0, 0.3, 0.4], Z):
        assert abs(sym.product_expectation([a0, a1], u) - a0 @ a1) < 1e-15
    assert abs(sym.product_expectation(rand_units(rng, 3), [0, 0, 0])) < 1e-15
    assert abs(sym.product_expectation([Z, Z, Z], Z) - 1) < 1e-15


def test_expectation_rejects_out_of_ball():
    with pytest.raises(BlochOutOfBall):
        sym.product_expectation([X, Y, Z], [1, 1, 1])


def test_symmetrized_table_negative_entry():
    t = sym.symmetrized_pair_joint_table(np.array([1, 1, 0]) / np.sqrt(2), X, Y)
    assert abs(t[(-1, -1)] - (1 - np.sqrt(2)) / 4) < 1e-12


def test_symmetrized_table_uniform_and_repeated():
    assert all(abs(v - 0.25) < 1e-15 for v in sym.symmetrized_pair_joint_table([0, 0, 0], X, Y).entries.values())
    t = sym.symmetrized_pair_joint_table([0.1, 0.2, 0.3], Y, Y)
    assert abs(t[(1, -1)]) < 1e-15 and abs(t[(-1, 1)]) < 1e-15


def test_symmetrized_table_as_anticommutator_trace(rng):
    for _ in range(50):
        u = rand_units(rng, 1)[0] * rng.uniform()
        a0, a1 = rand_units(rng, 2)
        rho = 0.5 * (np.eye(2) + np.tensordot(u, PAULI, axes=1))
        t = sym.symmetrized_pair_joint_table(u, a0, a1)
        for s0, s1 in t.entries:
            p0 = 0.5 * (np.eye(2) + s0 * np.tensordot(a0, PAULI, axes=1))
            p1 = 0.5 * (np.eye(2) + s1 * np.tensordot(a1, PAULI, axes=1))
            direct = np.real(np.trace(rho @ (p0 @ p1 + p1 @ p0))) / 2
            assert abs(t[(s0, s1)] - direct) < 1e-12


def test_symmetrized_triple_table_at_order2_optimum():
    from quasibell.joint import noncommuting_triple_table
    u = np.array([0, 0.6, 0.8])
    c = sym.symmetrized_correlators(HEX_A)(u)
    assert abs(c.triple) < 1e-15
    t = noncommuting_triple_table(u, HEX_A, c)
    brute = min((1 + sum(s[i] * HEX_A[i] @ u for i in range(3))
                 + s[0] * s[1] * (HEX_A[0] @ HEX_A[1]) + s[0] * s[2] * (HEX_A[0] @ HEX_A[2])
                 + s[1] * s[2] * (HEX_A[1] @ HEX_A[2])) / 8
                for s in itertools.product((1, -1), repeat=3))
    assert abs(t.min_entry() - brute) < 1e-15
