import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasibell import quasi_bell as qb
from quasibell.errors import EnumerationTooLarge, IndexOutOfRange, NonUnitDirection, OutOfRange

from conftest import rand_units

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
M1 = 0.5 * np.array([[1, 1], [1, -1]])
X, Y, Z = np.eye(3)

TEST_EXPRESSION_GRID = [
    [4, 0, 0, 0, 0, 0, 0, -4],
    [0, 0, 4, 0, 0, -4, 0, 0],
    [0, 4, 0, 0, 0, 0, -4, 0],
    [0, 0, 0, 4, -4, 0, 0, 0],
]


def symbolic_sets(N):
    """Index sets of the tensor recursion A_n = [A_{n-1}; a0 a_n A_{n-1}] with a_k^2 = 1."""
    sets = [frozenset({0})]
    for n in range(1, N + 1):
        sets = sets + [s ^ {0, n} for s in sets]
    return sets


def kron_power(N):
    out = np.ones((1, 1))
    for _ in range(N):
        out = np.kron(M1, out) if out.size > 1 else M1.copy()
    return out if N else np.ones((1, 1))


def sym_vector(dirs):
    """Symmetrized product as a Pauli vector, by literal permutation average."""
    mats = [np.tensordot(d, PAULI, axes=1) for d in dirs]
    total = np.zeros((2, 2), dtype=complex)
    perms = list(itertools.permutations(range(len(mats))))
    for p in perms:
        m = np.eye(2, dtype=complex)
        for i in p:
            m = m @ mats[i]
        total += m
    total /= len(perms)
    return np.real([np.trace(total @ s) / 2 for s in PAULI])


def quantum_oracle(a, b):
    N = len(a) - 1
    sets = symbolic_sets(N)
    alpha = [sym_vector([a[k] for k in sorted(s)]) for s in sets]
    beta = [sym_vector([b[k] for k in sorted(s)]) for s in sets]
    M = kron_power(N)
    return -sum(M[i, j] * (alpha[i] @ beta[j]) for i in range(len(sets)) for j in range(len(sets)))


def literal_classical(a, b):
    N = len(a) - 1
    sets = symbolic_sets(N)
    A = np.array([np.prod([a[k] for k in s]) for s in sets])
    B = np.array([np.prod([b[k] for k in s]) for s in sets])
    return A @ kron_power(N) @ B


# -- product index structure --------------------------------------------------

def test_factor_sets_order2_and_order3():
    assert qb.factor_sets(2) == [(0,), (1,), (2,), (0, 1, 2)]
    assert qb.factor_sets(3) == [(0,), (1,), (2,), (0, 1, 2), (3,), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    assert qb.factor_set(0, 0) == (0,)


def test_factor_sets_match_symbolic_recursion():
    for N in range(0, 9):
        assert [tuple(sorted(s)) for s in symbolic_sets(N)] == qb.factor_sets(N)
        assert all(len(s) % 2 == 1 for s in qb.factor_sets(N))
    assert qb.factor_set(4, 15) == (0, 1, 2, 3, 4)


def test_factor_set_range():
    with pytest.raises(IndexOutOfRange):
        qb.factor_set(2, 4)
    with pytest.raises(IndexOutOfRange):
        qb.factor_set(2, -1)


def test_hadamard_bit_formula_equals_tensor_power():
    for N in range(0, 7):
        assert np.array_equal(qb.scaled_hadamard(N), kron_power(N))
        assert np.array_equal(qb.scaled_hadamard_tensor_power(N), kron_power(N))


def test_order2_sign_matrix_explicit():
    expected = [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]]
    assert np.array_equal(qb.sign_matrix(2), expected)


@given(st.integers(0, 8), st.data())
def test_product_vector_routes_agree(N, data):
    vals = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=N + 1, max_size=N + 1)))
    expected = [np.prod(vals[sorted(s)]) for s in symbolic_sets(N)]
    assert list(qb.product_vector(vals, N)) == expected
    assert list(qb.product_vector_recursive(vals)) == expected


# -- classical bound ----------------------------------------------------------

def test_expression_grid():
    assert np.array_equal(qb.test_expressions(2), TEST_EXPRESSION_GRID)


def test_expression_grid_from_written_expressions():
    cols = []
    for b0, b1, b2 in itertools.product((1, -1), repeat=3):
        cols.append([b0 + b1 + b2 + b0 * b1 * b2, b0 - b1 + b2 - b0 * b1 * b2,
                     b0 + b1 - b2 - b0 * b1 * b2, b0 - b1 - b2 + b0 * b1 * b2])
    assert np.array_equal(np.array(cols).T, TEST_EXPRESSION_GRID)


def test_classical_examples():
    assert qb.classical_value(0, [1], [1]) == 1
    assert qb.classical_value(0, [1], [-1]) == -1


@pytest.mark.parametrize("N,count", [(1, 16), (2, 64), (3, 256)])
def test_classical_enumeration_small(N, count):
    rep = qb.classical_bound_verify(N)
    assert rep.assignments == count and rep.exhaustive
    assert (rep.min_value, rep.max_value) == (-1, 1) and rep.all_unit


def test_classical_enumeration_matches_literal_for_order3():
    for vals in itertools.product((1, -1), repeat=8):
        a, b = np.array(vals[:4]), np.array(vals[4:])
        assert qb.classical_value(3, a, b) == literal_classical(a, b)


def test_classical_certificate_through_order8():
    for N in range(9):
        rep = qb.classical_bound_verify(N)
        assert rep.assignments == 4 ** (N + 1)
        assert rep.all_unit and (rep.min_value, rep.max_value) == (-1, 1)


def test_enumeration_cap():
    with pytest.raises(EnumerationTooLarge):
        qb.classical_bound_verify(5, cap=2**10)


@pytest.mark.slow
@pytest.mark.parametrize("N", [9, 10])
def test_classical_sampled_high_order(N):
    rep = qb.classical_bound_sample(N, samples=10**6, seed=N)
    assert rep.assignments == 10**6 and not rep.exhaustive
    assert rep.all_unit and (rep.min_value, rep.max_value) == (-1, 1)


def test_sampling_agrees_with_literal_values():
    rng = np.random.default_rng(5)
    from quasibell import kernel
    a = rng.choice([-1, 1], size=(50, 6))
    b = rng.choice([-1, 1], size=(50, 6))
    got = kernel.classical_values(5, a, b)
    expected = [literal_classical(x, y) * 2**5 for x, y in zip(a, b)]
    assert list(got) == expected


@given(st.integers(1, 8), st.data())
def test_recursion_identity(N, data):
    a = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=N + 1, max_size=N + 1)))
    b = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=N + 1, max_size=N + 1)))
    x, y = a[0] * a[N], b[0] * b[N]
    factor = (1 + x + y - x * y) / 2
    assert factor in (1, -1)
    assert qb.classical_value(N, a, b) == factor * qb.classical_value(N - 1, a[:N], b[:N])


def test_chsh_factorization_all_assignments():
    for vals in itertools.product((1, -1), repeat=4):
        a, b = vals[:2], vals[2:]
        assert qb.chsh_sum(a, b) == qb.chsh_factored(a, b)
        assert qb.chsh_sum(a, b) == 2 * qb.classical_value(1, a, b)


# -- quantum value ------------------------------------------------------------

def test_chsh_value():
    assert abs(abs(qb.quantum_value(qb.chsh_settings())) - np.sqrt(2)) < 1e-12


def test_order2_value_and_structure():
    inst = qb.hexagonal_settings()
    assert abs(qb.quantum_value(inst) - 1.5) < 1e-12
    expected = [[-1, -0.5, -0.5], [-0.5, 0.5, -1], [-0.5, -1, 0.5]]
    assert np.max(np.abs(qb.inner_product_matrix(inst) - expected)) < 1e-12


def test_order2_six_times_four():
    # the un-normalized order-2 quantity is four times K_2
    assert abs(4 * qb.quantum_value(qb.hexagonal_settings()) - 6) < 1e-12


def test_degenerate_all_z():
    for N in range(0, 8):
        dirs = np.tile(Z, (N + 1, 1))
        assert abs(qb.quantum_value(qb.QuasiBellInstance(N, dirs, dirs)) + 1) < 1e-12


def test_order1_is_half_chsh_matrix_form(rng):
    for _ in range(20):
        a, b = rand_units(rng, 2), rand_units(rng, 2)
        chsh = a[0] @ b[0] + a[0] @ b[1] + a[1] @ b[0] - a[1] @ b[1]
        assert abs(qb.quantum_value(qb.QuasiBellInstance(1, a, b)) + chsh / 2) < 1e-12


def test_quantum_value_against_permutation_oracle(rng):
    for N in range(0, 5):
        for _ in range(3):
            a, b = rand_units(rng, N + 1), rand_units(rng, N + 1)
            assert abs(qb.quantum_value(qb.QuasiBellInstance(N, a, b)) - quantum_oracle(a, b)) < 1e-12


def test_quantum_value_against_reference_route(rng):
    for N in range(0, 9):
        a, b = rand_units(rng, N + 1), rand_units(rng, N + 1)
        inst = qb.QuasiBellInstance(N, a, b)
        assert abs(qb.quantum_value(inst) - qb.quantum_value_reference(inst)) < 1e-12


def test_flipping_b_flips_sign(rng):
    for N in range(0, 7):
        inst = qb.QuasiBellInstance(N, rand_units(rng, N + 1), rand_units(rng, N + 1))
        assert abs(qb.quantum_value(inst) + qb.quantum_value(inst.flipped_b())) < 1e-12


def test_rotation_invariance(rng):
    from scipy.spatial.transform import Rotation
    rot = Rotation.random(random_state=3).as_matrix()
    inst = qb.QuasiBellInstance(3, rand_units(rng, 4), rand_units(rng, 4))
    turned = qb.QuasiBellInstance(3, inst.a_dirs @ rot.T, inst.b_dirs @ rot.T)
    assert abs(qb.quantum_value(inst) - qb.quantum_value(turned)) < 1e-12


def test_instance_rejects_non_unit_and_wrong_count():
    with pytest.raises(NonUnitDirection):
        qb.QuasiBellInstance(1, [[1, 1, 0], Y], [X, Y])
    with pytest.raises(ValueError):
        qb.QuasiBellInstance(2, [X, Y], [X, Y])


def test_instance_json_roundtrip(tmp_path):
    inst = qb.hexagonal_settings()
    p = tmp_path / "v.json"
    p.write_text(json.dumps(inst.to_dict()))
    back = qb.QuasiBellInstance.from_json(p)
    assert np.array_equal(back.a_dirs, inst.a_dirs) and np.array_equal(back.b_dirs, inst.b_dirs)


def test_werner_value():
    inst = qb.hexagonal_settings()
    assert qb.werner_value(inst, 1) == qb.quantum_value(inst)
    assert qb.werner_value(inst, 0) == 0
    assert abs(qb.werner_value(inst, 2 / 3) - 1) < 1e-12
    with pytest.raises(OutOfRange):
        qb.werner_value(inst, 1.2)


def test_werner_value_matches_state_trace():
    # the correlator of the Werner state is z times the singlet correlator
    from quasibell.pauli import BlochState, two_qubit_expectation
    a, b = np.array([0.6, 0, 0.8]), np.array([0, 1.0, 0])
    z = 0.37
    rho = BlochState.werner(z).density_matrix()
    assert abs(two_qubit_expectation(rho, a, b) + z * (a @ b)) < 1e-12
