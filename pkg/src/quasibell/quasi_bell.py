"""Order-N quasi-Bell inequality.

The classical quantity is ``K_N = A_N^T M_N B_N`` where ``M_N`` is the N-th
tensor power of ``M = [[1, 1], [1, -1]] / 2`` and ``A_N`` lists the products
of Alice's outcomes built by the recursion ``A_n = [1, a_0 a_n] (x) A_{n-1}``.
Entry ``i`` of ``A_N`` is the product over :func:`factor_set` ``(N, i)``.

Every deterministic assignment gives ``K_N = +-1``; :func:`classical_bound_verify`
certifies this exhaustively in integer arithmetic.  The quantum value replaces
each product by its symmetrized Pauli vector and uses the singlet correlator
``<(x.sigma)(y.sigma)> = -x.y``.
"""
import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import kernel
from .errors import EnumerationTooLarge, IndexOutOfRange, OutOfRange
from .pauli import as_direction, singlet_pair_expectation
from .symmetrize import subset_product

DEFAULT_ENUMERATION_CAP = 2**26


def factor_set(N, i):
    """Indices whose outcome product forms entry ``i`` of ``A_N`` (always odd size)."""
    if not 0 <= i < 2**N:
        raise IndexOutOfRange(f"index {i} outside [0, {2**N})")
    bits = [k + 1 for k in range(N) if (i >> k) & 1]
    if len(bits) % 2 == 0:
        return (0, *bits)
    return tuple(bits)


def factor_sets(N):
    return [factor_set(N, i) for i in range(2**N)]


def hadamard_sign(i, j):
    return -1 if bin(i & j).count("1") % 2 else 1


def sign_matrix(N):
    """Unscaled ``+-1`` Hadamard matrix ``2**N M_N`` from the popcount rule."""
    idx = np.arange(2**N)
    bits = np.bitwise_and.outer(idx, idx)
    par = np.zeros_like(bits)
    while bits.any():
        par ^= bits & 1
        bits >>= 1
    return (1 - 2 * par).astype(np.int64)


def scaled_hadamard(N):
    return sign_matrix(N) / 2.0**N


def scaled_hadamard_tensor_power(N):
    """``M_N`` built literally as a Kronecker power, for cross-checking."""
    M = np.array([[1.0, 1.0], [1.0, -1.0]]) / 2
    out = np.ones((1, 1))
    for _ in range(N):
        out = np.kron(M, out)
    return out


def product_vector(vals, N):
    """``A_N`` for a +-1 assignment, as integers."""
    vals = np.asarray(vals, dtype=np.int64)
    if vals.shape != (N + 1,):
        raise ValueError(f"need {N + 1} outcomes, got {vals.shape}")
    if not np.all(np.abs(vals) == 1):
        raise ValueError("outcomes must be +1 or -1")
    return np.array([np.prod(vals[list(s)]) for s in factor_sets(N)], dtype=np.int64)


def product_vector_recursive(vals):
    """``A_N`` via the literal tensor recursion (independent of :func:`factor_set`)."""
    vals = [int(v) for v in vals]
    vec = np.array([vals[0]], dtype=np.int64)
    for n in range(1, len(vals)):
        vec = np.kron(np.array([1, vals[0] * vals[n]], dtype=np.int64), vec)
    return vec


def classical_value(N, a_vals, b_vals):
    """``K_N`` for one deterministic assignment; exact, always +-1."""
    A = product_vector(a_vals, N)
    B = product_vector(b_vals, N)
    raw = int(A @ sign_matrix(N) @ B)
    assert abs(raw) == 2**N, f"K_N * 2**N = {raw}"
    return raw // 2**N


def all_assignments(n):
    """All ``2**n`` vectors in ``{+1,-1}**n``, first coordinate slowest."""
    return np.array(list(itertools.product((1, -1), repeat=n)), dtype=np.int64)


def _product_matrix(N, vals):
    """Rows ``A_N`` for each row of ``vals`` (shape ``(S, N+1)``), built by the tensor recursion."""
    vals = np.asarray(vals, dtype=np.int64)
    out = vals[:, :1].copy()
    for n in range(1, N + 1):
        out = np.concatenate([out, out * (vals[:, 0] * vals[:, n])[:, None]], axis=1)
    return out


@dataclass
class ClassicalReport:
    N: int
    assignments: int
    min_value: int
    max_value: int
    all_unit: bool
    exhaustive: bool
    seed: int = None

    def to_dict(self):
        return dict(self.__dict__)


def classical_bound_verify(N, cap=DEFAULT_ENUMERATION_CAP, chunk=4096):
    """Enumerate every assignment and report the range of ``K_N`` (integer arithmetic)."""
    total = 2 ** (2 * (N + 1))
    if total > cap:
        raise EnumerationTooLarge(f"2**{2 * (N + 1)} assignments exceed cap {cap}")
    vals = all_assignments(N + 1)
    A = _product_matrix(N, vals)
    HB = (sign_matrix(N) @ A.T)  # same assignment set serves Bob
    lo, hi, unit = None, None, True
    scale = 2**N
    for start in range(0, A.shape[0], chunk):
        K = A[start:start + chunk] @ HB
        unit &= bool(np.all(np.abs(K) == scale))
        cmin, cmax = int(K.min()) // scale, int(K.max()) // scale
        lo = cmin if lo is None else min(lo, cmin)
        hi = cmax if hi is None else max(hi, cmax)
    return ClassicalReport(N, total, lo, hi, unit, True)


def classical_bound_sample(N, samples=10**6, seed=0, chunk=65536):
    """Random assignments for orders too large to enumerate (probabilistic certificate)."""
    rng = np.random.default_rng(seed)
    lo, hi, unit = None, None, True
    scale = 2**N
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        a = rng.choice(np.array([1, -1]), size=(m, N + 1))
        b = rng.choice(np.array([1, -1]), size=(m, N + 1))
        K = kernel.classical_values(N, a, b)
        unit &= bool(np.all(np.abs(K) == scale))
        lo = int(K.min()) // scale if lo is None else min(lo, int(K.min()) // scale)
        hi = int(K.max()) // scale if hi is None else max(hi, int(K.max()) // scale)
        done += m
    return ClassicalReport(N, samples, lo, hi, unit, False, seed)


def test_expressions(N=2):
    """Rows of ``2**N M_N B_N`` for every Bob assignment; shape ``(2**N, 2**(N+1))``.

    At ``N=2`` this is the 4 x 8 grid of test expressions
    ``b0+b1+b2+b0b1b2`` etc., columns ordered with ``b0`` slowest and ``+1`` first.
    """
    vals = all_assignments(N + 1)
    B = _product_matrix(N, vals)
    return sign_matrix(N) @ B.T


test_expressions.__test__ = False  # not a pytest test


def chsh_sum(a, b):
    """``a0 b0 + a0 b1 + a1 b0 - a1 b1``."""
    return a[0] * b[0] + a[0] * b[1] + a[1] * b[0] - a[1] * b[1]


def chsh_factored(a, b):
    return a[0] * (b[0] + b[1]) + a[1] * (b[0] - b[1])


@dataclass(frozen=True)
class QuasiBellInstance:
    """Order ``N`` with ``N+1`` unit measurement directions per party."""

    N: int
    a_dirs: np.ndarray
    b_dirs: np.ndarray

    def __post_init__(self):
        a = np.array([as_direction(d, unit=True, name=f"a{i}") for i, d in enumerate(self.a_dirs)])
        b = np.array([as_direction(d, unit=True, name=f"b{i}") for i, d in enumerate(self.b_dirs)])
        if a.shape != (self.N + 1, 3) or b.shape != (self.N + 1, 3):
            raise ValueError(f"order {self.N} needs {self.N + 1} directions per party")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a_dirs", a)
        object.__setattr__(self, "b_dirs", b)

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["N"]), d["a_dirs"], d["b_dirs"])

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {"N": self.N, "a_dirs": self.a_dirs.tolist(), "b_dirs": self.b_dirs.tolist()}

    def flipped_b(self):
        return QuasiBellInstance(self.N, self.a_dirs, -self.b_dirs)


def chsh_settings():
    r = 1 / np.sqrt(2)
    return QuasiBellInstance(1, [[1, 0, 0], [0, 1, 0]], [[r, r, 0], [r, -r, 0]])


def hexagonal_settings():
    """Six coplanar directions 60 degrees apart, optimal at order 2."""
    h = np.sqrt(3) / 2
    a = [[1, 0, 0], [0.5, h, 0], [0.5, -h, 0]]
    b = [[-1, 0, 0], [-0.5, h, 0], [-0.5, -h, 0]]
    return QuasiBellInstance(2, a, b)


def quantum_value(inst: QuasiBellInstance):
    """Signed singlet expectation ``<K_N>``; the violation is its absolute value."""
    return float(kernel.signed_value(inst.a_dirs, inst.b_dirs))


def per_index_vectors(dirs, N):
    """Symmetrized product vector for each factor set, via the hafnian recursion."""
    dirs = np.asarray(dirs, dtype=float)
    gram = dirs @ dirs.T
    memo = {}
    return np.array([subset_product(dirs, s, gram, memo).vector for s in factor_sets(N)])


def quantum_value_reference(inst: QuasiBellInstance):
    """Slow route: explicit ``M_N`` and per-pair singlet correlators."""
    N = inst.N
    alpha = per_index_vectors(inst.a_dirs, N)
    beta = per_index_vectors(inst.b_dirs, N)
    M = scaled_hadamard(N)
    total = 0.0
    for i in range(2**N):
        for j in range(2**N):
            total += M[i, j] * singlet_pair_expectation(alpha[i], beta[j])
    return total


def werner_value(inst: QuasiBellInstance, z):
    """Expectation in the Werner state: singlet correlators scale by ``z``."""
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"z={z} outside [0, 1]")
    return z * quantum_value(inst)


def inner_product_matrix(inst: QuasiBellInstance):
    return inst.a_dirs @ inst.b_dirs.T
