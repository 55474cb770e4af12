"""Quantization of products of spin observables on one qubit.

The symmetrized operator for a classical product ``a_0 a_1 ... a_{k-1}`` is the
average over all orderings of ``(a_0.sigma)(a_1.sigma)...``.  It is a multiple
of the identity for even ``k`` and a Pauli vector for odd ``k``.

Three independent routes are provided:

* :func:`symmetrize_bruteforce` averages all ``k!`` ordered products;
* :func:`symmetrize_pairing` sums over perfect matchings of the Gram matrix
  (a hafnian), in ``O(2**k k)``;
* :func:`moyal_product_operator` differentiates ``exp(i theta.a.sigma)``
  numerically, one derivative per factor.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import StepOutOfRange, TooManyFactors
from .joint import OUTCOMES2, CorrelatorSpec, OutcomeTable
from .pauli import I2, SIGMA, SymmetrizedOperator, as_bloch, as_direction, matrix_exp_i, pauli_dot, projector

BRUTEFORCE_MAX_K = 9
MOYAL_MAX_K = 6


@dataclass(frozen=True)
class ProductSpec:
    directions: tuple

    def __post_init__(self):
        dirs = tuple(as_direction(d, unit=True, name=f"a{i}") for i, d in enumerate(self.directions))
        if not dirs:
            raise ValueError("a product needs at least one factor")
        object.__setattr__(self, "directions", dirs)

    @property
    def k(self):
        return len(self.directions)

    def array(self):
        return np.array(self.directions)


def _spec(p):
    return p if isinstance(p, ProductSpec) else ProductSpec(tuple(p))


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def symmetrize_bruteforce(p, allow_large=False):
    """Average of all ``k!`` ordered products, evaluated as batched 2x2 matmuls."""
    p = _spec(p)
    k = p.k
    if k > BRUTEFORCE_MAX_K and not allow_large:
        raise TooManyFactors(f"k={k} exceeds the k! guard ({BRUTEFORCE_MAX_K})")
    mats = np.array([pauli_dot(d) for d in p.directions])
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp)
    acc = mats[perms[:, 0]]
    for col in range(1, k):
        acc = acc @ mats[perms[:, col]]
    op = acc.mean(axis=0)
    return SymmetrizedOperator.from_matrix(op)


def symmetrize_pair(a0, a1):
    a0 = as_direction(a0, unit=True, name="a0")
    a1 = as_direction(a1, unit=True, name="a1")
    return SymmetrizedOperator(float(a0 @ a1), np.zeros(3))


def symmetrize_triple(a0, a1, a2):
    a0 = as_direction(a0, unit=True, name="a0")
    a1 = as_direction(a1, unit=True, name="a1")
    a2 = as_direction(a2, unit=True, name="a2")
    vec = ((a1 @ a2) * a0 + (a2 @ a0) * a1 + (a0 @ a1) * a2) / 3
    return SymmetrizedOperator(0.0, vec)


def hafnian(gram, mask=None, memo=None):
    """Sum over perfect matchings of the index set ``mask`` of products of ``gram`` entries."""
    n = gram.shape[0]
    if mask is None:
        mask = (1 << n) - 1
    if memo is None:
        memo = {}
    return _hafnian(gram, mask, memo)


def _hafnian(gram, mask, memo):
    if mask == 0:
        return 1.0
    if mask in memo:
        return memo[mask]
    low = (mask & -mask).bit_length() - 1
    rest = mask ^ (1 << low)
    total = 0.0
    m = rest
    while m:
        bit = m & -m
        j = bit.bit_length() - 1
        total += gram[low, j] * _hafnian(gram, rest ^ bit, memo)
        m ^= bit
    memo[mask] = total
    return total


def symmetrize_pairing(p, gram=None, memo=None):
    """Matching-sum evaluation of the symmetrized product.

    Even ``k``: scalar ``haf(G) / (k-1)!!``.  Odd ``k``: vector
    ``sum_u haf(G without u) a_u / k!!``.  ``gram``/``memo`` may be shared across
    calls on sub-products of the same direction list.
    """
    if gram is not None:
        dirs = np.asarray(p, dtype=float)
    else:
        dirs = _spec(p).array()
        gram = dirs @ dirs.T
    k = dirs.shape[0]
    memo = {} if memo is None else memo
    full = (1 << k) - 1
    if k % 2 == 0:
        return SymmetrizedOperator(_hafnian(gram, full, memo) / double_factorial(k - 1), np.zeros(3))
    vec = np.zeros(3)
    for u in range(k):
        vec += _hafnian(gram, full ^ (1 << u), memo) * dirs[u]
    return SymmetrizedOperator(0.0, vec / double_factorial(k))


def subset_product(dirs, subset, gram=None, memo=None):
    """Symmetrized product over ``dirs[i] for i in subset`` with memoized Gram entries."""
    dirs = np.asarray(dirs, dtype=float)
    gram = dirs @ dirs.T if gram is None else gram
    memo = {} if memo is None else memo
    idx = sorted(subset)
    mask = 0
    for i in idx:
        mask |= 1 << i
    k = len(idx)
    if k % 2 == 0:
        return SymmetrizedOperator(_hafnian(gram, mask, memo) / double_factorial(k - 1), np.zeros(3))
    vec = np.zeros(3)
    for u in idx:
        vec += _hafnian(gram, mask ^ (1 << u), memo) * dirs[u]
    return SymmetrizedOperator(0.0, vec / double_factorial(k))


# Step sizes that keep truncation and cancellation error near 1e-8 or below
# for the Richardson-extrapolated stencil (stencil divides by (2h)**k).
_DEFAULT_STEPS = {1: 5e-3, 2: 5e-3, 3: 5e-3, 4: 2e-2, 5: 4e-2, 6: 6e-2}


def default_moyal_step(k):
    return _DEFAULT_STEPS[k]


def _mixed_partial(mats, h):
    """Central-difference ``d^k/dtheta_0...dtheta_{k-1}`` of ``exp(i theta.a.sigma)`` at 0."""
    k = len(mats)
    acc = np.zeros((2, 2), dtype=complex)
    for signs in itertools.product((1, -1), repeat=k):
        gen = sum(s * h * m for s, m in zip(signs, mats))
        acc += math.prod(signs) * matrix_exp_i(gen)
    return acc / (2 * h) ** k


def moyal_product_operator(p, step=None, richardson=True):
    """Product operator from derivatives of the quantized characteristic function.

    Returns the decomposed operator; the raw complex matrix is available via
    :func:`moyal_product_matrix`.
    """
    return SymmetrizedOperator.from_matrix(moyal_product_matrix(p, step, richardson), tol=1e-4)


def moyal_product_matrix(p, step=None, richardson=True):
    p = _spec(p)
    k = p.k
    if k > MOYAL_MAX_K:
        raise TooManyFactors(f"k={k} exceeds the finite-difference stencil limit ({MOYAL_MAX_K})")
    h = default_moyal_step(k) if step is None else float(step)
    if not 0 < h <= 0.1:
        raise StepOutOfRange(f"step {h} outside (0, 0.1]")
    mats = [pauli_dot(d) for d in p.directions]
    d = _mixed_partial(mats, h)
    if richardson:
        d = (4 * _mixed_partial(mats, h / 2) - d) / 3
    return d / (1j ** k)


def product_expectation(p, u):
    """``Tr[rho_A S]`` for the symmetrized product ``S`` and Alice's Bloch vector ``u``."""
    u = as_bloch(u)
    return symmetrize_pairing(p).expectation(u)


def symmetrized_pair_joint_table(u, a0, a1):
    """Pair quasi-probabilities with ``<a0 a1> = a0.a1`` (closed form)."""
    u = as_bloch(u)
    a0 = as_direction(a0, unit=True, name="a0")
    a1 = as_direction(a1, unit=True, name="a1")
    x, y, c = a0 @ u, a1 @ u, a0 @ a1
    entries = {(s0, s1): 0.25 * (1 + s0 * x + s1 * y + s0 * s1 * c) for s0, s1 in OUTCOMES2}
    return OutcomeTable(2, entries, (a0, a1), u, CorrelatorSpec.for_pair(c))


def symmetrized_pair_joint_table_trace(u, a0, a1):
    """Same table as ``Tr[rho_A {P_a0, P_a1} / 2]``."""
    u = as_bloch(u)
    rho_a = 0.5 * (I2 + np.tensordot(u, SIGMA, axes=1))
    entries = {}
    for s0, s1 in OUTCOMES2:
        p0, p1 = projector(a0, s0), projector(a1, s1)
        entries[(s0, s1)] = float(np.trace(rho_a @ (p0 @ p1 + p1 @ p0)).real / 2)
    return OutcomeTable(2, entries, (as_direction(a0), as_direction(a1)), u)


def symmetrized_correlators(dirs):
    """Pair and triple correlators of symmetrization for three directions, as functions of u.

    Returns a callable ``u -> CorrelatorSpec``.
    """
    d = [as_direction(x, unit=True) for x in dirs]
    vec = symmetrize_triple(*d).vector

    def at(u):
        u = as_bloch(u)
        return CorrelatorSpec.for_triple(d[0] @ d[1], d[0] @ d[2], d[1] @ d[2], float(vec @ u))

    return at


