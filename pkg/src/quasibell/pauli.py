"""Pauli algebra for one and two qubits.

Directions are plain ``float64`` arrays of shape ``(3,)``; operators are
complex ``(2, 2)`` or ``(4, 4)`` arrays.  For two-qubit operators Alice's
qubit is the left (slow) tensor factor, so ``sigma_i (x) I`` acts on Alice.
"""
from dataclasses import dataclass, field

import numpy as np

from .config import get_tolerances
from .errors import BlochOutOfBall, NonUnitDirection

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

for _m in (I2, I4, SIGMA):
    _m.flags.writeable = False


def as_direction(d, unit=False, name="direction"):
    """Coerce ``d`` to a read-only float 3-vector, optionally checking |d| = 1."""
    arr = np.array(d, dtype=float).reshape(3)
    if unit:
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > get_tolerances().unit_norm:
            raise NonUnitDirection(f"{name} has norm {norm:.12g}, expected 1")
    arr.flags.writeable = False
    return arr


def as_bloch(u, name="u"):
    """Coerce a Bloch vector and require |u| <= 1."""
    arr = as_direction(u, name=name)
    if np.linalg.norm(arr) > 1.0 + get_tolerances().unit_norm:
        raise BlochOutOfBall(f"{name} has norm {np.linalg.norm(arr):.12g} > 1")
    return arr


def unit(v):
    v = np.asarray(v, dtype=float)
    return as_direction(v / np.linalg.norm(v))


def pauli_dot(d):
    """Return ``d . sigma``."""
    d = as_direction(d)
    return np.tensordot(d, SIGMA, axes=1)


def projector(d, outcome):
    """Spectral projector ``(I + outcome * d.sigma) / 2`` onto outcome +-1 along ``d``."""
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    d = as_direction(d, unit=True)
    return 0.5 * (I2 + outcome * pauli_dot(d))


def kron(a, b):
    return np.kron(a, b)


def pauli_decompose(op):
    """Return ``(c0, c)`` with ``op = c0 I + c . sigma`` (complex coefficients)."""
    op = np.asarray(op, dtype=complex)
    c0 = 0.5 * np.trace(op)
    c = 0.5 * np.einsum("kij,ji->k", SIGMA, op)
    return c0, c


def is_hermitian(op, tol=None):
    tol = get_tolerances().algebra if tol is None else tol
    op = np.asarray(op)
    return bool(np.max(np.abs(op - op.conj().T)) <= tol)


def matrix_exp_i(h):
    """``exp(i h)`` for a Hermitian 2x2 ``h`` via the Pauli-vector identity.

    Writing ``h = h0 I + chi . sigma`` gives
    ``exp(i h) = exp(i h0) (cos|chi| I + i sin|chi|/|chi| chi . sigma)``.
    """
    c0, c = pauli_decompose(h)
    h0 = c0.real
    chi = c.real
    norm = float(np.linalg.norm(chi))
    sinc = np.sinc(norm / np.pi)  # sin(x)/x, finite at 0
    out = np.cos(norm) * I2 + 1j * sinc * np.tensordot(chi, SIGMA, axes=1)
    return np.exp(1j * h0) * out


@dataclass(frozen=True)
class SymmetrizedOperator:
    """``scalar * I + vector . sigma``, the result of symmetrizing a spin product."""

    scalar: float
    vector: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "vector", as_direction(self.vector))

    @classmethod
    def from_matrix(cls, op, tol=1e-8):
        """Decompose a 2x2 operator; complex residue beyond ``tol`` is an error."""
        c0, c = pauli_decompose(op)
        imag = max(abs(c0.imag), float(np.max(np.abs(c.imag))))
        if imag > tol:
            raise ValueError(f"operator is not Hermitian (imaginary part {imag:.3g})")
        return cls(c0.real, c.real)

    def matrix(self):
        return self.scalar * I2 + pauli_dot(self.vector)

    def expectation(self, u):
        """``Tr[rho_A S]`` for the single-qubit state with Bloch vector ``u``."""
        return self.scalar + float(np.dot(self.vector, u))

    def to_dict(self):
        return {"scalar": self.scalar, "vector": self.vector.tolist()}


@dataclass(frozen=True)
class BlochState:
    """Two-qubit state in Bloch form: Alice's ``u``, Bob's ``v``, correlations ``R``."""

    u: np.ndarray
    v: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", as_direction(self.u, name="u"))
        object.__setattr__(self, "v", as_direction(self.v, name="v"))
        R = np.array(self.R, dtype=float).reshape(3, 3)
        R.flags.writeable = False
        object.__setattr__(self, "R", R)

    @classmethod
    def singlet(cls):
        return cls(np.zeros(3), np.zeros(3), -np.eye(3))

    @classmethod
    def maximally_mixed(cls):
        return cls(np.zeros(3), np.zeros(3), np.zeros((3, 3)))

    @classmethod
    def werner(cls, z):
        return cls(np.zeros(3), np.zeros(3), -z * np.eye(3))

    @classmethod
    def from_density_matrix(cls, rho):
        rho = np.asarray(rho, dtype=complex)
        u = [np.trace(rho @ kron(s, I2)).real for s in SIGMA]
        v = [np.trace(rho @ kron(I2, s)).real for s in SIGMA]
        R = [[np.trace(rho @ kron(si, sj)).real for sj in SIGMA] for si in SIGMA]
        return cls(u, v, R)

    def density_matrix(self):
        return density_matrix(self)

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(self.density_matrix())))

    def is_physical(self, tol=None):
        tol = get_tolerances().physical if tol is None else tol
        return self.min_eigenvalue() >= -tol


def density_matrix(s: BlochState):
    rho = I4.copy()
    for i in range(3):
        rho = rho + s.u[i] * kron(SIGMA[i], I2) + s.v[i] * kron(I2, SIGMA[i])
        for j in range(3):
            rho = rho + s.R[i, j] * kron(SIGMA[i], SIGMA[j])
    return rho / 4


_SINGLET_RHO = density_matrix(BlochState.singlet())


def singlet_pair_expectation(a, b):
    """``<(a.sigma) (x) (b.sigma)>`` in the singlet, i.e. ``-a.b`` (bilinear in a, b)."""
    return -float(np.dot(as_direction(a), as_direction(b)))


def two_qubit_expectation(rho, a, b):
    """Trace route ``Tr[(a.sigma) (x) (b.sigma) rho]``."""
    return float(np.trace(kron(pauli_dot(a), pauli_dot(b)) @ rho).real)
