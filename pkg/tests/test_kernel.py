import os
import subprocess
import sys

import numpy as np
import pytest

from quasibell import _kernel_py, kernel
from quasibell.quasi_bell import QuasiBellInstance, quantum_value_reference

from conftest import rand_units

try:
    from quasibell import _kernel as cy
except ImportError:
    cy = None

needs_cython = pytest.mark.skipif(cy is None, reason="compiled kernel not built")


def test_backend_name():
    assert kernel.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, QUASIBELL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import quasibell; print(quasibell.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fallback_matches_reference(rng):
    for N in range(0, 9):
        a, b = rand_units(rng, N + 1), rand_units(rng, N + 1)
        ref = quantum_value_reference(QuasiBellInstance(N, a, b))
        assert abs(_kernel_py.signed_value(a, b) - ref) < 1e-12


@needs_cython
def test_backends_agree_on_values(rng):
    for N in range(0, 11):
        a, b = rand_units(rng, N + 1), rand_units(rng, N + 1)
        assert abs(cy.signed_value(a, b) - _kernel_py.signed_value(a, b)) < 1e-12


@needs_cython
def test_backends_agree_on_product_vectors(rng):
    for n in range(1, 10):
        d = rand_units(rng, n)
        np.testing.assert_allclose(cy.product_vectors(d), _kernel_py.product_vectors(d), atol=1e-13)


@needs_cython
def test_backends_agree_on_batches(rng):
    a = rng.normal(size=(50, 5, 3))
    b = rng.normal(size=(50, 5, 3))
    a /= np.linalg.norm(a, axis=2, keepdims=True)
    b /= np.linalg.norm(b, axis=2, keepdims=True)
    np.testing.assert_allclose(cy.signed_value_batch(a, b), _kernel_py.signed_value_batch(a, b), atol=1e-12)


@needs_cython
def test_backends_agree_on_classical(rng):
    for N in (1, 4, 9):
        a = rng.choice([-1, 1], size=(200, N + 1))
        b = rng.choice([-1, 1], size=(200, N + 1))
        assert np.array_equal(cy.classical_values(N, a, b), _kernel_py.classical_values(N, a, b))


def test_fwht_is_hadamard_product(rng):
    from quasibell.quasi_bell import sign_matrix
    for N in range(0, 7):
        x = rng.integers(-5, 5, size=(2**N, 3))
        assert np.array_equal(_kernel_py.fwht(x.copy()), sign_matrix(N) @ x)


def test_factor_mask():
    assert [_kernel_py.factor_mask(i) for i in range(4)] == [1, 2, 4, 7]
