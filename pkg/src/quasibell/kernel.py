"""Backend selection for the objective kernel.

The compiled ``_kernel`` extension is used when importable; otherwise the
numpy implementation in ``_kernel_py``.  Set ``QUASIBELL_PURE_PYTHON=1`` to
force the fallback.
"""
import os

from . import _kernel_py

if os.environ.get("QUASIBELL_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _kernel_py

BACKEND = "cython" if _impl is not _kernel_py else "python"

product_vectors = _impl.product_vectors
hadamard_form = _impl.hadamard_form
signed_value = _impl.signed_value
signed_value_batch = _impl.signed_value_batch
classical_values = _impl.classical_values
factor_mask = _kernel_py.factor_mask
fwht = _kernel_py.fwht
