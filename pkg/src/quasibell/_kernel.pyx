# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled quasi-Bell objective kernel; same API as ``_kernel_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline int _popcount(unsigned int x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline int _ctz(unsigned int x) nogil:
    cdef int c = 0
    while not (x & 1):
        x >>= 1
        c += 1
    return c


cdef double _dfact(int k) nogil:
    cdef double r = 1.0
    while k > 1:
        r *= k
        k -= 2
    return r


cdef void _product_vectors(const double[:, :] d, double[:] haf, double[:, :] out) nogil:
    cdef int n = d.shape[0]
    cdef unsigned int full = 1u << n
    cdef unsigned int mask, rest, bits, bit, fm, i
    cdef int low, j, u, c
    cdef double acc, g, w, x0, x1, x2
    cdef double gram[32][32]
    for j in range(n):
        for u in range(n):
            gram[j][u] = d[j, 0] * d[u, 0] + d[j, 1] * d[u, 1] + d[j, 2] * d[u, 2]
    haf[0] = 1.0
    for mask in range(1, full):
        if _popcount(mask) & 1:
            haf[mask] = 0.0
            continue
        low = _ctz(mask)
        rest = mask ^ (1u << low)
        bits = rest
        acc = 0.0
        while bits:
            bit = bits & (~bits + 1)
            j = _ctz(bit)
            acc += gram[low][j] * haf[rest ^ bit]
            bits ^= bit
        haf[mask] = acc
    for i in range(full >> 1):
        fm = (i << 1) | (1u if (_popcount(i) & 1) == 0 else 0u)
        x0 = 0.0
        x1 = 0.0
        x2 = 0.0
        bits = fm
        while bits:
            bit = bits & (~bits + 1)
            u = _ctz(bit)
            w = haf[fm ^ bit]
            x0 += w * d[u, 0]
            x1 += w * d[u, 1]
            x2 += w * d[u, 2]
            bits ^= bit
        g = _dfact(_popcount(fm))
        out[i, 0] = x0 / g
        out[i, 1] = x1 / g
        out[i, 2] = x2 / g


cdef double _hadamard_form(double[:, :] alpha, double[:, :] beta) nogil:
    # beta is overwritten with its Walsh-Hadamard transform
    cdef Py_ssize_t size = beta.shape[0]
    cdef Py_ssize_t h = 1, i, j, c
    cdef double x, y, total = 0.0
    while h < size:
        i = 0
        while i < size:
            for j in range(i, i + h):
                for c in range(3):
                    x = beta[j, c]
                    y = beta[j + h, c]
                    beta[j, c] = x + y
                    beta[j + h, c] = x - y
            i += 2 * h
        h *= 2
    for i in range(size):
        for c in range(3):
            total += alpha[i, c] * beta[i, c]
    return total / size


def product_vectors(dirs):
    d = np.ascontiguousarray(dirs, dtype=np.float64)
    if d.ndim == 3:
        return np.stack([product_vectors(x) for x in d])
    cdef int n = d.shape[0]
    if n < 1 or n > 24:
        raise ValueError("need between 1 and 24 directions")
    out = np.empty((1 << (n - 1), 3))
    haf = np.empty(1 << n)
    _product_vectors(d, haf, out)
    return out


def hadamard_form(alpha, beta):
    a = np.ascontiguousarray(alpha, dtype=np.float64)
    b = np.array(beta, dtype=np.float64, order="C")
    if a.ndim == 3:
        return np.array([_hadamard_form(a[s], b[s]) for s in range(a.shape[0])])
    return _hadamard_form(a, b)


cdef double _signed_value(const double[:, :] a, const double[:, :] b,
                          double[:] haf, double[:, :] alpha, double[:, :] beta) nogil:
    _product_vectors(a, haf, alpha)
    _product_vectors(b, haf, beta)
    return -_hadamard_form(alpha, beta)


def signed_value(a_dirs, b_dirs):
    a = np.ascontiguousarray(a_dirs, dtype=np.float64)
    b = np.ascontiguousarray(b_dirs, dtype=np.float64)
    if a.ndim == 3:
        return signed_value_batch(a, b)
    cdef int n = a.shape[0]
    if b.shape[0] != n or n < 1 or n > 24:
        raise ValueError("a and b need the same number (1..24) of directions")
    haf = np.empty(1 << n)
    alpha = np.empty((1 << (n - 1), 3))
    beta = np.empty((1 << (n - 1), 3))
    return _signed_value(a, b, haf, alpha, beta)


def signed_value_batch(a_dirs, b_dirs):
    cdef const double[:, :, :] a = np.ascontiguousarray(a_dirs, dtype=np.float64)
    cdef const double[:, :, :] b = np.ascontiguousarray(b_dirs, dtype=np.float64)
    cdef Py_ssize_t S = a.shape[0], s
    cdef int n = a.shape[1]
    if b.shape[0] != S or b.shape[1] != n or n < 1 or n > 24:
        raise ValueError("shape mismatch between a and b batches")
    haf_arr = np.empty(1 << n)
    alpha_arr = np.empty((1 << (n - 1), 3))
    beta_arr = np.empty((1 << (n - 1), 3))
    out_arr = np.empty(S)
    cdef double[:] haf = haf_arr
    cdef double[:, :] alpha = alpha_arr
    cdef double[:, :] beta = beta_arr
    cdef double[:] out = out_arr
    with nogil:
        for s in range(S):
            out[s] = _signed_value(a[s], b[s], haf, alpha, beta)
    return out_arr


def classical_values(int N, a_vals, b_vals):
    """``2**N K_N`` for each row pair of +-1 assignments (exact integers)."""
    cdef const long long[:, :] a = np.ascontiguousarray(a_vals, dtype=np.int64)
    cdef const long long[:, :] b = np.ascontiguousarray(b_vals, dtype=np.int64)
    cdef Py_ssize_t S = a.shape[0], s, i, j, h
    cdef Py_ssize_t size = 1 << N
    if a.shape[1] != N + 1 or b.shape[1] != N + 1 or b.shape[0] != S:
        raise ValueError("assignment arrays must have shape (S, N+1)")
    out_arr = np.empty(S, dtype=np.int64)
    A_arr = np.empty(size, dtype=np.int64)
    B_arr = np.empty(size, dtype=np.int64)
    cdef long long[:] out = out_arr
    cdef long long[:] A = A_arr
    cdef long long[:] B = B_arr
    cdef long long x, y, fa, fb, total
    cdef Py_ssize_t n, width
    with nogil:
        for s in range(S):
            A[0] = a[s, 0]
            B[0] = b[s, 0]
            width = 1
            for n in range(1, N + 1):
                fa = a[s, 0] * a[s, n]
                fb = b[s, 0] * b[s, n]
                for i in range(width):
                    A[width + i] = A[i] * fa
                    B[width + i] = B[i] * fb
                width *= 2
            h = 1
            while h < size:
                i = 0
                while i < size:
                    for j in range(i, i + h):
                        x = B[j]
                        y = B[j + h]
                        B[j] = x + y
                        B[j + h] = x - y
                    i += 2 * h
                h *= 2
            total = 0
            for i in range(size):
                total += A[i] * B[i]
            out[s] = total
    return out_arr
