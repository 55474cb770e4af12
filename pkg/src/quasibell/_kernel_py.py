"""Pure-numpy implementation of the quasi-Bell objective kernel.

Mirrors ``_kernel.pyx`` function for function.  Everything is batched over a
leading sample axis so that one call can score many direction sets.
"""
from functools import lru_cache

import numpy as np


def factor_mask(i):
    """Bitmask over direction indices ``0..N`` for product index ``i``."""
    even = bin(i).count("1") % 2 == 0
    return (i << 1) | int(even)


@lru_cache(maxsize=None)
def _plan(n):
    """Index plan for hafnians over all subsets of ``n`` directions."""
    masks = np.arange(1 << n)
    pop = np.array([bin(m).count("1") for m in masks])
    low = np.array([(m & -m).bit_length() - 1 for m in range(1 << n)])
    layers = []
    for m in range(1, n // 2 + 1):
        layer = masks[pop == 2 * m]
        lo = low[layer]
        steps = []
        for j in range(n):
            sel = ((layer >> j) & 1).astype(bool) & (j > lo)
            if sel.any():
                tgt = layer[sel]
                src = tgt ^ (1 << lo[sel]) ^ (1 << j)
                steps.append((j, tgt, lo[sel], src))
        layers.append(steps)
    nfac = 1 << (n - 1)
    fmask = np.array([factor_mask(i) for i in range(nfac)])
    fpop = pop[fmask]
    dfact = np.array([float(np.prod(np.arange(k, 0, -2))) for k in fpop])
    odd_steps = []
    for u in range(n):
        sel = np.nonzero((fmask >> u) & 1)[0]
        odd_steps.append((u, sel, fmask[sel] ^ (1 << u)))
    return layers, odd_steps, dfact


def product_vectors(dirs):
    """Symmetrized product vector for every factor set; ``(S, n, 3) -> (S, 2**(n-1), 3)``."""
    dirs = np.asarray(dirs, dtype=float)
    squeeze = dirs.ndim == 2
    if squeeze:
        dirs = dirs[None]
    S, n, _ = dirs.shape
    layers, odd_steps, dfact = _plan(n)
    gram = dirs @ dirs.transpose(0, 2, 1)
    haf = np.zeros((S, 1 << n))
    haf[:, 0] = 1.0
    for steps in layers:
        for j, tgt, lo, src in steps:
            haf[:, tgt] += gram[:, lo, j] * haf[:, src]
    out = np.zeros((S, 1 << (n - 1), 3))
    for u, sel, src in odd_steps:
        out[:, sel, :] += haf[:, src, None] * dirs[:, u, None, :]
    out /= dfact[None, :, None]
    return out[0] if squeeze else out


def fwht(x, axis=-2):
    """Unnormalized Walsh-Hadamard transform along ``axis`` (natural ordering)."""
    x = np.array(x)
    if x.dtype.kind not in "if":
        x = x.astype(float)
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    h = 1
    while h < n:
        y = x.reshape(x.shape[:-1] + (n // (2 * h), 2, h))
        a, b = y[..., 0, :].copy(), y[..., 1, :].copy()
        y[..., 0, :], y[..., 1, :] = a + b, a - b
        x = y.reshape(x.shape)
        h *= 2
    return np.moveaxis(x, -1, axis)


def hadamard_form(alpha, beta):
    """``sum_ij 2**-N (-1)**popcount(i & j) alpha_i . beta_j``, batched."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    size = alpha.shape[-2]
    hb = fwht(beta, axis=-2)
    return np.einsum("...ic,...ic->...", alpha, hb) / size


def signed_value(a_dirs, b_dirs):
    """Singlet expectation of the order-N quasi-Bell operator."""
    return -hadamard_form(product_vectors(a_dirs), product_vectors(b_dirs))


def signed_value_batch(a_dirs, b_dirs):
    return np.asarray(signed_value(a_dirs, b_dirs), dtype=float).reshape(-1)


def classical_values(N, a_vals, b_vals):
    """``2**N K_N`` for each row pair of +-1 assignments (exact integers)."""
    a_vals = np.asarray(a_vals, dtype=np.int64)
    b_vals = np.asarray(b_vals, dtype=np.int64)

    def expand(vals):
        out = vals[:, :1].copy()
        for n in range(1, N + 1):
            out = np.concatenate([out, out * (vals[:, 0] * vals[:, n])[:, None]], axis=1)
        return out

    return np.einsum("si,si->s", expand(a_vals), fwht(expand(b_vals), axis=-1))
