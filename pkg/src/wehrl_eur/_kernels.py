"""Hot numeric loops, compiled with numba when available.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics. Set ``WEHRL_EUR_DISABLE_NUMBA=1`` to force
the numpy path (useful for debugging and for the benchmark comparison).
"""

import math
import os

import numpy as np

_DISABLE = os.environ.get("WEHRL_EUR_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(f):
            return f

        return wrapper


BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference versions


def coherent_amplitudes_np(z, cutoff):
    """Fock amplitudes <n|z> for n = 0..cutoff, one row per entry of ``z``."""
    z = np.asarray(z, dtype=np.complex128).ravel()
    n = np.arange(cutoff + 1)
    out = np.empty((z.size, cutoff + 1), dtype=np.complex128)
    out[:, 0] = np.exp(-0.5 * np.abs(z) ** 2)
    for k in range(1, cutoff + 1):
        out[:, k] = out[:, k - 1] * z / math.sqrt(n[k])
    return out


def conditional_operators_np(rho4, coh, chunk=64):
    """<z|rho|z> on B for every row of ``coh``; rho4 has shape (dA, dB, dA, dB)."""
    dA, dB = rho4.shape[0], rho4.shape[1]
    n = coh.shape[0]
    flat = rho4.reshape(dA, dB * dA * dB)
    out = np.empty((n, dB, dB), dtype=np.complex128)
    for start in range(0, n, chunk):
        c = coh[start:start + chunk]
        left = (c.conj() @ flat).reshape(c.shape[0], dB, dA, dB)
        out[start:start + chunk] = np.einsum("kbjc,kj->kbc", left, c)
    return out


def neg_xlogx_sum_np(p):
    """-sum p ln p along the last axis, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    safe = np.where(p > 1e-300, p, 1.0)
    return -np.sum(np.where(p > 1e-300, p * np.log(safe), 0.0), axis=-1)


def gaussian_quadform_np(r, inv_cov):
    """exp(-r^T C r / 2) for every row of ``r``."""
    return np.exp(-0.5 * np.einsum("ki,ij,kj->k", r, inv_cov, r))


# ---------------------------------------------------------------------------
# numba versions


@njit(cache=True)
def _coherent_amplitudes_nb(z, cutoff):
    out = np.empty((z.size, cutoff + 1), dtype=np.complex128)
    for k in range(z.size):
        zk = z[k]
        a = np.exp(-0.5 * (zk.real * zk.real + zk.imag * zk.imag)) + 0j
        out[k, 0] = a
        for m in range(1, cutoff + 1):
            a = a * zk / math.sqrt(m)
            out[k, m] = a
    return out


@njit(cache=True)
def _conditional_operators_nb(rho4, coh):
    # stage 1 is GEMM-shaped and memory bound, so it goes to BLAS over
    # blocks of points (rho is streamed once per block, not once per point);
    # stage 2 contracts the remaining A index with explicit loops
    dA = rho4.shape[0]
    dB = rho4.shape[1]
    n = coh.shape[0]
    m = dB * dA * dB
    flat = np.ascontiguousarray(rho4.reshape(dA, m))
    out = np.zeros((n, dB, dB), dtype=np.complex128)
    block = 64
    for start in range(0, n, block):
        stop = min(n, start + block)
        c = np.ascontiguousarray(coh[start:stop].conj())
        left = np.dot(c, flat)
        for kk in range(stop - start):
            v3 = left[kk].reshape(dB, dA, dB)
            for b in range(dB):
                for j in range(dA):
                    cj = coh[start + kk, j]
                    for col in range(dB):
                        out[start + kk, b, col] += v3[b, j, col] * cj
    return out


@njit(cache=True)
def _neg_xlogx_sum_nb(p):
    rows = p.shape[0]
    out = np.empty(rows)
    for k in range(rows):
        acc = 0.0
        for m in range(p.shape[1]):
            x = p[k, m]
            if x > 1e-300:
                acc -= x * math.log(x)
        out[k] = acc
    return out


@njit(cache=True)
def _gaussian_quadform_nb(r, inv_cov):
    n, d = r.shape
    out = np.empty(n)
    for k in range(n):
        acc = 0.0
        for i in range(d):
            ri = r[k, i]
            for j in range(d):
                acc += ri * inv_cov[i, j] * r[k, j]
        out[k] = math.exp(-0.5 * acc)
    return out


# ---------------------------------------------------------------------------
# dispatch


def coherent_amplitudes(z, cutoff):
    if HAVE_NUMBA:
        return _coherent_amplitudes_nb(np.ascontiguousarray(np.asarray(z, dtype=np.complex128).ravel()), int(cutoff))
    return coherent_amplitudes_np(z, cutoff)


def conditional_operators(rho4, coh):
    rho4 = np.ascontiguousarray(rho4, dtype=np.complex128)
    coh = np.ascontiguousarray(coh, dtype=np.complex128)
    if HAVE_NUMBA:
        return _conditional_operators_nb(rho4, coh)
    return conditional_operators_np(rho4, coh)


def neg_xlogx_sum(p):
    p = np.asarray(p, dtype=np.float64)
    if HAVE_NUMBA:
        p2 = np.ascontiguousarray(p.reshape(-1, p.shape[-1]))
        return _neg_xlogx_sum_nb(p2).reshape(p.shape[:-1])
    return neg_xlogx_sum_np(p)


def gaussian_quadform(r, inv_cov):
    r = np.ascontiguousarray(r, dtype=np.float64)
    inv_cov = np.ascontiguousarray(inv_cov, dtype=np.float64)
    if HAVE_NUMBA:
        return _gaussian_quadform_nb(r, inv_cov)
    return gaussian_quadform_np(r, inv_cov)
