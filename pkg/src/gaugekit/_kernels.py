"""Hot numeric kernels.

Two interchangeable implementations live here: numba-compiled loops and a
vectorized numpy path. The active one is chosen once at import time from
the ``GAUGEKIT_BACKEND`` environment variable (``numba`` or ``numpy``);
when unset, numba is used if it imports cleanly.

Both paths evaluate each output element with a fixed summation order that
does not depend on how many points or matrices are batched together.
"""
import math
import os

import numpy as np

# Taylor degree and the scaled-norm threshold for scaling-and-squaring.
# With ||A/2^s||_1 <= 0.5 the truncation remainder is below 0.5**17/17! ~ 2e-20.
EXPM_ORDER = 16
EXPM_THETA = 0.5


def _squarings(norm1, theta=EXPM_THETA):
    if norm1 <= theta:
        return 0
    return int(math.ceil(math.log2(norm1 / theta)))


# ---------------------------------------------------------------- numpy path

def fourier_eval_numpy(coeffs, modes, points):
    """Evaluate ``sum_k c[f, k] exp(i k.x_p)`` for every row f and point p."""
    phases = np.exp(1j * (points @ modes.T))  # (P, M)
    out = np.empty((coeffs.shape[0], points.shape[0]), dtype=np.complex128)
    for p in range(points.shape[0]):
        out[:, p] = coeffs @ phases[p]
    return out


def expm_batch_numpy(a, order=EXPM_ORDER, squarings=None):
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[-1]
    out = np.empty_like(a)
    norms = np.abs(a).sum(axis=-2).max(axis=-1)
    if squarings is None:
        svals = np.array([_squarings(v) for v in norms], dtype=np.int64)
    else:
        svals = np.full(a.shape[0], int(squarings), dtype=np.int64)
    eye = np.eye(n, dtype=np.complex128)
    # group by squaring count so each group is one batched Horner pass
    for s in np.unique(svals):
        idx = np.nonzero(svals == s)[0]
        x = a[idx] / (2.0 ** s)
        r = np.broadcast_to(eye, x.shape).copy()
        for k in range(order, 0, -1):
            r = eye + (x @ r) / k
        for _ in range(s):
            r = r @ r
        out[idx] = r
    return out


# ---------------------------------------------------------------- numba path

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


if _HAVE_NUMBA:

    @njit(cache=True, fastmath=True)
    def fourier_eval_numba(coeffs, modes, points):
        nf, nm = coeffs.shape
        npts = points.shape[0]
        out = np.empty((nf, npts), dtype=np.complex128)
        cr = np.ascontiguousarray(coeffs.real)
        ci = np.ascontiguousarray(coeffs.imag)
        pr = np.empty(nm)
        pi = np.empty(nm)
        for p in range(npts):
            for m in range(nm):
                arg = (modes[m, 0] * points[p, 0] + modes[m, 1] * points[p, 1]
                       + modes[m, 2] * points[p, 2] + modes[m, 3] * points[p, 3])
                pr[m] = math.cos(arg)
                pi[m] = math.sin(arg)
            for f in range(nf):
                re = 0.0
                im = 0.0
                for m in range(nm):
                    re += cr[f, m] * pr[m] - ci[f, m] * pi[m]
                    im += cr[f, m] * pi[m] + ci[f, m] * pr[m]
                out[f, p] = complex(re, im)
        return out

    @njit(cache=True)
    def _matmul(a, b, out):
        n = a.shape[0]
        for i in range(n):
            for j in range(n):
                acc = 0j
                for k in range(n):
                    acc += a[i, k] * b[k, j]
                out[i, j] = acc

    @njit(cache=True)
    def expm_batch_numba(a, order, squarings):
        nb = a.shape[0]
        n = a.shape[1]
        out = np.empty_like(a)
        x = np.empty((n, n), dtype=np.complex128)
        r = np.empty((n, n), dtype=np.complex128)
        tmp = np.empty((n, n), dtype=np.complex128)
        for b in range(nb):
            if squarings < 0:
                norm1 = 0.0
                for j in range(n):
                    col = 0.0
                    for i in range(n):
                        col += abs(a[b, i, j])
                    if col > norm1:
                        norm1 = col
                s = 0
                if norm1 > 0.5:
                    s = int(math.ceil(math.log2(norm1 / 0.5)))
            else:
                s = squarings
            scale = 2.0 ** s
            for i in range(n):
                for j in range(n):
                    x[i, j] = a[b, i, j] / scale
                    r[i, j] = 1.0 if i == j else 0.0
            for k in range(order, 0, -1):
                _matmul(x, r, tmp)
                for i in range(n):
                    for j in range(n):
                        r[i, j] = tmp[i, j] / k
                    r[i, i] += 1.0
            for _ in range(s):
                _matmul(r, r, tmp)
                r[:, :] = tmp
            out[b] = r
        return out


def _select_backend():
    requested = os.environ.get("GAUGEKIT_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested in ("", "numba"):
        return "numba" if _HAVE_NUMBA else "numpy"
    raise ValueError(f"GAUGEKIT_BACKEND must be 'numba' or 'numpy', got {requested!r}")


BACKEND = _select_backend()


def fourier_eval(coeffs, modes, points):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    modes = np.ascontiguousarray(modes, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    if BACKEND == "numba":
        return fourier_eval_numba(coeffs, modes, points)
    return fourier_eval_numpy(coeffs, modes, points)


def expm_batch(a, order=EXPM_ORDER, squarings=None):
    """Exponentiate a stack of square matrices of shape (B, n, n)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] == 0:
        return a.copy()
    if BACKEND == "numba":
        return expm_batch_numba(a, int(order), -1 if squarings is None else int(squarings))
    return expm_batch_numpy(a, order, squarings)
