"""Second-order jets: values together with their first and second partials.

A jet of order k stores ``parts[0]`` (value, shape ``(P, ...)``),
``parts[1]`` (shape ``(4, P, ...)``, the partials d_mu) and ``parts[2]``
(shape ``(4, 4, P, ...)``, the partials d_mu d_nu). Products follow the
Leibniz rule, so composite fields built from Fourier data keep exact
derivatives without ever being re-expanded in modes.
"""
import numpy as np

from . import _kernels


class Jet:
    __slots__ = ("parts",)

    def __init__(self, *parts):
        self.parts = tuple(parts)

    @property
    def order(self):
        return len(self.parts) - 1

    @property
    def val(self):
        return self.parts[0]

    @property
    def shape(self):
        return self.parts[0].shape

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"jet of order {self.order} cannot supply order {order}")
        return Jet(*self.parts[: order + 1])

    def partial(self, mu):
        """d_mu of the jet; the result has one order less."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        parts = [self.parts[1][mu]]
        if self.order >= 2:
            parts.append(self.parts[2][mu])
        return Jet(*parts)

    def grad(self):
        """All four partials stacked on value-axis 1 (right after the point axis)."""
        return stack([self.partial(mu) for mu in range(4)], axis=1)

    def apply(self, fn):
        """Apply a linear map that acts on trailing axes only."""
        return Jet(*(fn(p) for p in self.parts))

    def _abs_axis(self, k, axis):
        return k + (axis if axis >= 0 else self.parts[0].ndim + axis)

    def take(self, axis, index):
        return Jet(*(np.take(p, index, axis=self._abs_axis(k, axis)) for k, p in enumerate(self.parts)))

    def expand(self, axis):
        return Jet(*(np.expand_dims(p, self._abs_axis(k, axis)) for k, p in enumerate(self.parts)))

    def conj(self):
        return Jet(*(np.conj(p) for p in self.parts))

    def dag(self):
        return Jet(*(np.conj(np.swapaxes(p, -1, -2)) for p in self.parts))

    def __add__(self, other):
        k = min(self.order, other.order)
        return Jet(*(a + b for a, b in zip(self.parts[: k + 1], other.parts[: k + 1])))

    def __sub__(self, other):
        k = min(self.order, other.order)
        return Jet(*(a - b for a, b in zip(self.parts[: k + 1], other.parts[: k + 1])))

    def __neg__(self):
        return Jet(*(-p for p in self.parts))

    def scale(self, c):
        return Jet(*(c * p for p in self.parts))

    def __matmul__(self, other):
        return product(self, other, np.matmul)


def stack(jets, axis):
    k = min(j.order for j in jets)
    parts = []
    for lead in range(k + 1):
        ax = lead + (axis if axis >= 0 else jets[0].parts[0].ndim + 1 + axis)
        parts.append(np.stack([j.parts[lead] for j in jets], axis=ax))
    return Jet(*parts)


def constant(value, order, npoints=None):
    value = np.asarray(value)
    if npoints is not None:
        value = np.broadcast_to(value, (npoints,) + value.shape)
    parts = [np.array(value)]
    for k in range(1, order + 1):
        parts.append(np.zeros((4,) * k + value.shape, dtype=value.dtype))
    return Jet(*parts)


def product(a, b, op):
    """Leibniz rule for any bilinear ``op`` that broadcasts over leading axes."""
    k = min(a.order, b.order)
    parts = [op(a.parts[0], b.parts[0])]
    if k >= 1:
        parts.append(op(a.parts[1], b.parts[0]) + op(a.parts[0], b.parts[1]))
    if k >= 2:
        a1, b1 = a.parts[1], b.parts[1]
        cross = op(a1[:, None], b1[None, :]) + op(a1[None, :], b1[:, None])
        parts.append(op(a.parts[2], b.parts[0]) + cross + op(a.parts[0], b.parts[2]))
    return Jet(*parts)


def _blocks(diag, upper):
    """Assemble block upper-triangular matrices.

    ``diag`` has shape (B, d, d); ``upper`` maps (row, col) block positions
    to (B, d, d) arrays. Returns (B, nb*d, nb*d).
    """
    nb = 1 + max(c for _, c in upper)
    b, d, _ = diag.shape
    out = np.zeros((b, nb * d, nb * d), dtype=np.complex128)
    for i in range(nb):
        out[:, i * d:(i + 1) * d, i * d:(i + 1) * d] = diag
    for (r, c), blk in upper.items():
        out[:, r * d:(r + 1) * d, c * d:(c + 1) * d] = blk
    return out


def expm_jet(x, order=None):
    """Jet of exp(X(x)) from a jet of X.

    Derivatives come from exponentials of block upper-triangular matrices:
    the (0,1) block of exp([[X, E], [0, X]]) is the directional derivative
    along E, and the (0,2) block of exp([[X, E, C], [0, X, F], [0, 0, X]])
    is the ordered second-order term along (E, F) plus the first-order term
    along C. Summing the two orderings gives the mixed partial.
    """
    order = x.order if order is None else order
    val = x.parts[0]
    lead = val.shape[:-2]
    d = val.shape[-1]
    xv = val.reshape(-1, d, d)
    nb = xv.shape[0]
    if order == 0:
        return Jet(_kernels.expm_batch(xv).reshape(val.shape))
    x1 = x.parts[1].reshape(4, nb, d, d)
    if order == 1:
        big = np.concatenate([_blocks(xv, {(0, 1): x1[mu]}) for mu in range(4)])
        e = _kernels.expm_batch(big).reshape(4, nb, 2 * d, 2 * d)
        u = e[0, :, :d, :d]
        du = e[:, :, :d, d:]
        return Jet(u.reshape(val.shape), du.reshape((4,) + val.shape))
    if order != 2:
        raise ValueError("expm_jet supports order <= 2")
    x2 = x.parts[2].reshape(4, 4, nb, d, d)
    pairs = [(mu, nu) for mu in range(4) for nu in range(mu, 4)]
    zero = np.zeros_like(xv)
    mats = []
    for mu, nu in pairs:
        mats.append(_blocks(xv, {(0, 1): x1[mu], (1, 2): x1[nu], (0, 2): x2[mu, nu]}))
        mats.append(_blocks(xv, {(0, 1): x1[nu], (1, 2): x1[mu], (0, 2): zero}))
    e = _kernels.expm_batch(np.concatenate(mats)).reshape(len(pairs), 2, nb, 3 * d, 3 * d)
    u = e[0, 0, :, :d, :d]
    du = np.empty((4, nb, d, d), dtype=np.complex128)
    ddu = np.empty((4, 4, nb, d, d), dtype=np.complex128)
    for i, (mu, nu) in enumerate(pairs):
        if mu == nu:
            du[mu] = e[i, 0, :, :d, d:2 * d]
        s = e[i, 0, :, :d, 2 * d:] + e[i, 1, :, :d, 2 * d:]
        ddu[mu, nu] = s
        ddu[nu, mu] = s
    return Jet(u.reshape(val.shape), du.reshape((4,) + val.shape), ddu.reshape((4, 4) + val.shape))


def dexp_series(x, e, terms=30):
    """Directional derivative of exp at ``x`` along ``e`` from the power series

        sum_{k>=1} 1/k! sum_{j<k} x^j e x^(k-1-j).

    Unscaled, so only accurate for modest ||x||; used as an independent check.
    """
    x = np.asarray(x, dtype=np.complex128)
    e = np.asarray(e, dtype=np.complex128)
    n = x.shape[-1]
    powers = [np.eye(n, dtype=np.complex128)]
    for _ in range(terms):
        powers.append(powers[-1] @ x)
    out = np.zeros_like(x)
    fact = 1.0
    for k in range(1, terms + 1):
        fact *= k
        acc = np.zeros_like(x)
        for j in range(k):
            acc = acc + powers[j] @ e @ powers[k - 1 - j]
        out = out + acc / fact
    return out
