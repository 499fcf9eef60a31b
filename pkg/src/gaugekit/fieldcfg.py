"""Truncated Fourier fields on the periodic 4-torus [0, 2pi)^4.

Every field is a finite sum ``sum_k c_k exp(i k.x)`` over integer modes, so
partial derivatives are exact: d_mu multiplies each coefficient by
``i k_mu``. Derivatives are stored as a count per direction and applied in a
fixed order at evaluation time, which makes mixed partials commute bitwise.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .jets import Jet

TWO_PI = 2.0 * np.pi


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class Point4:
    x: tuple

    def __init__(self, *coords):
        if len(coords) == 1:
            coords = tuple(np.asarray(coords[0], dtype=float).reshape(-1))
        if len(coords) != 4:
            raise FieldError(f"a spacetime point has 4 coordinates, got {len(coords)}")
        object.__setattr__(self, "x", tuple(float(c) % TWO_PI for c in coords))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.x, dtype=dtype or float)


def as_points(x):
    """Coerce a Point4, a 4-vector or a (P, 4) array to a (P, 4) float array."""
    if isinstance(x, Point4):
        return np.array(x.x)[None]
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], Point4):
        return np.array([p.x for p in x])
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None]
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise FieldError(f"points must have shape (P, 4), got {arr.shape}")
    return arr


def mode_grid(K):
    """All integer 4-vectors with components in [-K, K], lexicographic.

    Reversing the list negates every mode.
    """
    r = range(-K, K + 1)
    return np.array(list(itertools.product(r, r, r, r)), dtype=np.int64).reshape(-1, 4)


class ComponentField:
    """A multi-indexed collection of Fourier scalars sharing one mode list.

    ``coeffs`` has shape ``shape + (M,)``; ``modes`` has shape ``(M, 4)``.
    """

    def __init__(self, shape, modes, coeffs, real=False, deriv=(0, 0, 0, 0), check=True):
        self.shape = tuple(shape)
        self.modes = np.asarray(modes, dtype=np.int64).reshape(-1, 4)
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(self.shape + (self.modes.shape[0],))
        self.real = bool(real)
        self.deriv = tuple(int(d) for d in deriv)
        if check:
            if not np.all(np.isfinite(self.coeffs)):
                raise FieldError("non-finite Fourier coefficient")
            if self.real:
                self._check_real()

    def _check_real(self):
        index = {tuple(k): i for i, k in enumerate(self.modes)}
        partner = np.empty(len(index), dtype=np.int64)
        for k, i in index.items():
            j = index.get(tuple(-c for c in k))
            if j is None:
                raise FieldError(f"real field is missing the conjugate partner of mode {k}")
            partner[i] = j
        c = self.coeffs
        scale = 1.0 + np.max(np.abs(c), initial=0.0)
        if np.max(np.abs(c - np.conj(c[..., partner])), initial=0.0) > 1e-14 * scale:
            raise FieldError("real field violates c_{-k} = conj(c_k)")

    @classmethod
    def from_scalars(cls, shape, entries):
        """Build from a mapping multi-index -> FourierScalar."""
        shape = tuple(shape)
        idx = list(np.ndindex(*shape))
        if set(entries) != set(idx):
            raise FieldError("entries must cover the shape exactly once")
        modes = sorted({tuple(k) for s in entries.values() for k in s.modes})
        modes = np.array(modes, dtype=np.int64).reshape(-1, 4)
        pos = {tuple(k): i for i, k in enumerate(modes)}
        coeffs = np.zeros(shape + (len(modes),), dtype=np.complex128)
        real = all(s.real for s in entries.values())
        for i in idx:
            s = entries[i]
            for k, c in zip(s.modes, s.coefficients()):
                coeffs[i + (pos[tuple(k)],)] = c
        return cls(shape, modes, coeffs, real=real)

    @classmethod
    def zeros(cls, shape, real=True):
        return cls(shape, np.zeros((1, 4)), np.zeros(tuple(shape) + (1,)), real=real)

    def __getitem__(self, idx):
        idx = idx if isinstance(idx, tuple) else (idx,)
        return FourierScalar._wrap(self.modes, self.coeffs[idx], self.real, self.deriv)

    @property
    def entries(self):
        return {i: self[i] for i in np.ndindex(*self.shape)}

    def coefficients(self):
        """Coefficients with the pending derivatives applied."""
        c = self.coeffs
        for mu in range(4):
            for _ in range(self.deriv[mu]):
                c = c * (1j * self.modes[:, mu])
        return c

    def partial(self, mu):
        if mu not in (0, 1, 2, 3):
            raise FieldError(f"Lorentz index must be 0..3, got {mu!r}")
        d = list(self.deriv)
        d[mu] += 1
        return self._derived(tuple(d))

    def _derived(self, deriv):
        out = object.__new__(type(self))
        out.shape, out.modes, out.coeffs, out.real = self.shape, self.modes, self.coeffs, self.real
        out.deriv = deriv
        return out

    def scaled(self, factor):
        return type(self)._from_arrays(self.shape, self.modes, self.coeffs * factor, self.real, self.deriv)

    @classmethod
    def _from_arrays(cls, shape, modes, coeffs, real, deriv):
        out = object.__new__(cls)
        out.shape, out.modes, out.coeffs, out.real, out.deriv = tuple(shape), modes, coeffs, real, deriv
        return out

    def eval(self, x):
        pts = as_points(x)
        flat = self.coefficients().reshape(-1, self.modes.shape[0])
        vals = _kernels.fourier_eval(flat, self.modes, pts).T.reshape((pts.shape[0],) + self.shape)
        if self.real:
            scale = 1.0 + np.sum(np.abs(flat), axis=-1).max(initial=0.0)
            if np.max(np.abs(vals.imag), initial=0.0) > 1e-13 * scale:
                raise FieldError("real-flagged field evaluated to a complex value")
            vals = vals.real
        if np.ndim(x) == 1 or isinstance(x, Point4):
            return vals[0]
        return vals

    def jet(self, points, order=2):
        """Values and exact partials up to ``order`` at (P, 4) points."""
        pts = as_points(points)
        cache = self.__dict__.setdefault("_jet_cache", {})
        key = (pts.tobytes(), self.deriv)
        hit = cache.get(key)
        if hit is not None and hit.order >= order:
            return hit.truncate(order)
        out = self._jet(pts, order)
        if len(cache) > 8:
            cache.clear()
        cache[key] = out
        return out

    def _jet(self, pts, order):
        base = self.coefficients().reshape(-1, self.modes.shape[0])
        ik = 1j * self.modes.T.astype(float)  # (4, M)
        sets = [base]
        if order >= 1:
            sets += [base * ik[mu] for mu in range(4)]
        pairs = [(mu, nu) for mu in range(4) for nu in range(mu, 4)]
        if order >= 2:
            sets += [base * ik[mu] * ik[nu] for mu, nu in pairs]
        f = base.shape[0]
        vals = _kernels.fourier_eval(np.concatenate(sets), self.modes, pts)
        vals = vals.reshape(len(sets), f, pts.shape[0]).transpose(0, 2, 1)
        vals = vals.reshape((len(sets), pts.shape[0]) + self.shape)
        if self.real:
            vals = vals.real.astype(np.complex128)
        parts = [vals[0]]
        if order >= 1:
            parts.append(vals[1:5])
        if order >= 2:
            dd = np.empty((4, 4) + vals.shape[1:], dtype=np.complex128)
            for i, (mu, nu) in enumerate(pairs):
                dd[mu, nu] = dd[nu, mu] = vals[5 + i]
            parts.append(dd)
        return Jet(*parts)

    def same_coefficients(self, other):
        return (self.shape == other.shape and np.array_equal(self.modes, other.modes)
                and np.array_equal(self.coefficients(), other.coefficients()))


class FourierScalar(ComponentField):
    """A single scalar field given by a mode -> coefficient map."""

    def __init__(self, terms, real=False):
        modes = np.array([tuple(k) for k in terms], dtype=np.int64).reshape(-1, 4)
        coeffs = np.array([complex(c) for c in terms.values()], dtype=np.complex128)
        if len(modes) == 0:
            modes, coeffs = np.zeros((1, 4), dtype=np.int64), np.zeros(1, dtype=np.complex128)
        super().__init__((), modes, coeffs, real=real)

    @classmethod
    def _wrap(cls, modes, coeffs, real, deriv):
        return cls._from_arrays((), modes, np.asarray(coeffs), real, deriv)

    @property
    def terms(self):
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.modes, self.coefficients())}


def evaluate(field, x):
    return field.eval(x)


def partial(field, mu):
    return field.partial(mu)


def seed_seq(*parts):
    """Flatten ints and nested int sequences into one SeedSequence entropy list."""
    out = []
    for p in parts:
        if isinstance(p, (list, tuple)):
            out.extend(seed_seq(*p))
        else:
            out.append(int(p))
    return out


def random_field(seed, shape, K=2, amplitude=0.5, real=True):
    """Deterministic random Fourier field on the full mode grid [-K, K]^4.

    Each coefficient is drawn uniformly from the disk of radius
    ``amplitude * exp(-|k|^2 / 2)``, so no coefficient exceeds ``amplitude``
    and high modes are damped. Real fields are symmetrized so that
    c_{-k} = conj(c_k).
    """
    if K < 0:
        raise FieldError("mode cutoff K must be >= 0")
    if amplitude < 0:
        raise FieldError("amplitude must be >= 0")
    shape = tuple(shape)
    modes = mode_grid(K)
    m = modes.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(seed_seq(seed)))
    r = np.sqrt(rng.random(shape + (m,)))
    phi = rng.random(shape + (m,)) * TWO_PI
    weight = np.exp(-0.5 * np.sum(modes ** 2, axis=1))
    c = amplitude * weight * r * np.exp(1j * phi)
    if real:
        c = 0.5 * (c + np.conj(c[..., ::-1]))
        c[..., m // 2] = c[..., m // 2].real
    return ComponentField(shape, modes, c, real=real)


def sample_points(seed, count):
    if count < 1:
        raise FieldError("need at least one sample point")
    rng = np.random.default_rng(np.random.SeedSequence(seed_seq(seed)))
    return rng.random((count, 4)) * TWO_PI
