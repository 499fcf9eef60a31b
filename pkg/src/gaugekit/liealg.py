"""SU(n) and U(1) generator bases, structure constants and group elements."""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


class AlgebraError(ValueError):
    """Invalid argument to an algebra constructor or operation."""


@dataclass(frozen=True)
class AlgebraBasis:
    """Generators of one factor group.

    For ``kind == "SU"`` the generators are the generalized Gell-Mann
    matrices halved, normalized to ``Tr(T_a T_b) = delta_ab / 2``. For
    ``kind == "U1"`` there is a single 1x1 generator ``charge / 2``.
    """

    kind: str
    n: int
    generators: np.ndarray = field(repr=False)
    coupling: float = 1.0
    charge: float | None = None

    @property
    def dim(self):
        return self.generators.shape[0]

    @property
    def abelian(self):
        return self.kind == "U1"

    def with_coupling(self, g):
        return AlgebraBasis(self.kind, self.n, self.generators, float(g), self.charge)

    def label(self):
        return "U(1)" if self.abelian else f"SU({self.n})"


@dataclass(frozen=True)
class StructureConstants:
    f: np.ndarray


def su_basis(n, coupling=1.0):
    """Generalized Gell-Mann basis of su(n), halved.

    Ordering: symmetric off-diagonal pairs, antisymmetric pairs, then the
    n-1 diagonal generators; pairs (j, k) with j < k in lexicographic order.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise AlgebraError(f"SU(n) needs an integer n >= 2, got {n!r}")
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    gens = []
    for j, k in pairs:
        t = np.zeros((n, n), dtype=np.complex128)
        t[j, k] = t[k, j] = 0.5
        gens.append(t)
    for j, k in pairs:
        t = np.zeros((n, n), dtype=np.complex128)
        t[j, k] = -0.5j
        t[k, j] = 0.5j
        gens.append(t)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        gens.append(np.diag(d * np.sqrt(2.0 / (l * (l + 1))) / 2).astype(np.complex128))
    g = np.array(gens)
    g.setflags(write=False)
    return AlgebraBasis("SU", int(n), g, float(coupling))


def u1_basis(charge, coupling=1.0):
    g = np.array([[[charge / 2.0]]], dtype=np.complex128)
    g.setflags(write=False)
    return AlgebraBasis("U1", 1, g, float(coupling), float(charge))


def structure_constants(basis):
    """f_abc = -2i Tr([T_a, T_b] T_c), valid under Tr(T_a T_b) = delta_ab / 2."""
    if basis.abelian:
        return StructureConstants(np.zeros((basis.dim,) * 3))
    t = basis.generators
    comm = np.einsum("aij,bjk->abik", t, t) - np.einsum("bij,ajk->abik", t, t)
    f = -2j * np.einsum("abij,cji->abc", comm, t)
    if np.max(np.abs(f.imag)) > 1e-12:
        raise AlgebraError("structure constants came out complex; basis is not trace-orthonormal")
    return StructureConstants(np.ascontiguousarray(f.real))


def basis_residuals(basis):
    """Max residual of every basis invariant, keyed by name."""
    t = basis.generators
    out = {"hermitian": float(np.max(np.abs(t - np.conj(np.swapaxes(t, 1, 2)))))}
    if basis.abelian:
        if basis.charge is not None:
            out["u1_generator"] = float(abs(t[0, 0, 0] - basis.charge / 2))
        return out
    n = basis.n
    out["count"] = float(abs(basis.dim - (n * n - 1)))
    out["traceless"] = float(np.max(np.abs(np.einsum("aii->a", t))))
    gram = np.einsum("aij,bji->ab", t, t)
    out["orthonormal"] = float(np.max(np.abs(gram - 0.5 * np.eye(basis.dim))))
    f = structure_constants(basis).f
    out["antisymmetric"] = float(max(np.max(np.abs(f + np.swapaxes(f, 0, 1))),
                                     np.max(np.abs(f + np.swapaxes(f, 1, 2)))))
    comm = np.einsum("aij,bjk->abik", t, t) - np.einsum("bij,ajk->abik", t, t)
    out["closure"] = float(np.max(np.abs(comm - 1j * np.einsum("abc,cij->abij", f, t))))
    jac = (np.einsum("ade,bcd->abce", f, f) + np.einsum("bde,cad->abce", f, f)
           + np.einsum("cde,abd->abce", f, f))
    out["jacobi"] = float(np.max(np.abs(jac)))
    return out


def mat_exp(a, squarings=None, order=None):
    """Matrix exponential by scaling-and-squaring with a truncated Taylor series.

    ``squarings`` and ``order`` override the automatic choices; they exist
    for convergence studies.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise AlgebraError(f"mat_exp needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise AlgebraError("mat_exp: non-finite entries")
    return _kernels.expm_batch(a[None], order or _kernels.EXPM_ORDER, squarings)[0]


def group_element(basis, params):
    """exp(i g sum_a params_a T_a)."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != basis.dim:
        raise AlgebraError(f"expected {basis.dim} parameters for {basis.label()}, got {params.shape[0]}")
    x = 1j * basis.coupling * np.tensordot(params, basis.generators, axes=1)
    return mat_exp(x)
