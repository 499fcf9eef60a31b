"""Gauge transformations, covariant derivatives and kinetic densities
for an SU(n)_U x SU(m)_V theory (either factor may also be U(1)).

Matter fields carry internal indices ``(i, j)``: the U factor acts from the
left on ``i``, the V factor from the right on ``j``. Fermions carry an
extra leading Dirac index. Gauge potentials are stored as real component
fields ``W[a, mu]`` and assembled into anti-Hermitian matrices
``-i T_a W[a, mu]``.

All evaluators accept a single point or a ``(P, 4)`` batch. Composite and
transformed fields are evaluated through jets (see :mod:`gaugekit.jets`),
so every derivative is analytic.
"""
import functools
from dataclasses import dataclass, field, replace

import numpy as np

from .fieldcfg import ComponentField, as_points, random_field
from .jets import Jet, expm_jet
from .liealg import AlgebraBasis, su_basis, u1_basis

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
REPS = ("bifundamental", "fundamental_U", "fundamental_V", "singlet")
KINDS = ("fermion", "scalar")
CHIRALITIES = ("left", "right", "none")

# Sign of g[W_mu, W_nu] in F_{mu nu} for the left-acting sector; the
# right-acting sector's sign is fitted against [D_mu, D_nu] by adjudicate_signs().
U_COMMUTATOR_SIGN = 1.0


class ModelError(ValueError):
    """Inconsistent model declaration (representation, charges, names)."""


@dataclass(frozen=True)
class DiracAlgebra:
    gamma: np.ndarray
    gamma5: np.ndarray
    metric: np.ndarray


def dirac_algebra():
    """Dirac representation: gamma^0 = diag(I, -I), gamma^i = [[0, s_i], [-s_i, 0]]."""
    s = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    i2, z2 = np.eye(2), np.zeros((2, 2))
    g = [np.block([[i2, z2], [z2, -i2]])]
    g += [np.block([[z2, si], [-si, z2]]) for si in s]
    g = np.array(g, dtype=np.complex128)
    g5 = 1j * g[0] @ g[1] @ g[2] @ g[3]
    for a in (g, g5):
        a.setflags(write=False)
    return DiracAlgebra(g, g5, METRIC)


DIRAC = dirac_algebra()


def dirac_residuals(d=DIRAC):
    g, eye = d.gamma, np.eye(4)
    anti = max(np.max(np.abs(g[m] @ g[n] + g[n] @ g[m] - 2 * d.metric[m, n] * eye))
               for m in range(4) for n in range(4))
    herm = max(np.max(np.abs(g[0].conj().T - g[0])),
               *(np.max(np.abs(g[i].conj().T + g[i])) for i in (1, 2, 3)))
    g5 = max(np.max(np.abs(d.gamma5 @ d.gamma5 - eye)),
             np.max(np.abs(d.gamma5 - 1j * g[0] @ g[1] @ g[2] @ g[3])))
    return {"anticommutator": float(anti), "hermiticity": float(herm), "gamma5": float(g5)}


# ----------------------------------------------------------------- model

@dataclass(frozen=True)
class FieldDecl:
    name: str
    kind: str
    rep: str
    chirality: str = "none"
    charge: float | None = None
    vev: float | None = None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    basis_U: AlgebraBasis
    basis_V: AlgebraBasis
    fields: tuple = ()
    v_commutator_sign: float | None = None

    def basis(self, sector):
        if sector not in ("U", "V"):
            raise ModelError(f"sector must be 'U' or 'V', got {sector!r}")
        return self.basis_U if sector == "U" else self.basis_V

    def validate(self):
        names = [f.name for f in self.fields]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ModelError(f"duplicate field names: {sorted(dup)}")
        for f in self.fields:
            if f.kind not in KINDS:
                raise ModelError(f"field {f.name!r}: unknown kind {f.kind!r}")
            if f.rep not in REPS:
                raise ModelError(f"field {f.name!r}: unknown representation {f.rep!r}")
            if f.chirality not in CHIRALITIES:
                raise ModelError(f"field {f.name!r}: unknown chirality {f.chirality!r}")
            if f.kind == "scalar" and f.chirality != "none":
                raise ModelError(f"scalar {f.name!r} cannot carry a chirality")
            if f.kind == "fermion" and f.vev is not None:
                raise ModelError(f"fermion {f.name!r} cannot carry a vev")
            for s in "UV":
                if acts(f, s) and self.basis(s).abelian and self._charge(f, s) is None:
                    raise ModelError(f"field {f.name!r} couples to U(1) sector {s} but has no charge")
        return self

    def _charge(self, decl, sector):
        return decl.charge if decl.charge is not None else self.basis(sector).charge

    def field(self, name):
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def matter_generators(self, decl, sector):
        """Generators acting on ``decl`` from ``sector``, or None."""
        if not acts(decl, sector):
            return None
        b = self.basis(sector)
        if b.abelian:
            return u1_basis(self._charge(decl, sector)).generators
        return b.generators

    def gauge_generators(self, sector):
        """Generators for the gauge potential itself; U(1) uses unit normalization."""
        b = self.basis(sector)
        if b.abelian:
            return _UNIT_U1
        return b.generators

    def internal_dims(self, decl):
        n = self.basis_U.n if acts(decl, "U") else 1
        m = self.basis_V.n if acts(decl, "V") else 1
        return n, m

    def field_shape(self, decl):
        n, m = self.internal_dims(decl)
        return (4, n, m) if decl.kind == "fermion" else (n, m)

    def fermions(self):
        return [f for f in self.fields if f.kind == "fermion"]

    def scalars(self):
        return [f for f in self.fields if f.kind == "scalar"]


_UNIT_U1 = np.ones((1, 1, 1), dtype=np.complex128)
_UNIT_U1.setflags(write=False)


def acts(decl, sector):
    if sector == "U":
        return decl.rep in ("bifundamental", "fundamental_U")
    return decl.rep in ("bifundamental", "fundamental_V")


def make_basis(kind, n, coupling, charge=None):
    if kind == "U1":
        return replace(u1_basis(1.0 if charge is None else charge, coupling), charge=charge)
    return su_basis(n, coupling)


# ------------------------------------------------------------ gauge config

@dataclass(frozen=True)
class GaugeConfig:
    """Component potentials: ``WU`` has shape (dim_U, 4), ``WV`` (dim_V, 4)."""

    WU: ComponentField
    WV: ComponentField

    def jets(self, points, order):
        """Component jets with the Lorentz index before the generator index."""
        pts = as_points(points)
        return tuple(w.jet(pts, order).apply(lambda p: np.swapaxes(p, -1, -2)) for w in (self.WU, self.WV))


def zero_config(model):
    return GaugeConfig(ComponentField.zeros((model.basis_U.dim, 4)),
                       ComponentField.zeros((model.basis_V.dim, 4)))


def random_config(model, seed, K=2, amplitude=0.5):
    return GaugeConfig(random_field([seed, 1], (model.basis_U.dim, 4), K, amplitude),
                       random_field([seed, 2], (model.basis_V.dim, 4), K, amplitude))


def chiral_projector(side, dirac=DIRAC):
    """(1 - gamma5)/2 for left, (1 + gamma5)/2 for right."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    s = -1.0 if side == "left" else 1.0
    return 0.5 * (np.eye(4) + s * dirac.gamma5)


def random_matter(model, decl, seed, K=2, amplitude=0.5):
    """Random complex field of the declared shape; chiral fermions are projected."""
    f = random_field(seed, model.field_shape(decl), K, amplitude, real=False)
    if decl.kind == "fermion" and decl.chirality != "none":
        proj = chiral_projector(decl.chirality)
        f = ComponentField(f.shape, f.modes, np.einsum("st,tijm->sijm", proj, f.coeffs))
    return f


def random_fields(model, seed, K=2, amplitude=0.5):
    return {d.name: random_matter(model, d, [seed, 10 + i], K, amplitude)
            for i, d in enumerate(model.fields)}


# ---------------------------------------------------------- transformations

CONVENTIONS = ("coupled", "ew")


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """Gauge parameters alpha_a(x) (U sector) and beta_b(x) (V sector).

    ``convention == "coupled"``: U = exp(+i g_U alpha.T), V = exp(+i g_V beta.T).
    ``convention == "ew"``: U = exp(-i alpha.T), V = exp(-i beta.T), the
    exponent sign and normalization of the electroweak transformation laws.
    """

    alpha: ComponentField
    beta: ComponentField
    convention: str = "coupled"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def params(self, sector):
        return self.alpha if sector == "U" else self.beta

    def exponent_factor(self, basis):
        if self.convention == "coupled":
            return 1j * basis.coupling
        if self.convention == "ew":
            return -1j
        raise ValueError(f"unknown convention {self.convention!r}")

    def scaled(self, eps):
        return TransformSpec(self.alpha.scaled(eps), self.beta.scaled(eps), self.convention)

    def unitary_jet(self, model, sector, gens, points, order):
        """Jet of the group element built from ``gens`` (matter or gauge generators)."""
        key = (sector, gens.tobytes(), points.tobytes(), order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        factor = self.exponent_factor(model.basis(sector))
        p = self.params(sector).jet(points, order)
        x = p.apply(lambda a: factor * np.tensordot(a, gens, axes=([-1], [0])))
        u = expm_jet(x, order)
        self._cache[key] = u
        return u


def identity_transform(model, convention="coupled"):
    return TransformSpec(ComponentField.zeros((model.basis_U.dim,)),
                         ComponentField.zeros((model.basis_V.dim,)), convention)


def random_transform(model, seed, K=2, amplitude=0.5, constant=False, convention="coupled"):
    k = 0 if constant else K
    return TransformSpec(random_field([seed, 3], (model.basis_U.dim,), k, amplitude),
                         random_field([seed, 4], (model.basis_V.dim,), k, amplitude), convention)


def _embed(mat, extra):
    """Insert ``extra`` singleton axes after the point axis of a matrix jet."""
    for _ in range(extra):
        mat = mat.expand(1)
    return mat


class TransformedField:
    """Psi'(x) = U(x) Psi(x) V(x) as an exact pointwise evaluator."""

    def __init__(self, model, decl, base, transform, sides="UV"):
        self.model, self.decl, self.base, self.transform, self.sides = model, decl, base, transform, sides

    def jet(self, points, order=2):
        pts = as_points(points)
        out = self.base.jet(pts, order)
        extra = out.val.ndim - 3
        for s in self.sides:
            gens = self.model.matter_generators(self.decl, s)
            if gens is None:
                continue
            u = _embed(self.transform.unitary_jet(self.model, s, gens, pts, order), extra)
            out = u @ out if s == "U" else out @ u
        return out

    def eval(self, x):
        v = self.jet(as_points(x), 0).val
        return v[0] if np.ndim(x) == 1 else v


def transform_fermion(model, decl, field_, transform):
    return TransformedField(model, decl, field_, transform)


transform_matter = transform_fermion


def _component_norms(gens):
    return np.einsum("aij,aji->a", gens, gens).real


def _to_components(mat, gens):
    norms = _component_norms(gens)
    return mat.apply(lambda p: 1j * np.einsum("...ij,aji->...a", p, gens) / norms)


def _connection(comp, gens):
    return comp.apply(lambda p: -1j * np.tensordot(p, gens, axes=([-1], [0])))


class TransformedConfig:
    """Both gauge sectors after a local transformation.

    U sector: W' = (1/g) U dU^dagger + U W U^dagger.
    V sector: W' = (1/g) (dV^dagger) V + V^dagger W V.
    """

    def __init__(self, model, config, transform, sectors="UV"):
        self.model, self.config, self.transform, self.sectors = model, config, transform, sectors
        self._cache = {}

    def sector_matrix_jet(self, sector, points, order):
        pts = as_points(points)
        key = (sector, pts.tobytes(), order)
        if key in self._cache:
            return self._cache[key]
        gens = self.model.gauge_generators(sector)
        g = self.model.basis(sector).coupling
        comp = self.config.jets(pts, order)[0 if sector == "U" else 1]
        w = _connection(comp, gens)
        if sector not in self.sectors:
            self._cache[key] = w
            return w
        u = self.transform.unitary_jet(self.model, sector, gens, pts, order + 1)
        ud = u.dag()
        d_ud = ud.grad()
        uk, udk = u.truncate(order).expand(1), ud.truncate(order).expand(1)
        if sector == "U":
            out = (uk @ d_ud).scale(1.0 / g) + uk @ w @ udk
        else:
            out = (d_ud @ uk).scale(1.0 / g) + udk @ w @ uk
        self._cache[key] = out
        return out

    def jets(self, points, order):
        gens = [self.model.gauge_generators(s) for s in "UV"]
        return tuple(_to_components(self.sector_matrix_jet(s, points, order), g) for s, g in zip("UV", gens))

    def matrix_at(self, sector, mu, x):
        v = self.sector_matrix_jet(sector, x, 0).val[:, mu]
        return v[0] if np.ndim(x) == 1 else v


def transform_config(model, config, transform, sectors="UV"):
    return TransformedConfig(model, config, transform, sectors)


def transform_gauge_U(model, config, transform):
    return TransformedConfig(model, config, transform, sectors="U")


def transform_gauge_V(model, config, transform):
    return TransformedConfig(model, config, transform, sectors="V")


# ----------------------------------------------------- derivatives, strengths

def covariant_jet(model, decl, phi, comps, omit=()):
    """D_mu Phi for all mu, stacked on value-axis 1; one order below ``phi``."""
    k = phi.order - 1
    out = phi.grad()
    p0 = phi.truncate(k).expand(1)
    extra = phi.val.ndim - 3
    for s, comp in zip("UV", comps):
        gens = model.matter_generators(decl, s)
        if gens is None or s in omit:
            continue
        a = _connection(comp.truncate(k), gens)
        for _ in range(extra):
            a = a.expand(2)
        term = a @ p0 if s == "U" else p0 @ a
        out = out + term.scale(model.basis(s).coupling)
    return out


def commutator_sign(model, sector):
    if sector == "U":
        return U_COMMUTATOR_SIGN
    if model.v_commutator_sign is not None:
        return float(model.v_commutator_sign)
    return adjudicate_signs()["V"]


def strength_from_connection(a, g, sign):
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + sign * g [A_mu, A_nu]; shape (P, 4, 4, d, d)."""
    curl = np.moveaxis(a.parts[1], 0, 1)
    curl = curl - np.swapaxes(curl, 1, 2)
    v = a.val
    comm = v[:, :, None] @ v[:, None, :] - v[:, None, :] @ v[:, :, None]
    return curl + (sign * g) * comm


def sector_strength(model, comps, sector, sign=None):
    gens = model.gauge_generators(sector)
    comp = comps[0 if sector == "U" else 1]
    s = commutator_sign(model, sector) if sign is None else sign
    return strength_from_connection(_connection(comp, gens), model.basis(sector).coupling, s)


def _squeeze(v, x):
    return v[0] if np.ndim(x) == 1 else v


def w_matrix_at(model, config, sector, mu, x):
    """-i sum_a T_a W_{a mu}(x) with the sector's gauge generators."""
    comp = config.jets(as_points(x), 0)[0 if sector == "U" else 1]
    return _squeeze(_connection(comp, model.gauge_generators(sector)).val[:, mu], x)


def covariant_derivative_at(model, decl, field_, config, mu, x):
    pts = as_points(x)
    d = covariant_jet(model, decl, field_.jet(pts, 1), config.jets(pts, 0))
    return _squeeze(d.val[:, mu], x)


def field_strength_at(model, config, sector, mu, nu, x, sign=None):
    pts = as_points(x)
    f = sector_strength(model, config.jets(pts, 1), sector, sign)
    return _squeeze(f[:, mu, nu], x)


# ------------------------------------------------------------ Lagrangians

_G0G = np.einsum("st,mtu->msu", DIRAC.gamma[0], DIRAC.gamma)
_ETA = np.diag(METRIC)


def fermion_density(model, decl, psi, comps, psibar_source=None):
    """i Tr[Psibar gamma^mu D_mu Psi] per point. ``psibar_source`` overrides the conjugated field."""
    d = covariant_jet(model, decl, psi, comps).val
    bar = psi.val if psibar_source is None else psibar_source
    return 1j * np.einsum("psij,mst,pmtij->p", np.conj(bar), _G0G, d)


def scalar_density(model, decl, phi, comps, conj_source=None):
    """eta^{mu mu} Tr[(D_mu phi)^dagger D_mu phi] per point."""
    d = covariant_jet(model, decl, phi, comps).val
    left = d if conj_source is None else conj_source
    return np.einsum("m,pmij,pmij->p", _ETA, np.conj(left), d)


def gauge_density(model, comps, sector, sign=None, form="dagger"):
    """1/2 Tr[F^dagger_{mu nu} F^{mu nu}] (or 1/2 Tr[F F] when form == "plain")."""
    f = sector_strength(model, comps, sector, sign)
    lhs = np.conj(np.swapaxes(f, -1, -2)) if form == "dagger" else f
    return 0.5 * np.einsum("m,n,pmnij,pmnji->p", _ETA, _ETA, lhs, f)


def total_density(model, matter_jets, comps, signs=(None, None)):
    """Kinetic density: sum of fermion terms - gauge terms + scalar terms."""
    out = 0.0
    for d in model.fields:
        j = matter_jets[d.name]
        if d.kind == "fermion":
            out = out + fermion_density(model, d, j, comps)
        else:
            out = out + scalar_density(model, d, j, comps)
    for s, sign in zip("UV", signs):
        out = out - gauge_density(model, comps, s, sign)
    return out


def lagrangian_fermion_at(model, decl, field_, config, x, dirac=DIRAC):
    if decl.kind != "fermion":
        raise ModelError(f"{decl.name!r} is not a fermion")
    pts = as_points(x)
    return _squeeze(fermion_density(model, decl, field_.jet(pts, 1), config.jets(pts, 0)), x)


def lagrangian_scalar_at(model, decl, field_, config, x):
    if decl.kind != "scalar":
        raise ModelError(f"{decl.name!r} is not a scalar")
    pts = as_points(x)
    v = scalar_density(model, decl, field_.jet(pts, 1), config.jets(pts, 0))
    return _squeeze(v.real, x)


def lagrangian_gauge_at(model, config, sector, x, sign=None):
    pts = as_points(x)
    return _squeeze(gauge_density(model, config.jets(pts, 1), sector, sign).real, x)


def lagrangian_gauge_trace_ff_at(model, config, sector, x, sign=None):
    """The 1/2 Tr[F_{mu nu} F^{mu nu}] form; equals minus the dagger form for anti-Hermitian F."""
    pts = as_points(x)
    return _squeeze(gauge_density(model, config.jets(pts, 1), sector, sign, form="plain").real, x)


def lagrangian_total_at(model, fields, config, x):
    pts = as_points(x)
    mj = {d.name: fields[d.name].jet(pts, 1) for d in model.fields}
    return _squeeze(total_density(model, mj, config.jets(pts, 1)), x)


def unitary_at(basis, params, x, convention="coupled"):
    """Group element at x from per-generator parameter fields (shape (dim,))."""
    pts = as_points(x)
    if params.shape != (basis.dim,):
        raise ModelError(f"expected parameters of shape ({basis.dim},), got {params.shape}")
    factor = 1j * basis.coupling if convention == "coupled" else -1j
    p = params.jet(pts, 0).val
    u = expm_jet(Jet(factor * np.tensordot(p, basis.generators, axes=([-1], [0]))), 0).val
    return _squeeze(u, x)


# ------------------------------------------------------- sign adjudication

def commutator_residuals(model, decl, phi, comps, signs):
    """[D_mu, D_nu] phi minus g_U F^U phi + g_V phi F^V for the given signs.

    ``phi`` needs order 2 and ``comps`` order 1. Returns (P, 4, 4, ..., n, m).
    """
    dd = covariant_jet(model, decl, covariant_jet(model, decl, phi, comps), comps).val
    comm = dd - np.swapaxes(dd, 1, 2)
    p = phi.val[:, None, None]
    rhs = np.zeros_like(comm)
    extra = phi.val.ndim - 3
    for s, sign in zip("UV", signs):
        gens = model.matter_generators(decl, s)
        if gens is None:
            continue
        a = _connection(comps[0 if s == "U" else 1], gens)
        f = strength_from_connection(a, model.basis(s).coupling, sign)
        for _ in range(extra):
            f = f[:, :, :, None]
        g = model.basis(s).coupling
        rhs = rhs + g * (f @ p if s == "U" else p @ f)
    return comm - rhs


@functools.lru_cache(maxsize=None)
def adjudicate_signs(seed=20240601):
    """Fit the commutator-term sign of each sector against [D_mu, D_nu] phi.

    Uses an SU(2) x SU(2) bifundamental scalar with random potentials. For
    each sector the brute-force commutator is compared with the curl-only
    field strength; both sectors' commutator terms g^2 [W_mu, W_nu] are then
    fitted to the leftover jointly by least squares and rounded to +-1.
    """
    model = ModelSpec("adjudication", su_basis(2, 0.8), su_basis(2, 0.6),
                      (FieldDecl("phi", "scalar", "bifundamental"),))
    pts = np.random.default_rng(seed).random((16, 4)) * 2 * np.pi
    cfg = random_config(model, seed)
    comps = cfg.jets(pts, 1)
    phi = random_matter(model, model.fields[0], [seed, 7]).jet(pts, 2)
    decl = model.fields[0]
    base = commutator_residuals(model, decl, phi, comps, (0.0, 0.0))
    cols = []
    for s in "UV":
        gens = model.matter_generators(decl, s)
        a = _connection(comps[0 if s == "U" else 1], gens)
        g = model.basis(s).coupling
        f = strength_from_connection(a, g, 1.0) - strength_from_connection(a, g, 0.0)
        p = phi.val[:, None, None]
        cols.append((g * (f @ p if s == "U" else p @ f)).ravel())
    fit = np.linalg.lstsq(np.stack(cols, axis=1), base.ravel(), rcond=None)[0].real
    return {"U": float(np.sign(fit[0])), "V": float(np.sign(fit[1])), "fit": tuple(float(v) for v in fit)}
