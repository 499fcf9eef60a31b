"""SU(2)_L x U(1)_Y electroweak instance of the generic two-factor model.

Field content (hypercharges are inputs; defaults are the conventional set):

    L    left-handed lepton doublet, bifundamental, Y = -1
    e    right-handed singlet, U(1) only (fundamental_V), Y = -2
    phi  Higgs doublet, bifundamental scalar, Y = +1, vev upsilon

With W = -i T_a W_a and the U(1) potential -i B, the generic covariant
derivative D = d + g W phi + g' phi (-i Y/2 B) reads
(d - i g W_a T_a - i g' (Y/2) B) phi.
"""
from dataclasses import dataclass

import numpy as np

from . import gauge as G
from . import verify as V
from .fieldcfg import ComponentField, as_points, random_field, seed_seq
from .jets import Jet, expm_jet
from .liealg import structure_constants, su_basis

DEFAULT_HYPERCHARGES = {"L": -1.0, "e": -2.0, "phi": 1.0}

SYMMETRY_TOL = 1e-12
MOVED_MIN = 1e-3
TENSOR_TOL = 1e-13
CHIRAL_TOL = 1e-12

chiral_projector = G.chiral_projector


class EWError(ValueError):
    pass


@dataclass(frozen=True)
class EWModel:
    spec: G.ModelSpec
    g: float
    gp: float
    upsilon: float
    hypercharges: dict

    @property
    def su2(self):
        return self.spec.basis_U

    @property
    def u1(self):
        return self.spec.basis_V

    @property
    def higgs(self):
        return self.spec.field("phi")


@dataclass(frozen=True)
class HiggsParam:
    """xi: real field of shape (3,); eta: real field of shape ()."""

    xi: ComponentField
    eta: ComponentField
    upsilon: float


def build_ew_model(g=0.65, gp=0.35, upsilon=1.0, hypercharges=None):
    for name, v in (("g", g), ("g'", gp), ("upsilon", upsilon)):
        if not np.isfinite(v) or v <= 0:
            raise EWError(f"{name} must be positive, got {v!r}")
    y = dict(DEFAULT_HYPERCHARGES)
    y.update(hypercharges or {})
    fields = (
        G.FieldDecl("L", "fermion", "bifundamental", "left", y["L"]),
        G.FieldDecl("e", "fermion", "fundamental_V", "right", y["e"]),
        G.FieldDecl("phi", "scalar", "bifundamental", charge=y["phi"], vev=float(upsilon)),
    )
    spec = G.ModelSpec("gws", su_basis(2, g), G.make_basis("U1", 1, gp), fields)
    return EWModel(spec.validate(), float(g), float(gp), float(upsilon), y)


# ------------------------------------------------------------------ Higgs

def vev(upsilon):
    if upsilon < 0:
        raise EWError(f"upsilon must be >= 0, got {upsilon!r}")
    return np.array([0.0, upsilon / np.sqrt(2.0)], dtype=np.complex128)


def _higgs_inputs(p, x):
    pts = as_points(x)
    xi = np.asarray(p.xi.eval(pts), dtype=float).reshape(len(pts), 3)
    eta = np.asarray(p.eta.eval(pts), dtype=float).reshape(len(pts))
    return pts, xi, eta


def higgs_from_param(p, x):
    """(1/sqrt 2) exp[(2i/upsilon) xi.T] (0, upsilon + eta)."""
    if p.upsilon <= 0:
        raise EWError("upsilon must be positive")
    pts, xi, eta = _higgs_inputs(p, x)
    t = su_basis(2).generators
    u = expm_jet(Jet((2j / p.upsilon) * np.tensordot(xi, t, axes=([-1], [0]))), 0).val
    lower = np.stack([np.zeros_like(eta), p.upsilon + eta], axis=-1).astype(np.complex128)
    out = np.einsum("pij,pj->pi", u, lower) / np.sqrt(2.0)
    return out[0] if np.ndim(x) == 1 else out


def higgs_linearized(p, x):
    """(1/sqrt 2) (xi_2 + i xi_1, upsilon + eta - i xi_3), first order in xi."""
    pts, xi, eta = _higgs_inputs(p, x)
    out = np.stack([xi[:, 1] + 1j * xi[:, 0], p.upsilon + eta - 1j * xi[:, 2]], axis=-1) / np.sqrt(2.0)
    return out[0] if np.ndim(x) == 1 else out


def random_higgs_param(seed, upsilon=1.0, K=2, amplitude=0.5):
    return HiggsParam(random_field([seed, 20], (3,), K, amplitude),
                      random_field([seed, 21], (), K, amplitude), float(upsilon))


def check_higgs_linearization(ew, options):
    """exp form minus linearized form is O(eps^2): ratios on eps-halving near 4."""
    p = random_higgs_param(options.seed, ew.upsilon, options.modes, options.amplitude)
    pts = V.Scenario(ew.spec, options).points
    r = []
    for e in V.EPS_LADDER:
        q = HiggsParam(p.xi.scaled(e), p.eta.scaled(e), p.upsilon)
        r.append(float(np.max(np.abs(higgs_from_param(q, pts) - higgs_linearized(q, pts)))))
    ratios = [a / b for a, b in zip(r, r[1:])]
    devs = [abs(q - V.RATIO_TARGET) for q in ratios]
    notes = "ratios " + ", ".join(f"{q:.4f}" for q in ratios)
    return V.CheckResult.from_residuals("higgs_linearization", devs, V.RATIO_HALF_WIDTH, len(pts), notes)


# ------------------------------------------------------ residual symmetry

def vacuum_field(ew):
    """phi_0 = (0, upsilon/sqrt 2) as a constant bifundamental (2, 1) field."""
    v = vev(ew.upsilon).reshape(2, 1, 1)
    return ComponentField((2, 1), np.zeros((1, 4)), v)


def vacuum_displacement(ew, transform, points):
    """max_ij |U phi_0 V - phi_0| per point."""
    phi0 = vacuum_field(ew)
    moved = G.transform_matter(ew.spec, ew.higgs, phi0, transform).jet(points, 0).val
    return np.abs(moved - phi0.jet(points, 0).val).reshape(len(points), -1).max(axis=1)


def unbroken_transform(ew, seed, K=2, amplitude=0.5):
    """alpha_1 = alpha_2 = 0, g alpha_3(x) = g' beta(x), beta random."""
    beta = random_field([seed, 4], (1,), K, amplitude)
    c = np.zeros((3,) + beta.coeffs.shape[1:], dtype=np.complex128)
    c[2] = beta.coeffs[0] * (ew.gp / ew.g)
    alpha = ComponentField((3,), beta.modes, c, real=True)
    return G.TransformSpec(alpha, beta)


def constant_transform(ew, params):
    """Spacetime-constant transform from (alpha_1, alpha_2, alpha_3, beta)."""
    p = np.asarray(params, dtype=float)
    zero = np.zeros((1, 4))
    return G.TransformSpec(ComponentField((3,), zero, p[:3].reshape(3, 1), real=True),
                           ComponentField((1,), zero, p[3:].reshape(1, 1), real=True))


def residual_symmetry_check(ew, options):
    """phi_0 is fixed along the unbroken direction and moved by a generic one."""
    sc = V.Scenario(ew.spec, options)
    pts = sc.points
    amp = max(options.amplitude, 0.1)
    fixed = vacuum_displacement(ew, unbroken_transform(ew, options.seed, options.modes, amp), pts)
    generic = G.random_transform(ew.spec, [options.seed, 6], options.modes, amp)
    moved = vacuum_displacement(ew, generic, pts)
    ok_control = bool(np.max(moved) > MOVED_MIN)
    notes = (f"generic transform moves phi_0 by max {float(np.max(moved)):.3e} "
             f"(control {'ok' if ok_control else 'FAILED'}); Y_phi={ew.higgs.charge:g}")
    r = V.CheckResult.from_residuals("residual_symmetry", fixed, SYMMETRY_TOL, len(pts), notes)
    if not ok_control:
        r = V.CheckResult(r.name, r.residual_max, r.residual_mean, r.tolerance, False, r.points, r.notes)
    return r


def direction_scan(ew, count=100, seed=0, scale=1.0):
    """Displacement of phi_0 along the unbroken direction and ``count`` random ones.

    Directions are unit vectors in (alpha_1, alpha_2, alpha_3, beta), applied
    as constant transforms with parameter norm ``scale``.
    """
    x0 = np.zeros((1, 4))
    line = np.array([0.0, 0.0, ew.gp, ew.g])
    line /= np.linalg.norm(line)
    fixed = float(vacuum_displacement(ew, constant_transform(ew, scale * line), x0)[0])
    rng = np.random.default_rng(seed_seq(seed, 30))
    dirs = rng.normal(size=(count, 4))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    others = np.array([vacuum_displacement(ew, constant_transform(ew, scale * d), x0)[0] for d in dirs])
    return fixed, others


def check_direction_scan(ew, options, count=100):
    fixed, others = direction_scan(ew, count, options.seed)
    ok = fixed <= SYMMETRY_TOL and bool(np.all(others > MOVED_MIN))
    notes = f"unbroken {fixed:.3e}; min over {count} random directions {float(np.min(others)):.3e}"
    return V.CheckResult("symmetry_direction_scan", fixed, fixed, SYMMETRY_TOL, ok, count, notes)


# ------------------------------------------------------------ tensors

def ew_tensors_at(ew, config, mu, nu, x):
    """SU(2) tensor -i T_a (d W_a - d W_a + g eps_abc W_b W_c) and U(1) tensor -i (d B - d B).

    Built from components, independently of the matrix-commutator route.
    """
    pts = as_points(x)
    wu, wv = config.jets(pts, 1)
    f = structure_constants(ew.su2).f
    d1 = wu.parts[1]  # (4, P, 4, 3): d_rho W_{a sigma}
    comp = d1[mu, :, nu] - d1[nu, :, mu] + ew.g * np.einsum("abc,pb,pc->pa", f, wu.val[:, mu], wu.val[:, nu])
    su2 = -1j * np.tensordot(comp, ew.su2.generators, axes=([-1], [0]))
    b1 = wv.parts[1]
    u1 = (-1j * (b1[mu, :, nu, 0] - b1[nu, :, mu, 0])).reshape(-1, 1, 1)
    if np.ndim(x) == 1:
        return su2[0], u1[0]
    return su2, u1


def check_ew_tensors(ew, options):
    sc = V.Scenario(ew.spec, options)
    res = np.zeros(len(sc.points))
    for mu in range(4):
        for nu in range(4):
            a, b = ew_tensors_at(ew, sc.config, mu, nu, sc.points)
            fa = G.field_strength_at(ew.spec, sc.config, "U", mu, nu, sc.points)
            fb = G.field_strength_at(ew.spec, sc.config, "V", mu, nu, sc.points)
            res = np.maximum(res, np.abs(a - fa).reshape(len(res), -1).max(axis=1))
            res = np.maximum(res, np.abs(b - fb).reshape(len(res), -1).max(axis=1))
    return V.CheckResult.from_residuals("ew_tensors", res, TENSOR_TOL, len(res))


# ------------------------------------------------------------ chirality

def chiral_transform_matrix(ew, alpha, beta, charge):
    """exp[-i (alpha_i T_i (1 - g5)/2 + beta Y/2)] on Dirac x SU(2), one point per row.

    Acts on the flattened (spinor, isospin) index; ``alpha`` is (P, 3), ``beta`` (P,).
    """
    pl = G.chiral_projector("left")
    t = np.tensordot(alpha, ew.su2.generators, axes=([-1], [0]))  # (P, 2, 2)
    x = np.einsum("st,pij->psitj", pl, t).reshape(-1, 8, 8)
    x = x + (beta * charge / 2.0)[:, None, None] * np.eye(8)
    return expm_jet(Jet(-1j * x), 0).val


def check_chiral_transform(ew, options):
    """The left doublet transformed by the pipeline (U Psi V, "ew" exponent)
    equals the chirally projected 8x8 exponential acting on the Dirac x SU(2) index."""
    sc = V.Scenario(ew.spec, options)
    pts = sc.points
    t = sc.local_transform(tag=7, convention="ew")
    decl = ew.spec.field("L")
    psi = sc.fields["L"]
    lhs = G.transform_matter(ew.spec, decl, psi, t).jet(pts, 0).val[..., 0]  # (P, 4, 2)
    alpha = t.alpha.jet(pts, 0).val
    beta = t.beta.jet(pts, 0).val[:, 0]
    m = chiral_transform_matrix(ew, alpha, beta, decl.charge)
    rhs = np.einsum("pab,pb->pa", m, psi.jet(pts, 0).val[..., 0].reshape(len(pts), 8)).reshape(lhs.shape)
    res = np.abs(lhs - rhs).reshape(len(pts), -1).max(axis=1)
    return V.CheckResult.from_residuals("chiral_transform", res, CHIRAL_TOL, len(pts))


# ------------------------------------------------------------ suite

def ew_tasks(ew, options):
    return [
        ("residual_symmetry", SYMMETRY_TOL, lambda: residual_symmetry_check(ew, options)),
        ("symmetry_direction_scan", SYMMETRY_TOL, lambda: check_direction_scan(ew, options)),
        ("higgs_linearization", V.RATIO_HALF_WIDTH, lambda: check_higgs_linearization(ew, options)),
        ("ew_tensors", TENSOR_TOL, lambda: check_ew_tensors(ew, options)),
        ("chiral_transform", CHIRAL_TOL, lambda: check_chiral_transform(ew, options)),
    ]


def run_ew_suite(ew=None, options=V.VerifyOptions()):
    ew = ew or build_ew_model()
    return V.run_suite(ew.spec, options, extra_tasks=ew_tasks(ew, options))
