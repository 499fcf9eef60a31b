"""Randomized identity checks and the verification report."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import gauge as G
from .fieldcfg import sample_points
from .liealg import basis_residuals, structure_constants

CHECK_NAMES = (
    "global_invariance",
    "local_invariance",
    "covariant_transform",
    "second_derivative",
    "commutator_identity",
    "infinitesimal_gauge_law",
)

# Step sizes of the order-of-convergence test and the accepted ratio band.
EPS_LADDER = (0.02, 0.01, 0.005)
RATIO_TARGET = 4.0
RATIO_HALF_WIDTH = 1.0


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = 42
    points: int = 128
    modes: int = 2
    amplitude: float = 0.5
    tol: float = 1e-8
    workers: int = 1
    fd_crosscheck: bool = False
    corrupt: frozenset = frozenset()
    transform_scale: float = 1.0

    def is_corrupt(self, name):
        return name in self.corrupt


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual_max: float | None
    residual_mean: float | None
    tolerance: float
    passed: bool
    points: int
    notes: str = ""

    @classmethod
    def from_residuals(cls, name, residuals, tolerance, points, notes=""):
        r = np.asarray(residuals, dtype=float).ravel()
        rmax, rmean = float(np.max(r)), float(np.mean(r))
        return cls(name, rmax, min(rmean, rmax), float(tolerance), bool(rmax <= tolerance), int(points), notes)

    @classmethod
    def errored(cls, name, tolerance, exc):
        return cls(name, None, None, float(tolerance), False, 0, f"error: {type(exc).__name__}: {exc}")

    def to_dict(self):
        return {
            "name": self.name,
            "residual_max": self.residual_max,
            "residual_mean": self.residual_mean,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "points": self.points,
            "notes": self.notes,
        }


@dataclass
class VerificationReport:
    model_name: str
    seed: int
    points: int
    mode_cutoff: int
    amplitude: float
    checks: list = field(default_factory=list)
    sign_ledger: dict = field(default_factory=dict)
    engine_version: str = __version__

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "model": self.model_name,
            "seed": self.seed,
            "points": self.points,
            "modes": self.mode_cutoff,
            "amplitude": self.amplitude,
            "engine_version": self.engine_version,
            "sign_ledger": dict(self.sign_ledger),
            "checks": [c.to_dict() for c in self.checks],
        }


def sign_ledger(model=None):
    fit = G.adjudicate_signs()
    v_sign = G.commutator_sign(model, "V") if model is not None else fit["V"]
    return {
        "v_sector_commutator_sign": v_sign,
        "v_sector_commutator_oracle": fit["V"],
        "u_sector_commutator_sign": G.U_COMMUTATOR_SIGN,
        "gauge_trace_form": "total density uses 1/2 Tr[F^dagger F]; 1/2 Tr[F F] available separately",
        "metric_signature": "(+,-,-,-)",
        "gamma_basis": "dirac: g0=diag(I,-I), gi=[[0,s_i],[-s_i,0]], g5=i g0 g1 g2 g3",
        "covariant_derivative": "D = d + g_U W^U (left) + g_V W^V (right), W = -i T_a W_a",
        "transform_exponent": "suite: U=exp(+i g alpha.T); gauge-law checks: exp(-i alpha.T)",
        "generator_normalization": "Tr(T_a T_b) = delta_ab/2",
        "u1_normalization": "potential uses unit generator; matter couples through charge/2",
    }


# ------------------------------------------------------------- scenario

def _rel(a, b):
    return np.abs(a - b) / (1.0 + np.abs(b))


def _embed(u, ndim):
    """Reshape (P, d, d) group elements to broadcast against a (P, ..., n, m) array."""
    return u.reshape((u.shape[0],) + (1,) * (ndim - 3) + u.shape[1:])


class Scenario:
    """Fields, potentials and sample points shared by the checks of one run."""

    def __init__(self, model, options, fields=None, config=None):
        self.model = model.validate()
        self.options = options
        o = options
        self.points = sample_points([o.seed, 0], o.points)
        self.config = config if config is not None else G.random_config(model, [o.seed, 1], o.modes, o.amplitude)
        self.fields = fields if fields is not None else G.random_fields(model, [o.seed, 2], o.modes, o.amplitude)

        self._transforms = {}

    def _transform(self, tag, convention, constant):
        key = (tag, convention, constant)
        if key not in self._transforms:
            o = self.options
            self._transforms[key] = G.random_transform(
                self.model, [o.seed, tag], o.modes, o.amplitude * o.transform_scale,
                constant=constant, convention=convention)
        return self._transforms[key]

    def local_transform(self, tag=3, convention="coupled"):
        return self._transform(tag, convention, False)

    def constant_transform(self):
        return self._transform(4, "coupled", True)

    def matter_jets(self, transform=None, order=1):
        out = {}
        for d in self.model.fields:
            f = self.fields[d.name]
            if transform is not None:
                f = G.transform_matter(self.model, d, f, transform)
            out[d.name] = f.jet(self.points, order)
        return out

    def unitaries(self, transform, decl):
        out = []
        for s in "UV":
            gens = self.model.matter_generators(decl, s)
            if gens is None:
                out.append(None)
            else:
                out.append(transform.unitary_jet(self.model, s, gens, self.points, 0).val)
        return out


def _sandwich(u, x, v):
    if u is not None:
        x = _embed(u, x.ndim) @ x
    if v is not None:
        x = x @ _embed(v, x.ndim)
    return x


# ------------------------------------------------------------- checks

def _invariance(sc, transform, tol, name, corrupt_mode=None):
    model, pts = sc.model, sc.points
    comps = sc.config.jets(pts, 1)
    base = sc.matter_jets(None)
    lag = G.total_density(model, base, comps)
    tc = G.transform_config(model, sc.config, transform)
    comps_t = tc.jets(pts, 1)
    moved = base if corrupt_mode == "gauge_only" else sc.matter_jets(transform)
    if corrupt_mode == "bar_untransformed":
        lag_t = 0.0
        for d in model.fields:
            if d.kind == "fermion":
                lag_t = lag_t + G.fermion_density(model, d, moved[d.name], comps_t, psibar_source=base[d.name].val)
            else:
                orig = G.covariant_jet(model, d, base[d.name], comps).val
                lag_t = lag_t + G.scalar_density(model, d, moved[d.name], comps_t, conj_source=orig)
        for s in "UV":
            lag_t = lag_t - G.gauge_density(model, comps_t, s)
    else:
        lag_t = G.total_density(model, moved, comps_t)
    res = _rel(lag_t, lag)
    note = f"abs_max={float(np.max(np.abs(lag_t - lag))):.3e} |L|_max={float(np.max(np.abs(lag))):.3e}"
    return CheckResult.from_residuals(name, res, tol, len(pts), note)


def check_global_invariance(model, fields, config, options, transform=None, scenario=None):
    """Total kinetic density under a spacetime-constant transformation."""
    sc = scenario or Scenario(model, options, fields, config)
    t = transform if transform is not None else sc.constant_transform()
    mode = "bar_untransformed" if options.is_corrupt("global_invariance") else None
    return _invariance(sc, t, options.tol, "global_invariance", mode)


def check_local_invariance(model, fields, config, options, transform=None, scenario=None):
    """Total kinetic density under a simultaneous local transformation of matter and both sectors."""
    sc = scenario or Scenario(model, options, fields, config)
    t = transform if transform is not None else sc.local_transform()
    mode = "gauge_only" if options.is_corrupt("local_invariance") else None
    return _invariance(sc, t, options.tol, "local_invariance", mode)


COVARIANT_TOL = 1e-9
SECOND_TOL = 1e-8
COMMUTATOR_TOL = 1e-9
FLATNESS_TOL = 1e-9
ALGEBRA_TOL = 1e-11
ABELIAN_LAW_TOL = 1e-12
FD_TOL = 1e-7


def check_covariant_transform(model, fields, config, options, transform=None, scenario=None):
    """max |D'_mu Psi' - U (D_mu Psi) V| over points, mu and all matter fields."""
    sc = scenario or Scenario(model, options, fields, config)
    t = transform if transform is not None else sc.local_transform()
    pts = sc.points
    comps = sc.config.jets(pts, 0)
    comps_t = G.transform_config(model, sc.config, t).jets(pts, 0)
    if options.is_corrupt("covariant_transform"):
        comps_t = comps
    res = [np.zeros(len(pts))]
    for d in model.fields:
        f = sc.fields[d.name]
        lhs = G.covariant_jet(model, d, G.transform_matter(model, d, f, t).jet(pts, 1), comps_t).val
        u, v = sc.unitaries(t, d)
        rhs = _sandwich(u, G.covariant_jet(model, d, f.jet(pts, 1), comps).val, v)
        res.append(np.abs(lhs - rhs).reshape(len(pts), -1).max(axis=1))
    return CheckResult.from_residuals("covariant_transform", np.max(res, axis=0), COVARIANT_TOL, len(pts))


def check_second_derivative(model, fields, config, options, transform=None, scenario=None):
    """max |D'_nu D'_mu Psi' - U D_nu D_mu Psi V|."""
    sc = scenario or Scenario(model, options, fields, config)
    t = transform if transform is not None else sc.local_transform()
    pts = sc.points
    comps = sc.config.jets(pts, 1)
    comps_t = G.transform_config(model, sc.config, t).jets(pts, 1)
    if options.is_corrupt("second_derivative"):
        comps_t = comps
    res = [np.zeros(len(pts))]
    for d in model.fields:
        f = sc.fields[d.name]
        moved = G.transform_matter(model, d, f, t).jet(pts, 2)
        lhs = G.covariant_jet(model, d, G.covariant_jet(model, d, moved, comps_t), comps_t).val
        dd = G.covariant_jet(model, d, G.covariant_jet(model, d, f.jet(pts, 2), comps), comps).val
        u, v = sc.unitaries(t, d)
        res.append(np.abs(lhs - _sandwich(u, dd, v)).reshape(len(pts), -1).max(axis=1))
    return CheckResult.from_residuals("second_derivative", np.max(res, axis=0), SECOND_TOL, len(pts))


def check_commutator_identity(model, fields, config, options, scenario=None):
    """[D_mu, D_nu] phi = g_U F^U phi + g_V phi F^V, evaluated with both V-sector signs.

    The adopted sign's residual decides pass/fail; the rejected sign's
    residual is recorded in the notes as the adjudication record.
    """
    sc = scenario or Scenario(model, options, fields, config)
    su, sv = G.commutator_sign(model, "U"), G.commutator_sign(model, "V")
    adopted = (0.0, 0.0) if options.is_corrupt("commutator_identity") else (su, sv)
    rejected = (su, -sv)
    ra, rr = commutator_residual_pair(sc, adopted, rejected)
    pts = sc.points
    fit = G.adjudicate_signs()
    notes = (f"adopted V sign {adopted[1]:+g}: max {float(ra.max()):.3e}; "
             f"rejected V sign {rejected[1]:+g}: max {float(rr.max()):.3e}; "
             f"oracle fit U {fit['fit'][0]:+.6f} V {fit['fit'][1]:+.6f}")
    return CheckResult.from_residuals("commutator_identity", ra, COMMUTATOR_TOL, len(pts), notes)


def commutator_residual_pair(sc, adopted, rejected):
    """Per-point max residuals of the commutator identity under two sign choices."""
    pts = sc.points
    comps = sc.config.jets(pts, 1)
    res_a, res_r = [np.zeros(len(pts))], [np.zeros(len(pts))]
    for d in sc.model.fields:
        phi = sc.fields[d.name].jet(pts, 2)
        for signs, acc in ((adopted, res_a), (rejected, res_r)):
            r = G.commutator_residuals(sc.model, d, phi, comps, signs)
            acc.append(np.abs(r).reshape(len(pts), -1).max(axis=1))
    return np.max(res_a, axis=0), np.max(res_r, axis=0)


def linearized_potential(model, config, transform, sector, points, flip=False):
    """First-order transformed potential in matrix form (ew exponent convention).

    U sector: W T - (1/g) (d alpha.T - i g [T_b, T_c] W_b alpha_c).
    A right-acting sector gets the opposite commutator sign.
    """
    gens = model.gauge_generators(sector)
    g = model.basis(sector).coupling
    k = 0 if sector == "U" else 1
    w = config.jets(points, 0)[k].val  # (P, 4, a)
    p = transform.params(sector).jet(points, 1)
    dp = np.moveaxis(p.parts[1], 0, 1)  # (P, 4, a)
    comm = np.einsum("bij,cjk->bcik", gens, gens) - np.einsum("cij,bjk->bcik", gens, gens)
    s = 1.0 if sector == "U" else -1.0
    if flip:
        s = -s
    lin = (np.tensordot(w, gens, axes=([-1], [0])) - np.tensordot(dp, gens, axes=([-1], [0])) / g
           + s * 1j * np.einsum("pmb,pc,bcij->pmij", w, p.val, comm))
    return -1j * lin


def infinitesimal_residual(model, config, transform, sector, eps, points, flip=False):
    t = transform.scaled(eps)
    finite = G.TransformedConfig(model, config, t).sector_matrix_jet(sector, points, 0).val
    lin = linearized_potential(model, config, t, sector, points, flip)
    return float(np.max(np.abs(finite - lin)))


def check_infinitesimal_gauge_law(model, config, options, scenario=None):
    """Order-of-convergence test of the linearized gauge law in every non-abelian sector.

    Halving eps must divide the finite-minus-linearized residual by about 4.
    The residual reported is max |ratio - 4|, so the tolerance 1 encodes the
    band [3, 5].
    """
    sc = scenario or Scenario(model, options, None, config)
    t = sc.local_transform(tag=5, convention="ew")
    flip = options.is_corrupt("infinitesimal_gauge_law")
    devs, parts = [], []
    for s in "UV":
        if model.basis(s).abelian:
            continue
        r = [infinitesimal_residual(model, sc.config, t, s, e, sc.points, flip) for e in EPS_LADDER]
        ratios = [a / b for a, b in zip(r, r[1:])]
        devs += [abs(q - RATIO_TARGET) for q in ratios]
        parts.append(f"{s}: ratios " + ", ".join(f"{q:.4f}" for q in ratios))
    if not devs:
        devs = [0.0]
        parts.append("no non-abelian sector")
    return CheckResult.from_residuals("infinitesimal_gauge_law", devs, RATIO_HALF_WIDTH,
                                      len(sc.points), "; ".join(parts))


def check_abelian_gauge_law(model, config, options, scenario=None):
    """U(1) potentials: finite transformation equals B - (1/g') d beta exactly."""
    sc = scenario or Scenario(model, options, None, config)
    t = sc.local_transform(tag=5, convention="ew")
    tc = G.TransformedConfig(model, sc.config, t)
    comps_t = tc.jets(sc.points, 0)
    comps = sc.config.jets(sc.points, 0)
    res = [np.zeros(len(sc.points))]
    for k, s in enumerate("UV"):
        b = model.basis(s)
        if not b.abelian:
            continue
        dbeta = np.moveaxis(t.params(s).jet(sc.points, 1).parts[1], 0, 1)  # (P, 4, 1)
        expected = comps[k].val - dbeta / b.coupling
        res.append(np.abs(comps_t[k].val - expected).reshape(len(sc.points), -1).max(axis=1))
    return CheckResult.from_residuals("abelian_gauge_law", np.max(res, axis=0), ABELIAN_LAW_TOL, len(sc.points))


def check_pure_gauge_flatness(model, options, scenario=None):
    """Field strengths of the transformed zero potential, both sectors."""
    sc = scenario or Scenario(model, options)
    t = sc.local_transform()
    comps = G.transform_config(model, G.zero_config(model), t).jets(sc.points, 1)
    res = [np.abs(G.sector_strength(model, comps, s)).reshape(len(sc.points), -1).max(axis=1) for s in "UV"]
    return CheckResult.from_residuals("pure_gauge_flatness", np.max(res, axis=0), FLATNESS_TOL, len(sc.points))


def check_algebra(basis, name):
    r = basis_residuals(basis)
    worst = max(r.values())
    notes = " ".join(f"{k}={v:.2e}" for k, v in sorted(r.items()))
    return CheckResult.from_residuals(name, [worst], ALGEBRA_TOL, 0, notes)


def check_dirac():
    r = G.dirac_residuals()
    notes = " ".join(f"{k}={v:.2e}" for k, v in sorted(r.items()))
    return CheckResult.from_residuals("dirac_algebra", [max(r.values())], 1e-13, 0, notes)


def check_fd_crosscheck(model, options, scenario=None, h=1e-6):
    """Analytic d_mu U against central finite differences (step h)."""
    sc = scenario or Scenario(model, options)
    t = sc.local_transform()
    gens = model.gauge_generators("U")
    jet = t.unitary_jet(model, "U", gens, sc.points, 1)
    res = []
    for mu in range(4):
        step = np.zeros(4)
        step[mu] = h
        up = t.unitary_jet(model, "U", gens, sc.points + step, 0).val
        dn = t.unitary_jet(model, "U", gens, sc.points - step, 0).val
        res.append(np.abs((up - dn) / (2 * h) - jet.parts[1][mu]).reshape(len(sc.points), -1).max(axis=1))
    return CheckResult.from_residuals("fd_crosscheck", np.max(res, axis=0), FD_TOL, len(sc.points))


# ------------------------------------------------------------- suite

def _guard(name, tol, fn):
    try:
        return fn()
    except Exception as exc:  # noqa: BLE001 - one failing construction must not abort the suite
        return CheckResult.errored(name, tol, exc)


def suite_tasks(model, options):
    """(name, tolerance, thunk) for every check the suite runs, in report order."""
    state = {}

    def scenario():
        if "sc" not in state:
            state["sc"] = Scenario(model, options)
        return state["sc"]

    tasks = [
        (f"algebra_U[{model.basis_U.label()}]", ALGEBRA_TOL, lambda: check_algebra(model.basis_U, f"algebra_U[{model.basis_U.label()}]")),
        (f"algebra_V[{model.basis_V.label()}]", ALGEBRA_TOL, lambda: check_algebra(model.basis_V, f"algebra_V[{model.basis_V.label()}]")),
        ("dirac_algebra", 1e-13, check_dirac),
        ("global_invariance", options.tol,
         lambda: check_global_invariance(model, None, None, options, scenario=scenario())),
        ("local_invariance", options.tol,
         lambda: check_local_invariance(model, None, None, options, scenario=scenario())),
        ("covariant_transform", COVARIANT_TOL,
         lambda: check_covariant_transform(model, None, None, options, scenario=scenario())),
        ("second_derivative", SECOND_TOL,
         lambda: check_second_derivative(model, None, None, options, scenario=scenario())),
        ("commutator_identity", COMMUTATOR_TOL,
         lambda: check_commutator_identity(model, None, None, options, scenario=scenario())),
        ("infinitesimal_gauge_law", RATIO_HALF_WIDTH,
         lambda: check_infinitesimal_gauge_law(model, None, options, scenario=scenario())),
        ("pure_gauge_flatness", FLATNESS_TOL, lambda: check_pure_gauge_flatness(model, options, scenario=scenario())),
    ]
    if model.basis_U.abelian or model.basis_V.abelian:
        tasks.append(("abelian_gauge_law", ABELIAN_LAW_TOL,
                      lambda: check_abelian_gauge_law(model, None, options, scenario=scenario())))
    if options.fd_crosscheck:
        tasks.append(("fd_crosscheck", FD_TOL, lambda: check_fd_crosscheck(model, options, scenario=scenario())))
    return tasks, scenario


def run_tasks(tasks, workers=1):
    if workers <= 1:
        return [_guard(n, tol, fn) for n, tol, fn in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_guard, n, tol, fn) for n, tol, fn in tasks]
        return [f.result() for f in futures]


def run_suite(model, options=VerifyOptions(), extra_tasks=()):
    """Run every check on one seeded random configuration of ``model``."""
    tasks, scenario = suite_tasks(model, options)
    # build the shared scenario up front so worker threads never race on it
    try:
        scenario()
    except Exception:  # noqa: BLE001 - surfaced by each dependent check
        pass
    checks = run_tasks(list(tasks) + list(extra_tasks), options.workers)
    try:
        ledger = sign_ledger(model)
    except Exception as exc:  # noqa: BLE001
        ledger = {"error": str(exc)}
    return VerificationReport(model.name, options.seed, options.points, options.modes,
                              options.amplitude, checks, ledger)


def structure_constants_epsilon_residual(basis):
    """SU(2): max |f_abc - epsilon_abc|."""
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c], eps[b, a, c] = 1.0, -1.0
    return float(np.max(np.abs(structure_constants(basis).f - eps)))


def amplitude_scan(model, options, check, factors=(1.0, 0.5)):
    """Residual maxima of ``check`` with the transformation amplitude scaled by each factor."""
    out = []
    for f in factors:
        o = replace(options, transform_scale=options.transform_scale * f)
        out.append(check(model, None, None, o).residual_max)
    return out
