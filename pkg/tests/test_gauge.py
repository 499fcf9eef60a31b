import numpy as np
import pytest

from gaugekit import gauge as G
from gaugekit.fieldcfg import ComponentField, random_field, sample_points
from gaugekit.liealg import su_basis, u1_basis

import helpers

PTS = sample_points(11, 24)


def su2_u1():
    return helpers.model("su2xu1")


def su2_su2():
    return helpers.model("su2xsu2")


def oracle_covariant(model, decl, field, config, mu, x):
    """D_mu from raw eval/partial calls, one point at a time."""
    out = np.array(field.partial(mu).eval(x), dtype=complex)
    psi = np.asarray(field.eval(x), dtype=complex)
    for s, w in (("U", config.WU), ("V", config.WV)):
        gens = model.matter_generators(decl, s)
        if gens is None:
            continue
        comps = w.eval(x)
        mat = sum(-1j * gens[a] * comps[a, mu] for a in range(gens.shape[0]))
        g = model.basis(s).coupling
        out = out + g * (mat @ psi if s == "U" else psi @ mat)
    return out


def constant_config(model, wu, wv):
    z = np.zeros((1, 4))
    return G.GaugeConfig(ComponentField(np.shape(wu), z, np.asarray(wu)[..., None], real=True),
                         ComponentField(np.shape(wv), z, np.asarray(wv)[..., None], real=True))


# ------------------------------------------------------------------ Dirac

def test_dirac_algebra_invariants():
    assert max(G.dirac_residuals().values()) < 1e-13


def test_chiral_projectors():
    pl, pr = G.chiral_projector("left"), G.chiral_projector("right")
    assert np.allclose(pl @ pl, pl, atol=1e-15)
    assert np.allclose(pl + pr, np.eye(4), atol=1e-15)
    assert np.allclose(pl @ pr, 0, atol=1e-15)
    with pytest.raises(ValueError):
        G.chiral_projector("up")


# ------------------------------------------------------------------ model

@pytest.mark.parametrize("decl", [
    G.FieldDecl("a", "fermion", "adjoint"),
    G.FieldDecl("a", "vector", "singlet"),
    G.FieldDecl("a", "scalar", "singlet", chirality="left"),
    G.FieldDecl("a", "fermion", "singlet", vev=1.0),
    G.FieldDecl("a", "fermion", "fundamental_V"),  # U(1) sector without a charge
])
def test_model_validation_rejects(decl):
    m = G.ModelSpec("m", su_basis(2), G.make_basis("U1", 1, 0.3), (decl,))
    with pytest.raises(G.ModelError):
        m.validate()


def test_model_validation_duplicate_names():
    d = G.FieldDecl("a", "scalar", "singlet")
    with pytest.raises(G.ModelError):
        G.ModelSpec("m", su_basis(2), su_basis(2), (d, d)).validate()


def test_field_shapes():
    m = su2_u1()
    assert m.field_shape(m.field("L")) == (4, 2, 1)
    assert m.field_shape(m.field("R")) == (4, 1, 1)
    assert m.field_shape(m.field("h")) == (2, 1)


# ------------------------------------------------------------------ potentials

def test_w_matrix_zero_and_single_component():
    m = su2_su2()
    assert not np.any(G.w_matrix_at(m, G.zero_config(m), "U", 1, PTS))
    wu = np.zeros((3, 4))
    wu[2, 1] = 0.7
    cfg = constant_config(m, wu, np.zeros((3, 4)))
    sigma3 = np.diag([1.0, -1.0])
    assert np.max(np.abs(G.w_matrix_at(m, cfg, "U", 1, PTS[0]) + 1j * 0.7 * sigma3 / 2)) < 1e-15


def test_w_matrix_antihermitian():
    m = helpers.model("su3xsu2")
    cfg = G.random_config(m, 4)
    for s in "UV":
        for mu in range(4):
            w = G.w_matrix_at(m, cfg, s, mu, PTS)
            assert np.max(np.abs(w + np.conj(np.swapaxes(w, -1, -2)))) < 1e-12


# ------------------------------------------------------------------ covariant derivative

def test_covariant_derivative_zero_config_is_partial():
    m = su2_su2()
    d = m.field("Psi")
    f = G.random_matter(m, d, 3)
    for mu in range(4):
        assert np.max(np.abs(G.covariant_derivative_at(m, d, f, G.zero_config(m), mu, PTS)
                             - f.partial(mu).eval(PTS))) < 1e-13


def test_covariant_derivative_abelian_phase():
    g1, y, c = 0.35, -2.0, 0.8 - 0.3j
    m = G.ModelSpec("m", su_basis(2, 0.6), G.make_basis("U1", 1, g1),
                    (G.FieldDecl("r", "scalar", "fundamental_V", charge=y),)).validate()
    b = np.array([[0.2, -0.4, 0.9, 1.3]])
    cfg = constant_config(m, np.zeros((3, 4)), b)
    phi = ComponentField((1, 1), np.zeros((1, 4)), np.array([[[c]]]))
    for mu in range(4):
        got = G.covariant_derivative_at(m, m.fields[0], phi, cfg, mu, PTS[0])
        assert got[0, 0] == pytest.approx(-1j * g1 * (y / 2) * b[0, mu] * c, abs=1e-15)


@pytest.mark.parametrize("name", ["su2xu1", "su3xsu2", "su2xsu2"])
def test_covariant_derivative_dual_path(name):
    m = helpers.model(name)
    cfg = G.random_config(m, 2)
    fields = G.random_fields(m, 3)
    for d in m.fields:
        for mu in range(4):
            fast = G.covariant_derivative_at(m, d, fields[d.name], cfg, mu, PTS[:6])
            for p in range(6):
                slow = oracle_covariant(m, d, fields[d.name], cfg, mu, PTS[p])
                assert np.max(np.abs(fast[p] - slow)) < 1e-12


def test_coupling_scaling_leaves_covariant_derivative_unchanged():
    lam = 2.5
    m = su2_su2()
    m2 = G.ModelSpec(m.name, su_basis(2, m.basis_U.coupling * lam), su_basis(2, m.basis_V.coupling * lam), m.fields)
    cfg = G.random_config(m, 6)
    cfg2 = G.GaugeConfig(cfg.WU.scaled(1 / lam), cfg.WV.scaled(1 / lam))
    d = m.field("Psi")
    f = G.random_matter(m, d, 7)
    for mu in range(4):
        a = G.covariant_derivative_at(m, d, f, cfg, mu, PTS)
        b = G.covariant_derivative_at(m2, d, f, cfg2, mu, PTS)
        assert np.max(np.abs(a - b)) < 1e-12


# ------------------------------------------------------------------ transforms

def test_unitary_at_cases():
    b = su_basis(3)
    assert np.max(np.abs(G.unitary_at(b, ComponentField.zeros((8,)), PTS) - np.eye(3))) == 0
    const = random_field(1, (8,), K=0)
    u = G.unitary_at(b, const, PTS)
    assert np.max(np.abs(u - u[0])) == 0
    cos_x1 = ComponentField((1,), [[0, 1, 0, 0], [0, -1, 0, 0]], [[0.5, 0.5]], real=True)
    v = G.unitary_at(u1_basis(1, 1.0), cos_x1, PTS)
    assert np.max(np.abs(v[:, 0, 0] - np.exp(0.5j * np.cos(PTS[:, 1])))) < 1e-15
    with pytest.raises(G.ModelError):
        G.unitary_at(b, ComponentField.zeros((3,)), PTS)


def test_transform_identity_leaves_field():
    m = su2_su2()
    d = m.field("Psi")
    f = G.random_matter(m, d, 1)
    moved = G.transform_fermion(m, d, f, G.identity_transform(m))
    assert np.max(np.abs(moved.eval(PTS) - f.eval(PTS))) < 1e-13


def test_constant_transform_preserves_norm():
    m = helpers.model("su3xsu2")
    d = m.field("Psi")
    f = G.random_matter(m, d, 1)
    moved = G.transform_fermion(m, d, f, G.random_transform(m, 5, constant=True)).eval(PTS)
    orig = f.eval(PTS)
    for s in range(4):
        n0 = np.linalg.norm(orig[:, s], axis=(-2, -1))
        n1 = np.linalg.norm(moved[:, s], axis=(-2, -1))
        assert np.max(np.abs(n0 - n1)) < 1e-12


def test_transform_then_inverse_returns_original():
    m = su2_u1()
    t = G.random_transform(m, 8)
    for d in m.fields:
        f = G.random_matter(m, d, 2)
        there = G.transform_matter(m, d, f, t)
        back = G.transform_matter(m, d, there, t.scaled(-1.0))
        assert np.max(np.abs(back.eval(PTS) - f.eval(PTS))) < 1e-11


def test_transform_gauge_identity_and_global():
    m = su2_su2()
    cfg = G.random_config(m, 3)
    ident = G.transform_config(m, cfg, G.identity_transform(m))
    for a, b in zip(ident.jets(PTS, 1), cfg.jets(PTS, 1)):
        assert np.max(np.abs(a.val - b.val)) < 1e-14
        assert np.max(np.abs(a.parts[1] - b.parts[1])) < 1e-14
    t = G.random_transform(m, 4, constant=True)
    u = G.unitary_at(m.basis_U, t.alpha, PTS)
    v = G.unitary_at(m.basis_V, t.beta, PTS)
    tu, tv = G.transform_gauge_U(m, cfg, t), G.transform_gauge_V(m, cfg, t)
    for mu in range(4):
        wu = G.w_matrix_at(m, cfg, "U", mu, PTS)
        wv = G.w_matrix_at(m, cfg, "V", mu, PTS)
        dag = lambda x: np.conj(np.swapaxes(x, -1, -2))  # noqa: E731
        assert np.max(np.abs(tu.matrix_at("U", mu, PTS) - u @ wu @ dag(u))) < 1e-12
        assert np.max(np.abs(tv.matrix_at("V", mu, PTS) - dag(v) @ wv @ v)) < 1e-12
        assert np.max(np.abs(tu.matrix_at("V", mu, PTS) - wv)) < 1e-15


def test_transformed_potentials_antihermitian():
    m = helpers.model("su3xsu2")
    tc = G.transform_config(m, G.random_config(m, 1), G.random_transform(m, 2))
    for s in "UV":
        for mu in range(4):
            w = tc.matrix_at(s, mu, PTS)
            assert np.max(np.abs(w + np.conj(np.swapaxes(w, -1, -2)))) < 1e-10


def test_abelian_potential_law():
    m = su2_u1()
    cfg = G.random_config(m, 1)
    t = G.random_transform(m, 2, convention="ew")
    comps = G.transform_gauge_V(m, cfg, t).jets(PTS, 0)[1].val  # (P, 4, 1)
    dbeta = np.stack([t.beta.partial(mu).eval(PTS) for mu in range(4)], axis=1)
    expected = np.moveaxis(cfg.WV.eval(PTS), 1, 2) - dbeta / m.basis_V.coupling
    assert np.max(np.abs(comps - expected)) < 1e-12


def test_pure_gauge_is_flat():
    for m in helpers.all_models():
        comps = G.transform_config(m, G.zero_config(m), G.random_transform(m, 9)).jets(PTS, 1)
        for s in "UV":
            assert np.max(np.abs(G.sector_strength(m, comps, s))) < 1e-9


# ------------------------------------------------------------------ field strength

def test_field_strength_structure():
    m = helpers.model("su3xsu2")
    cfg = G.random_config(m, 5)
    for s in "UV":
        for mu in range(4):
            assert not np.any(G.field_strength_at(m, cfg, s, mu, mu, PTS))
            for nu in range(4):
                f = G.field_strength_at(m, cfg, s, mu, nu, PTS)
                assert np.array_equal(f, -G.field_strength_at(m, cfg, s, nu, mu, PTS))
                assert np.max(np.abs(f + np.conj(np.swapaxes(f, -1, -2)))) < 1e-11


def test_field_strength_constant_potential_is_commutator():
    m = su2_su2()
    rng = np.random.default_rng(0)
    cfg = constant_config(m, rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
    for s, sign in (("U", 1.0), ("V", G.commutator_sign(m, "V"))):
        g = m.basis(s).coupling
        w = [G.w_matrix_at(m, cfg, s, mu, PTS[0]) for mu in range(4)]
        f = G.field_strength_at(m, cfg, s, 1, 2, PTS[0])
        assert np.max(np.abs(f - sign * g * (w[1] @ w[2] - w[2] @ w[1]))) < 1e-15


def test_adopted_signs():
    fit = G.adjudicate_signs()
    assert fit["U"] == 1.0 and fit["V"] == -1.0
    assert abs(fit["fit"][0] - 1) < 1e-10 and abs(fit["fit"][1] + 1) < 1e-10
    m = G.ModelSpec("m", su_basis(2), su_basis(2), (), v_commutator_sign=1.0)
    assert G.commutator_sign(m, "V") == 1.0


# ------------------------------------------------------------------ Lagrangians

def sin_x0_config(m):
    c = np.zeros((1, 4, 2), dtype=complex)
    c[0, 1] = [-0.5j, 0.5j]  # B_1 = sin x0
    wv = ComponentField((1, 4), [[1, 0, 0, 0], [-1, 0, 0, 0]], c, real=True)
    return G.GaugeConfig(ComponentField.zeros((m.basis_U.dim, 4)), wv)


def test_gauge_lagrangian_abelian_closed_form():
    m = su2_u1()
    cfg = sin_x0_config(m)
    for x0 in (0.0, 0.4, 2.0):
        x = np.array([x0, 0.3, 0.1, 0.7])
        assert G.lagrangian_gauge_at(m, cfg, "V", x) == pytest.approx(-np.cos(x0) ** 2, abs=1e-14)
        assert G.lagrangian_gauge_trace_ff_at(m, cfg, "V", x) == pytest.approx(np.cos(x0) ** 2, abs=1e-14)
        assert G.lagrangian_gauge_at(m, cfg, "U", x) == 0.0


def test_lagrangians_vanish_for_zero_and_constant_fields():
    m = su2_su2()
    z = G.zero_config(m)
    psi, phi = m.field("Psi"), m.field("phi")
    zero_f = ComponentField.zeros(m.field_shape(psi), real=False)
    assert G.lagrangian_fermion_at(m, psi, zero_f, G.random_config(m, 1), PTS[0]) == 0
    const = ComponentField(m.field_shape(psi), np.zeros((1, 4)), np.ones(m.field_shape(psi) + (1,)))
    assert G.lagrangian_fermion_at(m, psi, const, z, PTS[0]) == 0
    const_s = ComponentField((2, 2), np.zeros((1, 4)), np.ones((2, 2, 1)))
    assert G.lagrangian_scalar_at(m, phi, const_s, z, PTS[0]) == 0
    assert G.lagrangian_gauge_at(m, z, "U", PTS[0]) == 0
    fields = {d.name: ComponentField.zeros(m.field_shape(d), real=False) for d in m.fields}
    assert G.lagrangian_total_at(m, fields, z, PTS[0]) == 0
    with pytest.raises(G.ModelError):
        G.lagrangian_fermion_at(m, phi, const_s, z, PTS[0])
    with pytest.raises(G.ModelError):
        G.lagrangian_scalar_at(m, psi, const, z, PTS[0])


def test_total_is_sum_of_terms_and_real_parts():
    m = helpers.model("su3xsu2")
    cfg = G.random_config(m, 2)
    fields = G.random_fields(m, 3)
    total = G.lagrangian_total_at(m, fields, cfg, PTS)
    parts = sum(G.lagrangian_fermion_at(m, d, fields[d.name], cfg, PTS) for d in m.fermions())
    parts = parts + sum(G.lagrangian_scalar_at(m, d, fields[d.name], cfg, PTS) for d in m.scalars())
    parts = parts - G.lagrangian_gauge_at(m, cfg, "U", PTS) - G.lagrangian_gauge_at(m, cfg, "V", PTS)
    assert np.max(np.abs(total - parts)) < 1e-11 * (1 + np.max(np.abs(total)))
    comps = cfg.jets(PTS, 1)
    for d in m.scalars():
        dens = G.scalar_density(m, d, fields[d.name].jet(PTS, 1), comps)
        assert np.max(np.abs(dens.imag)) < 1e-11
    for s in "UV":
        assert np.max(np.abs(G.gauge_density(m, comps, s).imag)) < 1e-11


def test_total_lagrangian_invariant_under_local_transform():
    m = helpers.model("su3xsu2")
    cfg = G.random_config(m, 2)
    fields = G.random_fields(m, 3)
    t = G.random_transform(m, 4)
    before = G.lagrangian_total_at(m, fields, cfg, PTS)
    moved = {d.name: G.transform_matter(m, d, fields[d.name], t) for d in m.fields}
    after = G.lagrangian_total_at(m, moved, G.transform_config(m, cfg, t), PTS)
    assert np.max(np.abs(after - before) / (1 + np.abs(before))) < 1e-8
