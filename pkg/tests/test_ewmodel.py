from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaugekit import ewmodel as E, gauge as G, verify as V
from gaugekit.fieldcfg import ComponentField, random_field, sample_points

OPTS = V.VerifyOptions(points=32)


@pytest.fixture(scope="module")
def ew():
    return E.build_ew_model()


def constant(shape, values):
    return ComponentField(shape, np.zeros((1, 4)), np.asarray(values, dtype=float)[..., None], real=True)


@pytest.mark.parametrize("kw", [{"g": 0.0}, {"gp": -1.0}, {"upsilon": 0.0}, {"g": float("nan")}])
def test_build_rejects_bad_parameters(kw):
    with pytest.raises(E.EWError):
        E.build_ew_model(**kw)


def test_model_content(ew):
    assert ew.su2.dim == 3 and ew.u1.abelian
    assert ew.spec.field("L").chirality == "left" and ew.spec.field("e").chirality == "right"
    assert ew.higgs.charge == 1.0 and ew.higgs.vev == 1.0
    assert E.build_ew_model(hypercharges={"phi": 2}).higgs.charge == 2.0


def test_vev():
    assert np.array_equal(E.vev(1.0), [0, 1 / np.sqrt(2)])
    assert not np.any(E.vev(0.0))
    assert np.linalg.norm(E.vev(3.0)) == pytest.approx(3 / np.sqrt(2))
    with pytest.raises(E.EWError):
        E.vev(-1.0)


def test_higgs_at_zero_fluctuation_is_vev():
    p = E.HiggsParam(ComponentField.zeros((3,)), ComponentField.zeros(()), 2.0)
    pts = sample_points(0, 5)
    assert np.max(np.abs(E.higgs_from_param(p, pts) - E.vev(2.0))) == 0


def test_higgs_eta_only():
    eta = random_field(1, (), K=2)
    p = E.HiggsParam(ComponentField.zeros((3,)), eta, 1.0)
    pts = sample_points(1, 8)
    h = E.higgs_from_param(p, pts)
    assert np.max(np.abs(h[:, 0])) == 0
    assert np.max(np.abs(h[:, 1] - (1.0 + eta.eval(pts)) / np.sqrt(2))) < 1e-15


def test_higgs_norm_depends_only_on_eta():
    p = E.random_higgs_param(3, 1.5)
    pts = sample_points(2, 16)
    h = E.higgs_from_param(p, pts)
    expected = np.abs(1.5 + p.eta.eval(pts)) / np.sqrt(2)
    assert np.max(np.abs(np.linalg.norm(h, axis=1) - expected)) < 1e-13


def test_higgs_linearization(ew):
    r = E.check_higgs_linearization(ew, OPTS)
    assert r.passed, r.notes
    p = E.random_higgs_param(0)
    x = np.array([0.1, 0.2, 0.3, 0.4])
    assert E.higgs_linearized(p, x).shape == (2,)


def test_unbroken_constant_direction_fixes_vacuum(ew):
    x0 = np.zeros((1, 4))
    b = 0.7
    t = E.constant_transform(ew, [0, 0, ew.gp * b / ew.g, b])
    assert E.vacuum_displacement(ew, t, x0)[0] < 1e-12
    assert E.vacuum_displacement(ew, E.constant_transform(ew, [0.3, 0, 0, 0]), x0)[0] > 1e-2
    assert E.vacuum_displacement(ew, E.constant_transform(ew, [0, 0, 0, 0]), x0)[0] == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10))
def test_unbroken_line_property(b):
    ew = E.build_ew_model()
    t = E.constant_transform(ew, [0, 0, ew.gp * b / ew.g, b])
    assert E.vacuum_displacement(ew, t, np.zeros((1, 4)))[0] < 1e-12


def test_residual_symmetry_check(ew):
    r = E.residual_symmetry_check(ew, OPTS)
    assert r.passed and r.residual_max < 1e-12, r
    bad = E.build_ew_model(hypercharges={"phi": 2})
    assert not E.residual_symmetry_check(bad, OPTS).passed


def test_direction_scan(ew):
    fixed, others = E.direction_scan(ew, count=50, seed=1)
    assert fixed < 1e-12
    assert others.shape == (50,) and np.all(others > 1e-3)
    assert E.check_direction_scan(ew, OPTS).passed


def test_ew_tensors_zero_and_constant(ew):
    z = G.zero_config(ew.spec)
    a, b = E.ew_tensors_at(ew, z, 0, 1, np.zeros(4))
    assert not np.any(a) and not np.any(b)
    rng = np.random.default_rng(3)
    w = rng.normal(size=(3, 4))
    cfg = G.GaugeConfig(constant((3, 4), w), constant((1, 4), rng.normal(size=(1, 4))))
    a, b = E.ew_tensors_at(ew, cfg, 1, 2, np.zeros(4))
    t = ew.su2.generators
    w1 = -1j * np.tensordot(w[:, 1], t, axes=1)
    w2 = -1j * np.tensordot(w[:, 2], t, axes=1)
    assert np.max(np.abs(a - ew.g * (w1 @ w2 - w2 @ w1))) < 1e-15
    assert not np.any(b)


def test_ew_tensors_match_generic_field_strength(ew):
    assert E.check_ew_tensors(ew, OPTS).passed


def test_higgs_covariant_derivative_closed_form(ew):
    rng = np.random.default_rng(4)
    w, bb = rng.normal(size=(3, 4)), rng.normal(size=(1, 4))
    cfg = G.GaugeConfig(constant((3, 4), w), constant((1, 4), bb))
    phi = np.array([0.3 + 0.1j, -0.8 + 0.5j])
    field = ComponentField((2, 1), np.zeros((1, 4)), phi.reshape(2, 1, 1))
    t = ew.su2.generators
    y = ew.higgs.charge
    for mu in range(4):
        got = G.covariant_derivative_at(ew.spec, ew.higgs, field, cfg, mu, np.zeros(4))[:, 0]
        expected = (-1j * ew.g * np.tensordot(w[:, mu], t, axes=1) @ phi
                    - 1j * ew.gp * (y / 2) * bb[0, mu] * phi)
        assert np.max(np.abs(got - expected)) < 1e-15


def test_chiral_transform_matrix_basics(ew):
    m = E.chiral_transform_matrix(ew, np.zeros((2, 3)), np.zeros(2), -1.0)
    assert np.array_equal(m, np.broadcast_to(np.eye(8), (2, 8, 8)))
    rng = np.random.default_rng(5)
    alpha, beta = rng.normal(size=(4, 3)), rng.normal(size=4)
    m = E.chiral_transform_matrix(ew, alpha, beta, -1.0)
    assert np.max(np.abs(np.conj(np.swapaxes(m, 1, 2)) @ m - np.eye(8))) < 1e-13
    # right-handed components only see the hypercharge phase
    right = E.chiral_projector("right")
    pr = np.kron(right, np.eye(2))
    phase = np.exp(0.5j * beta)[:, None, None]
    assert np.max(np.abs(m @ pr - phase * pr)) < 1e-13


def test_chiral_transform_check(ew):
    assert E.check_chiral_transform(ew, OPTS).passed


def test_run_ew_suite(ew):
    rep = E.run_ew_suite(ew, OPTS)
    assert rep.ok, [c for c in rep.checks if not c.passed]
    names = {c.name for c in rep.checks}
    assert {"residual_symmetry", "symmetry_direction_scan", "higgs_linearization", "ew_tensors",
            "chiral_transform", "abelian_gauge_law"} <= names


def test_ew_suite_worker_independent(ew):
    a = E.run_ew_suite(ew, OPTS).to_dict()
    b = E.run_ew_suite(ew, replace(OPTS, workers=3)).to_dict()
    assert a == b
