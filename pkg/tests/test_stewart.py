import numpy as np
import pytest

from stiffkit import (StewartParams, analytic_case_matrix, analytic_rank1_sum, assembly_stiffness,
                      build_case, build_leg_model, chain_stiffness, jacobians)
from stiffkit.errors import DegenerateGeometry, InputError
from stiffkit.linalg import numerical_rank, rel_fro
from stiffkit.parallel import aggregate, leg_stiffnesses
from stiffkit.stewart import LegGeometry, _check_distinct, leg_geometries, leg_wrench, universal_axes

PARAM_SETS = [(2.0, 1.0, 1.0), (3.0, 1.0, 1.5), (1.0, 0.4, 2.0), (5.0, 2.5, 0.7)]


def entrywise(A, B):
    return np.abs(A - B).max() / np.abs(B).max()


@pytest.mark.parametrize("field,value", [("R", 0.0), ("r", -1.0), ("h", np.nan), ("K11", np.inf)])
def test_params_validation(field, value):
    kw = dict(R=2.0, r=1.0, h=1.0, K11=1000.0)
    kw[field] = value
    with pytest.raises(InputError):
        StewartParams(**kw)
    with pytest.raises(InputError):
        StewartParams(2.0, 1.0, 1.0, 1000.0, "C")


def test_derived_quantities():
    a = StewartParams(2.0, 1.0, 1.0, 1000.0, "A")
    b = StewartParams(2.0, 1.0, 1.0, 1000.0, "B")
    assert a.d_a == 1.0 and b.d_b == 0.0
    assert a.leg_length == pytest.approx(np.sqrt(2.0), rel=1e-15)
    assert b.leg_length == pytest.approx(2.0, rel=1e-15)
    assert a.link_stiffness == 1e9
    assert a.effective_K11 == pytest.approx(1000.0 / (1 + 1e-6), rel=1e-15)


@pytest.mark.parametrize("case", ["A", "B"])
@pytest.mark.parametrize("R,r,h", PARAM_SETS)
def test_geometry_leg_lengths(case, R, r, h):
    p = StewartParams(R, r, h, 1000.0, case)
    for g in leg_geometries(p):
        assert g.length == pytest.approx(p.leg_length, rel=1e-14)
        np.testing.assert_allclose(g.platform_point - [0, 0, h], g.v, atol=1e-15)


def test_case_a_leg0_geometry():
    g = leg_geometries(StewartParams(2.0, 1.0, 1.0, 1000.0, "A"))[0]
    np.testing.assert_allclose(g.base_point, [2, 0, 0], atol=1e-15)
    np.testing.assert_allclose(g.platform_point, [1, 0, 1], atol=1e-15)
    np.testing.assert_allclose(g.u0, [-1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-15)


def test_duplicate_legs_rejected():
    g = LegGeometry(np.zeros(3), np.ones(3), np.ones(3) / np.sqrt(3), np.ones(3))
    with pytest.raises(DegenerateGeometry):
        _check_distinct([g, g])


def test_universal_axes_triad():
    for u in (np.array([0.0, 0, 1]), np.array([1.0, 2, 3]) / np.sqrt(14)):
        a1, a2 = universal_axes(u)
        np.testing.assert_allclose(np.column_stack([a1, a2, u]).T @ np.column_stack([a1, a2, u]),
                                   np.eye(3), atol=1e-15)
        assert np.linalg.det(np.column_stack([a1, a2, u])) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("case", ["A", "B"])
def test_leg_model_structure(case):
    p = StewartParams(3.0, 1.0, 1.5, 1000.0, case)
    g = leg_geometries(p)[1]
    chain = build_leg_model(g, p)
    assert chain.n_q == 5 and chain.n_theta == 7
    jp = jacobians(chain)
    assert numerical_rank(jp.J_theta) == 6 and numerical_rank(jp.J_q) == 5
    K = chain_stiffness(chain, "closed")
    assert K.rank == 1
    u = np.concatenate([g.u0, np.zeros(3)])
    np.testing.assert_allclose(K.K, p.effective_K11 * np.outer(u, u), atol=1e-9 * p.K11)


@pytest.mark.parametrize("k_link", [1e4, 1e6, 1e9])
def test_leg_series_stiffness(k_link):
    p = StewartParams(2.0, 1.0, 1.0, 1000.0, "A", k_link)
    g = leg_geometries(p)[0]
    K = chain_stiffness(build_leg_model(g, p), "dense")
    assert K.eigenvalues.max() == pytest.approx(1 / (1 / 1000.0 + 1 / k_link), rel=1e-9)


@pytest.mark.parametrize("case", ["A", "B"])
@pytest.mark.parametrize("R,r,h", PARAM_SETS)
def test_rank1_sum_equals_analytic_matrix(case, R, r, h):
    p = StewartParams(R, r, h, 1000.0, case)
    assert entrywise(analytic_rank1_sum(leg_geometries(p), 1000.0).K, analytic_case_matrix(p).K) <= 1e-12


def test_analytic_matrix_entries():
    a = analytic_case_matrix(StewartParams(2.0, 1.0, 1.0, 1000.0, "A")).K
    assert a[2, 2] == pytest.approx(3000.0, rel=1e-15)
    assert a[5, 5] == 0.0
    b = analytic_case_matrix(StewartParams(2.0, 1.0, 1.0, 1000.0, "B")).K
    assert b[5, 5] == pytest.approx(3 * 1000 / 4 * 1.5 * 1 * 4, rel=1e-15) == 4500.0
    assert b[0, 4] == 0.0  # d_b = 0 for R = 2r


def test_case_a_radial_matrix_has_rank_three():
    # all radial leg lines pass through one point of the z axis, so the
    # leg wrenches span only three dimensions
    p = StewartParams(2.0, 1.0, 1.0, 1000.0, "A")
    M = analytic_case_matrix(p)
    assert M.rank == 3
    np.testing.assert_allclose(M.K @ np.eye(6)[5], 0.0, atol=1e-12)
    apex = np.array([0.0, 0.0, p.R * p.h / p.d_a])
    for g in leg_geometries(p):
        along = np.cross(apex - g.base_point, g.u0)
        np.testing.assert_allclose(along, 0.0, atol=1e-12)


@pytest.mark.parametrize("case", ["A", "B"])
@pytest.mark.parametrize("R,r,h", PARAM_SETS)
def test_pipeline_matches_analytic_matrix(case, R, r, h):
    p = StewartParams(R, r, h, 1000.0, case)
    K = assembly_stiffness(build_case(p), "closed")
    assert entrywise(K.K, analytic_case_matrix(p, p.effective_K11).K) <= 1e-8
    assert entrywise(K.K, analytic_case_matrix(p).K) <= 1e-4
    assert K.rank == (3 if case == "A" else 6)


@pytest.mark.parametrize("case", ["A", "B"])
def test_actuator_only_legs_match_rank1_sum(case):
    p = StewartParams(3.0, 1.0, 1.5, 1000.0, case)
    asm = build_case(p, link_spring=False)
    K = aggregate(asm, leg_stiffnesses(asm, "dense"))
    assert rel_fro(K.K, analytic_rank1_sum(leg_geometries(p), p.K11).K) <= 1e-10


def test_leg_wrench_is_unit_line():
    for g in leg_geometries(StewartParams(3.0, 1.0, 1.5, 1000.0, "B")):
        w = leg_wrench(g)
        assert np.linalg.norm(w[:3]) == pytest.approx(1.0, rel=1e-15)
        assert w[:3] @ w[3:] == pytest.approx(0.0, abs=1e-14)
