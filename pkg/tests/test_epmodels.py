import json
import math

import numpy as np
import pytest
from scipy.special import erf

from gradcat.criteria import blows_up
from gradcat.dynamics import integrate_derivatives, integrate_extended_oracle
from gradcat.epmodels import (
    MARGIN,
    EPModel,
    asymptotic_report,
    field_from_density,
    model_matrix,
    printed_region_blows_up,
    sample_region,
    smooth_region_predicate,
)
from gradcat.errors import InvalidInputError, NotApplicableError, UnsupportedSpecialization

CASE1, CASE2, CASE3, CASE4 = EPModel(1, 0), EPModel(-1, 0), EPModel(1, 1), EPModel(-1, 1)


def test_model_matrix_examples():
    assert model_matrix(CASE1).to_list() == [[0.0, 1.0], [0.0, 0.0]]
    assert model_matrix(CASE4).to_list() == [[0.0, -1.0], [1.0, 0.0]]
    assert model_matrix(EPModel(1, 1, 2.0)).to_list() == [[-2.0, 1.0], [1.0, 0.0]]
    assert [m.case for m in (CASE1, CASE2, CASE3, CASE4)] == [1, 2, 3, 4]


@pytest.mark.parametrize("k,N,gamma", [(0, 0, 0), (2, 1, 0), (1, 2, 0), (1, 0, -1.0), (1, 0, math.nan)])
def test_model_validation(k, N, gamma):
    with pytest.raises(InvalidInputError):
        EPModel(k, N, gamma)


def test_field_trivial_profiles():
    x = np.linspace(-2, 3, 11)
    assert np.array_equal(field_from_density(x, np.ones_like(x), 1, 0.7), np.full_like(x, 0.7))
    assert np.allclose(field_from_density(x, np.zeros_like(x), 1, 0.7), 0.7 + (x - x[0]), atol=1e-14)


def test_field_second_order():
    # n0 = exp(-x^2), E0 = anchor + (x - x0) - sqrt(pi)/2 (erf(x) - erf(x0))
    errs = []
    for n in (101, 201, 401, 801):
        x = np.linspace(-4, 4, n)
        exact = 0.25 + (x - x[0]) - math.sqrt(math.pi) / 2 * (erf(x) - erf(x[0]))
        errs.append(np.max(np.abs(field_from_density(x, np.exp(-x * x), 1, 0.25) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)
    h = 8 / 800
    x = np.linspace(-4, 4, 801)
    E = field_from_density(x, np.exp(-x * x), 1, 0.0)
    mid = 0.5 * (x[1:] + x[:-1])
    assert np.max(np.abs(np.diff(E) / h - (1 - np.exp(-mid * mid)))) < h * h


def test_field_errors():
    with pytest.raises(InvalidInputError):
        field_from_density([0.0, 0.1, 0.3], [1, 1, 1], 1, 0.0)
    with pytest.raises(InvalidInputError):
        field_from_density([0.0], [1.0], 1, 0.0)
    with pytest.raises(InvalidInputError):
        field_from_density([0.0, 1.0], [1.0, 1.0], 2, 0.0)
    with pytest.raises(InvalidInputError):
        field_from_density([0.0, 1.0], [1.0, math.inf], 1, 0.0)


def test_predicate_examples():
    assert smooth_region_predicate(CASE4, (0, 0.4))
    assert smooth_region_predicate(CASE1, (0, 1))
    assert not smooth_region_predicate(CASE1, (0, -1))
    assert not smooth_region_predicate(CASE2, (-1, -0.4))
    with pytest.raises(UnsupportedSpecialization):
        smooth_region_predicate(EPModel(1, 0, 0.5), (0, 1))


@pytest.mark.parametrize("model", [CASE1, CASE2, CASE3, CASE4])
def test_predicate_is_negated_dispatcher(model):
    rng = np.random.default_rng(model.case)
    for v0 in rng.uniform(-4, 4, (2000, 2)):
        assert smooth_region_predicate(model, v0) == (not blows_up(model_matrix(model), v0).blows_up)


def test_printed_region_margin_and_case3():
    assert printed_region_blows_up(CASE3, (1, 1)) is None
    assert printed_region_blows_up(CASE4, (0.0, 0.5)) is None
    assert printed_region_blows_up(CASE4, (0.0, 0.5 + 10 * MARGIN)) is True
    assert printed_region_blows_up(CASE4, (0.0, 0.5 - 10 * MARGIN)) is False


def test_case4_grid_matches_parabola():
    grid = sample_region(CASE4, (-2, 2), (-2, 2), 101, 101)
    assert grid.verdicts.shape == (101, 101)
    for v1, v2, hit, _t in grid.rows():
        gap = v1 * v1 - (1 - 2 * v2)
        if abs(gap) > 1e-9:
            assert hit == (gap > 0)


def test_case1_smooth_set():
    grid = sample_region(CASE1, (-3, 3), (-3, 3), 61, 61)
    for v1, v2, hit, _t in grid.rows():
        smooth = (v2 > 0 and (v1 >= 0 or v1 * v1 < 2 * v2)) or (v2 == 0 and v1 >= 0)
        assert (not hit) == smooth


def test_grid_validation_and_determinism():
    with pytest.raises(InvalidInputError):
        sample_region(CASE4, (-1, 1), (-1, 1), 1, 5)
    with pytest.raises(InvalidInputError):
        sample_region(CASE4, (1, -1), (-1, 1), 5, 5)
    a = sample_region(CASE3, (-2, 2), (-2, 2), 15, 11, want_times=True)
    b = sample_region(model_matrix(CASE3), (-2, 2), (-2, 2), 15, 11, want_times=True, workers=3)
    assert a.to_csv() == b.to_csv() and a.to_json() == b.to_json()
    assert a.verdicts.shape == a.t_stars.shape == (11, 15)
    assert np.array_equal(np.isfinite(a.t_stars), a.verdicts)


def test_grid_serialization():
    g = sample_region(CASE1, (-1, 1), (-1, 1), 3, 2, want_times=True)
    lines = g.to_csv().split("\n")
    assert lines[0] == "v1,v2,blows_up,t_star" and lines[-1] == ""
    assert "\r" not in g.to_csv()
    assert len(lines) == 2 + 3 * 2
    assert lines[1].startswith("-1,-1,1,")
    doc = json.loads(g.to_json())
    assert doc["nx"] == 3 and len(doc["nodes"]) == 6
    assert doc["nodes"][0]["v2"] == -1.0 and doc["nodes"][3]["v2"] == 1.0


def test_asymptotic_case1():
    v0 = (0.5, 0.2)
    assert asymptotic_report(CASE1, v0) == "stabilizes-to-zero"
    # v1 decays like 2/t for this case, so the norm is checked against that rate
    far = integrate_derivatives(model_matrix(CASE1), v0, [50.0, 400.0])
    assert np.linalg.norm(far[0]) <= 3 / 50
    assert np.linalg.norm(far[1]) < 1e-2


def test_asymptotic_case3():
    v0 = (1.5, 0.8)
    assert asymptotic_report(CASE3, v0) == "stabilizes-to-affine"
    v = integrate_derivatives(model_matrix(CASE3), v0, [30.0])[-1]
    assert np.max(np.abs(v - 1.0)) < 1e-3


def test_asymptotic_case4():
    v0 = (0.2, 0.3)
    assert asymptotic_report(CASE4, v0, V0=(0.1, 0.0)) == "periodic"
    v = integrate_derivatives(model_matrix(CASE4), v0, [2 * math.pi])[-1]
    assert np.max(np.abs(v - v0)) < 1e-6
    assert integrate_extended_oracle(model_matrix(CASE4), v0).blew_up is False


def test_asymptotic_errors():
    with pytest.raises(NotApplicableError):
        asymptotic_report(CASE1, (0, -1))
    with pytest.raises(UnsupportedSpecialization):
        asymptotic_report(EPModel(1, 0, 1.0), (0, 1))
    with pytest.raises(InvalidInputError):
        asymptotic_report(CASE1, (0, 1), V0=(math.nan, 0))
