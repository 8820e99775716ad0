import numpy as np
import pytest

from freep.constants import c_const, retraction_bounds
from freep.cubes import CubeComplex
from freep.freenorm import evaluate, p_cost, upper_bound_from
from freep.retraction import (
    SamplerConfig,
    build_context,
    estimate_lipschitz,
    lipschitz_upper_decomposition,
    lower_bound_witness,
    rescale_check,
    retract,
    translate_element,
    witness_sandwich,
)
from freep.freenorm import FreeElement
from freep.metric import lattice_l1_space

UNIT_SQUARE = CubeComplex(d=2, R=1.0, offsets=((0, 0),))
TWO_CUBES_1D = CubeComplex(d=1, R=1.0, offsets=((0,), (1,)))


def test_retract_at_vertices_is_unit_evaluation():
    ctx = build_context(UNIT_SQUARE, 0.5)
    for v in UNIT_SQUARE.vertices():
        m = retract(ctx, np.array(v, dtype=float))
        if v == UNIT_SQUARE.base_vertex:
            assert m.is_zero()
        else:
            assert m.weights == {ctx.vertex_index(v): 1.0}


def test_retract_examples():
    ctx1 = build_context(CubeComplex(d=1, R=1.0, offsets=((0,),)), 1.0)
    m = retract(ctx1, (0.3,))
    assert m.weights == pytest.approx({ctx1.vertex_index((1,)): 0.3})
    ctx2 = build_context(UNIT_SQUARE, 1.0)
    m2 = retract(ctx2, (0.5, 0.5))
    assert sorted(m2.weights.values()) == pytest.approx([0.25, 0.25, 0.25])


def test_translate_identity_and_covariance():
    ctx = build_context(TWO_CUBES_1D, 0.5)
    m = retract(ctx, (0.3,))
    assert translate_element(ctx, m, (0.0,)).max_weight_diff(m) == 0.0
    shifted = translate_element(ctx, m, (1.0,))
    assert shifted.max_weight_diff(retract(ctx, (1.3,))) <= 1e-12
    back = translate_element(ctx, retract(ctx, (1.3,)), (-1.0,))
    assert back.max_weight_diff(m) <= 1e-12


def test_translate_errors():
    ctx = build_context(TWO_CUBES_1D, 0.5)
    m = retract(ctx, (0.3,))
    with pytest.raises(ValueError, match="lattice"):
        translate_element(ctx, m, (0.5,))
    with pytest.raises(ValueError, match="missing"):
        translate_element(ctx, m, (2.0,))


def test_points_outside_the_union_raise():
    ctx = build_context(TWO_CUBES_1D, 0.5)
    with pytest.raises(ValueError, match="outside"):
        retract(ctx, (2.5,))
    with pytest.raises(ValueError, match="outside"):
        lipschitz_upper_decomposition(ctx, (0.5,), (-1.0,))


def test_rescale_check_examples():
    space = lattice_l1_space([(0,), (1,)], 1.0)
    m = FreeElement(space, {1: 1.0})
    lhs, rhs = rescale_check(m, 1.0, (0,), 0.5)
    assert lhs == pytest.approx(rhs, abs=1e-9) == pytest.approx(1.0)
    lhs, rhs = rescale_check(m, 2.0, (0,), 0.5)
    assert rhs == pytest.approx(2.0)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_rescale_check_random_d2():
    rng = np.random.default_rng(9)
    pts = [(0, 0), (1, 0), (0, 1), (2, 2)]
    space = lattice_l1_space(pts, 1.0)
    for _ in range(5):
        m = FreeElement(space, {i: float(rng.normal()) for i in (1, 2, 3)})
        lhs, rhs = rescale_check(m, 3.0, (1, -1), 0.5)
        assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, abs(rhs)))


def test_upper_decomposition_trivial_and_single_axis():
    ctx = build_context(CubeComplex(d=3, R=1.0, offsets=((0, 0, 0),)), 0.5)
    x = np.array([0.2, 0.7, 0.1])
    assert lipschitz_upper_decomposition(ctx, x, x).terms == ()
    y = x.copy()
    y[2] = 0.9
    dec = lipschitz_upper_decomposition(ctx, x, y)
    assert len(dec.terms) <= 2 ** (3 - 1)
    assert p_cost(dec, 0.5) <= c_const(0.5, 4) * abs(x[2] - y[2]) * (1 + 1e-12)
    m = retract(ctx, x) - retract(ctx, y)
    assert evaluate(dec).max_weight_diff(m) <= 1e-12


def test_upper_decomposition_cross_cube_band():
    complex = CubeComplex(d=2, R=1.0, offsets=((0, 0), (1, 0)))
    ctx = build_context(complex, 0.5)
    rng = np.random.default_rng(21)
    _, upper = retraction_bounds(0.5, 2)
    for _ in range(200):
        x = np.array([2 * rng.random(), rng.random()])
        y = np.array([2 * rng.random(), rng.random()])
        l1 = np.abs(x - y).sum()
        dec = lipschitz_upper_decomposition(ctx, x, y)
        assert p_cost(dec, 0.5) <= upper * l1 * (1 + 1e-9)
        m = retract(ctx, x) - retract(ctx, y)
        assert evaluate(dec).max_weight_diff(m) <= 1e-9


def test_witness_values_match_constant():
    for d in (1, 2, 3):
        for p in (1.0, 0.75, 0.5):
            lo, target, up = witness_sandwich(d, p)
            assert lo == pytest.approx(target, abs=1e-9)
            assert up == pytest.approx(target, abs=1e-9)


def test_witness_d3_norm_is_exact():
    res = lower_bound_witness(3, 0.5)
    upper = upper_bound_from(res.element, 0.5, res.upper_decomposition)
    assert res.certified_value == pytest.approx(4.0, abs=1e-9)
    assert upper == pytest.approx(4.0, abs=1e-9)
    # the sandwich pins the exact norm at C(1/2, 4) = 4
    assert res.certified_value <= upper + 1e-12


def test_witness_element_shape():
    res = lower_bound_witness(2, 0.5)
    ctx = res.context
    w = res.element.weights
    assert w[ctx.vertex_index((0, 1))] == pytest.approx(0.5)
    assert w[ctx.vertex_index((1, 1))] == pytest.approx(0.5)
    assert w[ctx.vertex_index((1, 0))] == pytest.approx(-0.5)
    assert ctx.vertex_index((0, 0)) not in w


def test_harness_d1_band_and_report():
    ctx = build_context(TWO_CUBES_1D, 0.5)
    report = estimate_lipschitz(ctx, SamplerConfig(n_samples=100, seed=4))
    assert report["theoretical_lower"] == 1.0
    assert report["theoretical_upper"] == pytest.approx(3.0)
    assert report["max_upper_cost_ratio"] <= 3.0 * (1 + 1e-9)
    assert 1.0 - 1e-9 <= report["max_lower_ratio"] <= 3.0 * (1 + 1e-9)
    assert report["witness_value"] == pytest.approx(1.0, abs=1e-9)
    assert report["max_reconstruction_residual"] <= 1e-9
    assert report["exact_norms_checked"] > 0


def test_harness_includes_witness_pair():
    ctx = build_context(UNIT_SQUARE, 0.5)
    report = estimate_lipschitz(ctx, SamplerConfig(n_samples=20, seed=0))
    assert report["max_lower_ratio"] >= c_const(0.5, 2) - 1e-9


def test_harness_p1_ratios_do_not_exceed_one():
    ctx = build_context(TWO_CUBES_1D, 1.0)
    report = estimate_lipschitz(ctx, SamplerConfig(n_samples=200, seed=8))
    assert report["max_upper_cost_ratio"] <= 1.0 + 1e-9
