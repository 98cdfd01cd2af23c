"""Feature families, discriminator heads, analytic gradients, constraint
projections, and the smoothing CDFs."""

import math

import numpy as np
import pytest

from robustgan.core import derive_seed, rng_from_seed, sigmoid
from robustgan.discriminator import (
    LOG_SIGMOID2_CDF,
    SIGMOID2_CDF,
    SIGMOID_CDF,
    STEP_CDF,
    FeatureFamily,
    OneLayerParams,
    SmoothingCdf,
    SmoothingKind,
    TwoLayerParams,
    discrete_smoothing,
    feature_values,
    g1_eval,
    g2_eval,
    grad_inputs,
    grad_params,
    head_values,
    project_constraints,
    project_l1_ball,
    project_l2_ball,
    two_layer_preactivation,
)

HEADS = ("g1", "g2", "log_g2", "log_1m_g2")
SIG1 = sigmoid(1.0)


# ---------------------------------------------------------------------------
# features and heads
# ---------------------------------------------------------------------------


def test_feature_values_hand_cases():
    x = np.array([[3.0, 4.0]])
    p_mean = OneLayerParams(np.array([1.0, 2.0]), 0.5)
    np.testing.assert_allclose(feature_values(p_mean, FeatureFamily.MEAN, x), [11.0])
    np.testing.assert_allclose(feature_values(p_mean, FeatureFamily.SECOND_MOMENT, x), [121.0])
    p_reg = OneLayerParams(np.array([[1.0, 0.0], [0.0, 1.0]]), -1.0)
    x2 = np.array([[1.0, 2.0]])
    y2 = np.array([3.0])
    # residuals 2 and 1: feature = 4 - 1 = 3
    np.testing.assert_allclose(feature_values(p_reg, FeatureFamily.REGRESSION, x2, y2), [3.0])
    with pytest.raises(ValueError):
        feature_values(p_reg, FeatureFamily.REGRESSION, x2)


def test_g1_matches_sigmoid_of_feature():
    rng = rng_from_seed(1)
    x = rng.standard_normal((7, 3))
    p = OneLayerParams(rng.standard_normal(3), 0.7)
    np.testing.assert_allclose(
        g1_eval(p, FeatureFamily.MEAN, x), sigmoid(x @ p.v + 0.7), atol=1e-15
    )


def test_two_layer_ranges():
    rng = rng_from_seed(2)
    x = rng.standard_normal((50, 3)) * 4.0
    units = [OneLayerParams(rng.standard_normal(3), float(rng.normal())) for _ in range(4)]
    w = rng.standard_normal(4)
    params = project_constraints(TwoLayerParams(w, units), FeatureFamily.MEAN)
    s = two_layer_preactivation(params, FeatureFamily.MEAN, x)
    assert np.all(np.abs(s) <= np.abs(params.w).sum() + 1e-12)
    g2 = g2_eval(params, FeatureFamily.MEAN, x)
    assert np.all(g2 >= sigmoid(-1.0) - 1e-12) and np.all(g2 <= SIG1 + 1e-12)
    # nonnegative outer weights tighten the range to [1/2, sigmoid(1)]
    pos = TwoLayerParams(np.abs(params.w), [u.copy() for u in units])
    g2p = g2_eval(pos, FeatureFamily.MEAN, x)
    assert np.all(g2p >= 0.5 - 1e-12) and np.all(g2p <= SIG1 + 1e-12)


def test_head_values_consistency_and_types():
    rng = rng_from_seed(3)
    x = rng.standard_normal((9, 2))
    one = OneLayerParams(rng.standard_normal(2), 0.1)
    two = TwoLayerParams(rng.standard_normal(3) / 3.0, [one.copy() for _ in range(3)])
    np.testing.assert_allclose(
        head_values(two, FeatureFamily.MEAN, x, "log_g2"),
        np.log(head_values(two, FeatureFamily.MEAN, x, "g2")),
        atol=1e-12,
    )
    np.testing.assert_allclose(
        head_values(two, FeatureFamily.MEAN, x, "log_1m_g2"),
        np.log1p(-head_values(two, FeatureFamily.MEAN, x, "g2")),
        atol=1e-12,
    )
    with pytest.raises(TypeError):
        head_values(two, FeatureFamily.MEAN, x, "g1")
    with pytest.raises(TypeError):
        head_values(one, FeatureFamily.MEAN, x, "g2")
    with pytest.raises(ValueError):
        head_values(two, FeatureFamily.MEAN, x, "g5")


# ---------------------------------------------------------------------------
# gradients vs central finite differences
# ---------------------------------------------------------------------------


def _random_unit(rng, family, d):
    vshape = (2, d) if family is FeatureFamily.REGRESSION else (d,)
    v = rng.standard_normal(vshape)
    v = v / max(1.0, float(np.linalg.norm(v.ravel())))
    return OneLayerParams(v=v, t=float(rng.normal()))


def _random_disc(rng, family, which, d):
    if which == "g1":
        return _random_unit(rng, family, d)
    width = int(rng.integers(1, 5))
    w = rng.standard_normal(width) / max(1, width)
    return TwoLayerParams(w=w, units=[_random_unit(rng, family, d) for _ in range(width)])


def _fd_params(params, family, x, weights, which, y, step=1e-5):
    def value(flat):
        return float(np.dot(weights, head_values(params.with_flat(flat), family, x, which, y=y)))

    flat0 = params.flat()
    grad = np.empty_like(flat0)
    for i in range(flat0.size):
        h = step * max(1.0, abs(flat0[i]))
        up = flat0.copy()
        up[i] += h
        dn = flat0.copy()
        dn[i] -= h
        grad[i] = (value(up) - value(dn)) / (2.0 * h)
    return grad


def _rel_err(analytic, fd):
    return float(np.max(np.abs(analytic - fd))) / max(1.0, float(np.max(np.abs(fd))))


@pytest.mark.parametrize("family", list(FeatureFamily))
@pytest.mark.parametrize("which", HEADS)
def test_grad_params_matches_finite_differences(family, which):
    for i in range(5):
        rng = rng_from_seed(derive_seed("unit-grad", family.value, which, i))
        d = int(rng.integers(1, 5))
        n = int(rng.integers(5, 25))
        x = rng.standard_normal((n, d))
        y = rng.standard_normal(n) if family is FeatureFamily.REGRESSION else None
        weights = rng.choice([-1.0, 1.0], size=n) / n
        params = _random_disc(rng, family, which, d)
        analytic = grad_params(params, family, x, weights, which, y=y).flat()
        assert _rel_err(analytic, _fd_params(params, family, x, weights, which, y)) <= 1e-5


@pytest.mark.parametrize("family", list(FeatureFamily))
@pytest.mark.parametrize("which", ("g1", "g2"))
def test_grad_inputs_matches_finite_differences(family, which):
    rng = rng_from_seed(derive_seed("unit-grad-inputs", family.value, which))
    d, n = 3, 6
    x = rng.standard_normal((n, d))
    y = rng.standard_normal(n) if family is FeatureFamily.REGRESSION else None
    params = _random_disc(rng, family, which, d)

    def total(xm, ym):
        return float(np.sum(head_values(params, family, xm, which, y=ym)))

    gx, gy = grad_inputs(params, family, x, which, y)
    h = 1e-6
    for i in range(n):
        for j in range(d):
            up = x.copy()
            up[i, j] += h
            dn = x.copy()
            dn[i, j] -= h
            fd = (total(up, y) - total(dn, y)) / (2.0 * h)
            assert abs(gx[i, j] - fd) <= 1e-6 * max(1.0, abs(fd))
    if family is FeatureFamily.REGRESSION:
        for i in range(n):
            up = y.copy()
            up[i] += h
            dn = y.copy()
            dn[i] -= h
            fd = (total(x, up) - total(x, dn)) / (2.0 * h)
            assert abs(gy[i] - fd) <= 1e-6 * max(1.0, abs(fd))
    else:
        assert gy is None


def test_grad_params_validation():
    rng = rng_from_seed(5)
    x = rng.standard_normal((4, 2))
    one = OneLayerParams(rng.standard_normal(2), 0.0)
    with pytest.raises(ValueError):
        grad_params(one, FeatureFamily.MEAN, x, np.ones(3), "g1")
    with pytest.raises(TypeError):
        grad_params(one, FeatureFamily.MEAN, x, np.ones(4), "g2")


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def test_project_l2_ball():
    v = np.array([0.3, -0.4])
    np.testing.assert_array_equal(project_l2_ball(v), v)  # interior no-op
    w = np.array([3.0, 4.0])
    p = project_l2_ball(w)
    assert abs(np.linalg.norm(p) - 1.0) <= 1e-15 and np.linalg.norm(p) <= 1.0
    np.testing.assert_allclose(p, w / 5.0, atol=1e-12)
    np.testing.assert_array_equal(project_l2_ball(p), p)  # idempotent


def test_project_l1_ball_hand_case():
    np.testing.assert_allclose(project_l1_ball(np.array([3.0, 1.0])), [1.0, 0.0], atol=1e-12)
    inside = np.array([0.2, -0.3])
    np.testing.assert_array_equal(project_l1_ball(inside), inside)


def test_project_l1_ball_variational_inequality():
    # p is the projection iff (w - p) . (z - p) <= 0 for every z in the ball
    rng = rng_from_seed(6)
    for _ in range(20):
        w = rng.standard_normal(5) * 3.0
        p = project_l1_ball(w)
        assert np.abs(p).sum() <= 1.0 + 1e-12
        np.testing.assert_array_equal(project_l1_ball(p), p)
        for _ in range(40):
            z = rng.dirichlet(np.ones(5)) * rng.choice([-1.0, 1.0], size=5) * rng.uniform()
            assert float((w - p) @ (z - p)) <= 1e-9


def test_project_constraints_per_family():
    rng = rng_from_seed(7)
    big = OneLayerParams(rng.standard_normal(3) * 10.0, 2.0)
    out = project_constraints(big, FeatureFamily.MEAN)
    assert np.linalg.norm(out.v) <= 1.0 and out.t == 2.0  # offsets unconstrained
    reg = OneLayerParams(rng.standard_normal((2, 3)) * 100.0, 0.0)
    out = project_constraints(reg, FeatureFamily.REGRESSION, v_bound=5.0)
    assert np.linalg.norm(out.v[0]) <= 5.0 + 1e-12 and np.linalg.norm(out.v[1]) <= 5.0 + 1e-12
    two = TwoLayerParams(rng.standard_normal(4) * 3.0, [big.copy() for _ in range(4)])
    out = project_constraints(two, FeatureFamily.MEAN)
    assert np.abs(out.w).sum() <= 1.0 + 1e-12
    assert all(np.linalg.norm(u.v) <= 1.0 + 1e-12 for u in out.units)


# ---------------------------------------------------------------------------
# smoothing CDFs
# ---------------------------------------------------------------------------


def test_t_values_hand_points():
    assert SIGMOID_CDF.t_values(0.0) == 0.5
    assert abs(SIGMOID2_CDF.t_values(0.0) - sigmoid(0.5)) < 1e-15
    assert abs(LOG_SIGMOID2_CDF.t_values(0.0) - math.log(sigmoid(0.5))) < 1e-15
    np.testing.assert_array_equal(STEP_CDF.t_values(np.array([-1.0, 0.0, 2.0])), [0.0, 1.0, 1.0])


def test_affine_rescale_gives_cdf_endpoints():
    for cdf in (SIGMOID_CDF, SIGMOID2_CDF, LOG_SIGMOID2_CDF):
        assert abs(float(cdf.cdf(-60.0))) < 1e-10
        assert abs(float(cdf.cdf(60.0)) - 1.0) < 1e-10
        grid = np.linspace(-60, 60, 5001)
        assert np.all(np.diff(cdf.cdf(grid)) >= -1e-12)


def test_tail_scales():
    assert SIGMOID_CDF.c_z == 1.0
    assert SIGMOID2_CDF.c_z == 10.0
    assert LOG_SIGMOID2_CDF.c_z == 10.0
    assert STEP_CDF.c_z == 0.0


def test_tail_bound_dominates_actual_tails():
    ts = np.linspace(0.0, 40.0, 81)
    for cdf in (SIGMOID_CDF, SIGMOID2_CDF, LOG_SIGMOID2_CDF):
        for t in ts:
            actual = max(float(cdf.survival(t)), float(cdf.cdf(-t)))
            assert actual <= cdf.tail_bound(float(t)) + 1e-12
    assert STEP_CDF.tail_bound(0.0) == 1.0 and STEP_CDF.tail_bound(0.5) == 0.0
    with pytest.raises(ValueError):
        SIGMOID_CDF.tail_bound(-1.0)


def test_quantile_inverts_cdf():
    for cdf in (SIGMOID_CDF, SIGMOID2_CDF, LOG_SIGMOID2_CDF):
        for u in (0.01, 0.2, 0.5, 0.8, 0.99):
            assert abs(float(cdf.cdf(cdf.quantile(u))) - u) < 1e-10
    assert STEP_CDF.quantile(0.3) == 0.0
    with pytest.raises(ValueError):
        SIGMOID_CDF.quantile(1.0)


def test_z_mean_logistic_is_zero():
    assert abs(SIGMOID_CDF.z_mean()) < 1e-9
    assert STEP_CDF.z_mean() == 0.0


def test_z_mean_matches_trapezoid_integration():
    # E[Z] = int_0^inf S(x) dx - int_{-inf}^0 F(x) dx, on a certified-tail grid
    for cdf in (SIGMOID2_CDF, LOG_SIGMOID2_CDF):
        up = np.linspace(0.0, 120.0, 240001)
        dn = np.linspace(-120.0, 0.0, 240001)
        ref = float(np.trapezoid(cdf.survival(up), up) - np.trapezoid(cdf.cdf(dn), dn))
        assert abs(cdf.z_mean() - ref) < 1e-6


def test_rho_z_logistic_closed_form():
    # deleting the bottom eps of a logistic: mean shift H(eps) / (1 - eps)
    # with H the natural-log binary entropy, by integrating the logit quantile
    for eps in (0.05, 0.1, 0.3):
        h = -(eps * math.log(eps) + (1 - eps) * math.log(1 - eps))
        assert abs(SIGMOID_CDF.rho_z(eps) - h / (1 - eps)) < 1e-7


def test_rho_z_edge_cases_and_monotonicity():
    assert SIGMOID_CDF.rho_z(0.0) == 0.0
    assert STEP_CDF.rho_z(0.3) == 0.0
    vals = [SIGMOID2_CDF.rho_z(e) for e in (0.05, 0.1, 0.2, 0.4)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        SIGMOID_CDF.rho_z(1.0)


def test_discrete_smoothing_hand_case():
    z = discrete_smoothing([1.0, -1.0], [0.5, 0.5])
    assert z.z_atoms == (-1.0, 1.0)  # stored sorted
    assert z.z_mean() == 0.0
    # delete bottom 1/4: kept mass (-1: 1/4, +1: 1/2), mean 1/3
    assert abs(z.rho_z(0.25) - 1.0 / 3.0) < 1e-12
    assert z.tail_bound(1.0) == 0.5 and z.tail_bound(1.5) == 0.0
    np.testing.assert_allclose(z.cdf(np.array([-2.0, -1.0, 0.0, 1.0])), [0.0, 0.5, 0.5, 1.0])
    assert z.quantile(0.25) == -1.0 and z.quantile(0.75) == 1.0
    with pytest.raises(ValueError):
        discrete_smoothing([0.0, 1.0], [0.7, 0.7])


def test_smoothing_cdf_kind_enum_round_trip():
    for kind in SmoothingKind:
        if kind is SmoothingKind.DISCRETE:
            continue
        cdf = SmoothingCdf(kind)
        assert cdf.kind is kind
