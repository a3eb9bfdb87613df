import numpy as np
import pytest

from algsense import (
    ImplicitPlaneCurve,
    curve_points_at_x1,
    evaluate,
    make_circle,
    make_cubic,
    make_low_rank,
    make_parabola,
    make_parabola_implicit,
    make_veronese_model,
    numerical_rank,
    random_point,
)
from algsense.errors import DimensionMismatchError

from oracles import finite_difference_jacobian


def all_parametric_varieties():
    return [
        make_parabola(),
        make_low_rank(2, 2, 1),
        make_low_rank(2, 2, 2),
        make_low_rank(5, 6, 2),
        make_veronese_model(2, 2, "full"),
        make_veronese_model(2, 2, "sparse", support=[(0, 0), (2, 0), (0, 2)]),
        make_veronese_model(2, 2, "waring", rank=1),
        make_veronese_model(1, 3, "waring", rank=2),
    ]


class TestLowRank:
    def test_dimension_formula(self):
        v = make_low_rank(2, 2, 1)
        assert (v.intrinsic_dim, v.ambient_dim, v.param_dim, v.gauge_dim) == (3, 4, 4, 1)
        assert make_low_rank(5, 6, 2).intrinsic_dim == 18
        full = make_low_rank(2, 2, 2)
        assert full.intrinsic_dim == full.ambient_dim == 4

    def test_rejects_excess_rank(self):
        with pytest.raises(ValueError):
            make_low_rank(2, 3, 3)

    def test_outer_product_evaluation(self):
        v = make_low_rank(2, 2, 1)
        np.testing.assert_allclose(evaluate(v, [1, 1, 1, 1]), [1, 1, 1, 1])
        # U=(1,2), W=(3,1) -> [[3,1],[6,2]]
        np.testing.assert_allclose(evaluate(v, [1, 2, 3, 1]), [3, 1, 6, 2])

    def test_random_point_has_numerical_rank_one(self):
        v = make_low_rank(2, 2, 1)
        _, x = random_point(v, np.random.default_rng(3))
        s = np.linalg.svd(x.reshape(2, 2), compute_uv=False)
        assert s[1] <= 1e-10 * s[0]

    def test_gauge_invariance(self):
        d1, d2, k = 3, 4, 2
        v = make_low_rank(d1, d2, k)
        rng = np.random.default_rng(4)
        U = rng.standard_normal((d1, k))
        W = rng.standard_normal((d2, k))
        G = rng.standard_normal((k, k)) + 2 * np.eye(k)
        theta = np.concatenate([U.ravel(), W.ravel()])
        theta_g = np.concatenate([(U @ G).ravel(), (W @ np.linalg.inv(G).T).ravel()])
        a = evaluate(v, theta)
        b = evaluate(v, theta_g)
        assert np.linalg.norm(a - b) <= 1e-12 * (1 + np.linalg.norm(a))


class TestParabola:
    def test_eval(self):
        v = make_parabola()
        np.testing.assert_allclose(evaluate(v, [1.0]), [1, 1])
        np.testing.assert_allclose(evaluate(v, [-2.0]), [-2, 4])
        np.testing.assert_allclose(evaluate(v, [0.0]), [0, 0])

    def test_jac_column(self):
        np.testing.assert_allclose(make_parabola().jac([3.0]).ravel(), [1, 6])


class TestVeronese:
    def test_full_space_dims(self):
        assert make_veronese_model(2, 2, "full").ambient_dim == 6
        assert make_veronese_model(1, 3, "full").ambient_dim == 4

    def test_waring_rank_one_intrinsic_dim(self):
        assert make_veronese_model(2, 2, "waring", rank=1).intrinsic_dim == 3

    def test_waring_evaluation_expands_power(self):
        # c * (a0 + a1 t)^3 for d=1, m=3
        v = make_veronese_model(1, 3, "waring", rank=1)
        coeffs = evaluate(v, [2.0, 1.0, 0.5])  # 2 (1 + 0.5 t)^3
        np.testing.assert_allclose(coeffs, [2.0, 3.0, 1.5, 0.25])

    def test_sparse_embeds_support(self):
        v = make_veronese_model(2, 2, "sparse", support=[(0, 0), (1, 1)])
        x = evaluate(v, [5.0, -3.0])
        np.testing.assert_allclose(x, [5.0, 0, 0, 0, -3.0, 0])

    def test_rejections(self):
        with pytest.raises(ValueError):
            make_veronese_model(2, 2, "sparse", support=[])
        with pytest.raises(ValueError):
            make_veronese_model(2, 2, "sparse", support=[(3, 0)])
        with pytest.raises(ValueError):
            make_veronese_model(2, 2, "waring", rank=7)
        with pytest.raises(ValueError):
            make_veronese_model(2, 2, "spiral")


class TestSharedInvariants:
    @pytest.mark.parametrize("variety", all_parametric_varieties(),
                             ids=lambda v: v.name)
    def test_jacobian_rank_equals_intrinsic_dim(self, variety):
        rng = np.random.default_rng(5)
        for _ in range(20):
            theta = rng.standard_normal(variety.param_dim)
            assert numerical_rank(variety.jac(theta)) == variety.intrinsic_dim

    @pytest.mark.parametrize("variety", all_parametric_varieties(),
                             ids=lambda v: v.name)
    def test_jacobian_matches_finite_differences(self, variety):
        rng = np.random.default_rng(6)
        for _ in range(20):
            theta = rng.standard_normal(variety.param_dim)
            jac = variety.jac(theta)
            fd = finite_difference_jacobian(variety.eval, theta)
            assert np.max(np.abs(jac - fd)) <= 1e-6 * (1 + np.linalg.norm(jac))

    @pytest.mark.parametrize("variety", all_parametric_varieties(),
                             ids=lambda v: v.name)
    def test_dimension_bookkeeping(self, variety):
        assert variety.intrinsic_dim + variety.gauge_dim == variety.param_dim

    def test_random_point_determinism(self):
        v = make_parabola()
        t1, x1 = random_point(v, np.random.default_rng(42))
        t2, x2 = random_point(v, np.random.default_rng(42))
        np.testing.assert_array_equal(t1, t2)
        np.testing.assert_array_equal(x1, x2)
        t3, _ = random_point(v, np.random.default_rng(43))
        assert not np.array_equal(t1, t3)

    def test_evaluate_rejects_bad_length(self):
        with pytest.raises(DimensionMismatchError):
            evaluate(make_parabola(), [1.0, 2.0])


class TestImplicitCurves:
    def test_cubic_interpolates_axis_points(self):
        cubic = make_cubic(2.0)
        assert cubic(0.0, 0.0) == 0.0
        assert cubic(2.0, 0.0) == 0.0
        assert cubic(1.0, 0.0) == 0.0
        # direct polynomial evaluation: 1 - 3*2*1
        assert cubic(3.0, 1.0) == pytest.approx(-5.0)

    def test_cubic_rejects_degenerate_lambda(self):
        with pytest.raises(ValueError):
            make_cubic(0.0)
        with pytest.raises(ValueError):
            make_cubic(1.0)

    def test_degree_matches_homogenization(self):
        for curve in (make_cubic(2.0), make_circle(), make_parabola_implicit()):
            hom = curve.homogenization
            total = max(a + b + c for a, b, c in zip(*np.nonzero(hom)))
            assert total == curve.degree
            # dehomogenize at x0=1 and compare with the affine table
            np.testing.assert_allclose(hom.sum(axis=0), curve.coeffs)

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            ImplicitPlaneCurve(np.zeros((3, 3)))

    @pytest.mark.parametrize("curve", [make_cubic(2.0), make_circle(),
                                       make_parabola_implicit()],
                             ids=lambda c: c.name)
    def test_vertical_line_samples_lie_on_curve(self, curve):
        rng = np.random.default_rng(7)
        found = 0
        while found < 10:
            x1 = rng.standard_normal()
            roots = curve_points_at_x1(curve, x1)
            for x2 in roots:
                assert abs(curve(x1, x2)) <= 1e-10
            found += len(roots)
