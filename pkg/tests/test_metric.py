import numpy as np
import pytest

import _oracles as oracle
from jsdm.errors import DomainError
from jsdm.metric import (
    FIG2_DELTA_ALPHAS,
    Classification,
    ScanGrid,
    TriangleCounterexample,
    classify_alpha,
    delta_u,
    dh_alpha_du,
    figure_data,
    h_alpha,
    monotonicity_scan,
    probe_triple,
    sample_simplex,
    sign_term,
    triangle_search,
)
from jsdm.probability import ProbDist, d_alpha

# frozen from tests/_oracles.py at 50 digits
H_HALF_HALF = 1.3999520772558400226
DELTA_HALF_AT_HALF = 0.0023963613599430221096
DELTA_07_AT_HALF = -0.089138213154146341093
JSD_DELTA_UNIFORM = 0.31127812445913286391


def central_difference(u, alpha, rel_step=1e-6):
    # step shrinks with the distance to the nearer endpoint, where h varies fastest
    s = rel_step * np.minimum(u, 1.0 - u)
    return (h_alpha(u + s, alpha) - h_alpha(u - s, alpha)) / (2.0 * s)


class TestHAlpha:
    def test_at_zero(self):
        for a in [0.1, 0.5, 1.0, 3.0]:
            assert h_alpha(0.0, a) == 2.0

    def test_oracle_value(self):
        assert h_alpha(0.5, 0.5) == pytest.approx(H_HALF_HALF, rel=1e-14)

    def test_nonincreasing_pair(self):
        assert h_alpha(0.9, 0.5) <= h_alpha(0.8, 0.5)

    @pytest.mark.parametrize("u", [-0.1, 1.0, 1.5])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            h_alpha(u, 0.5)

    def test_against_oracle_near_one(self):
        for u in [0.99, 0.9999, 1 - 1e-7]:
            for a in [0.3, 0.5, 0.8]:
                assert h_alpha(u, a) == pytest.approx(float(oracle.h_alpha(u, a)), rel=1e-12)


class TestDerivative:
    def test_negative_at_half(self):
        assert dh_alpha_du(0.5, 0.5) < 0

    def test_positive_somewhere_at_09(self):
        u = ScanGrid.uniform(1000).points
        assert np.max(dh_alpha_du(u, 0.9)) > 0

    @pytest.mark.parametrize("alpha", [0.05, 0.3, 0.5, 0.7, 1.0])
    @pytest.mark.parametrize("u", [1e-4, 0.01, 0.3, 0.5, 0.8, 0.99, 0.999])
    def test_matches_finite_difference(self, u, alpha):
        closed = dh_alpha_du(u, alpha)
        fd = central_difference(u, alpha)
        assert abs(closed - fd) / max(1.0, abs(closed)) <= 1e-6

    @pytest.mark.parametrize("alpha", [0.05, 0.5, 0.9])
    @pytest.mark.parametrize("u", [1e-3, 0.25, 0.75, 0.9999])
    def test_against_oracle(self, u, alpha):
        ref = float(oracle.dh_alpha_du(u, alpha))
        assert dh_alpha_du(u, alpha) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("u", [0.0, 1.0])
    def test_domain(self, u):
        with pytest.raises(DomainError):
            dh_alpha_du(u, 0.5)


class TestSignTerm:
    def test_positive_at_half(self):
        assert sign_term(0.5, 0.5) > 0

    def test_opposite_sign_to_derivative(self):
        u = np.linspace(1e-3, 1 - 1e-3, 1000)
        for a in [0.2, 0.5, 0.6, 0.75, 1.0, 2.0]:
            s = np.asarray(sign_term(u, a))
            d = np.asarray(dh_alpha_du(u, a))
            mask = np.abs(s) > 1e-12
            assert np.all(np.sign(s[mask]) == -np.sign(d[mask]))

    def test_vanishes_towards_one(self):
        values = [abs(sign_term(1 - e, 0.7)) for e in [1e-2, 1e-4, 1e-6]]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-10

    @pytest.mark.parametrize("alpha", [0.5, 0.5000001, 0.51, 0.9, 2.0])
    @pytest.mark.parametrize("u", [0.6, 0.99, 0.9999, 1 - 1e-7])
    def test_relative_accuracy_near_one(self, u, alpha):
        # at alpha = 1/2 the term vanishes like (1-u)^4
        ref = float(oracle.sign_term(u, alpha))
        assert sign_term(u, alpha) == pytest.approx(ref, rel=1e-12)

    def test_matches_literal_formula_away_from_one(self):
        u = np.linspace(0.01, 0.9, 50)
        a = 0.6
        literal = u * np.log2(u) + (u + u**a) * (1 - np.log2(1 + u))
        np.testing.assert_allclose(sign_term(u, a), literal, rtol=1e-10, atol=1e-14)


class TestDeltaU:
    def test_zero(self):
        assert delta_u(0.0, 0.5) == 0.0

    def test_oracle_values(self):
        assert delta_u(0.5, 0.5) == pytest.approx(DELTA_HALF_AT_HALF, abs=1e-15)
        assert delta_u(0.5, 0.7) == pytest.approx(DELTA_07_AT_HALF, abs=1e-15)

    def test_nonnegative_at_half(self):
        u = np.arange(10_000) / 10_000
        assert np.min(delta_u(u, 0.5)) >= -1e-12

    def test_sign_agrees_with_sign_term(self):
        u = np.linspace(1e-3, 1 - 1e-3, 500)
        for a in [0.4, 0.55, 0.8]:
            assert np.all(np.sign(delta_u(u, a)) == np.sign(sign_term(u, a)))

    @pytest.mark.parametrize("alpha", [0.7, 0.8, 0.9, 1.0, 2.0])
    def test_negative_somewhere_for_large_alpha(self, alpha):
        u = np.arange(10_000) / 10_000
        assert np.any(np.asarray(delta_u(u, alpha)) < 0)

    def test_oracle_grid(self):
        for u in np.linspace(0, 0.999, 37):
            for a in [0.5, 0.51, 0.7]:
                assert delta_u(u, a) == pytest.approx(float(oracle.delta_u(u, a)), abs=1e-12)


class TestClassify:
    @pytest.mark.parametrize(
        "alpha, expected",
        [
            (0.5, Classification.METRIC),
            (1.0, Classification.NOT_METRIC),
            (0.75, Classification.CONJECTURED_NOT_METRIC),
        ],
    )
    def test_examples(self, alpha, expected):
        assert classify_alpha(alpha).classification is expected

    @pytest.mark.parametrize("alpha", [0.0, -0.5])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            classify_alpha(alpha)


class TestScanGrid:
    def test_uniform(self):
        g = ScanGrid.uniform(100)
        assert len(g) == 100
        assert g.points[0] == pytest.approx(1e-6)
        assert g.points[-1] < 1

    @pytest.mark.parametrize("points", [[0.2, 0.1], [0.5, 1.0], [-0.1, 0.5], []])
    def test_invalid(self, points):
        with pytest.raises(DomainError):
            ScanGrid(np.array(points), 0.1)


class TestMonotonicityScan:
    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5])
    def test_metric_range(self, alpha):
        report = monotonicity_scan(alpha, ScanGrid.uniform(10_000))
        assert report.nonincreasing
        assert report.worst_derivative <= 1e-10

    def test_fails_above_half(self):
        report = monotonicity_scan(0.8, ScanGrid.uniform(10_000))
        assert not report.nonincreasing
        assert report.worst_derivative > 1e-10
        assert dh_alpha_du(report.worst_point, 0.8) == pytest.approx(report.worst_derivative, rel=1e-14)

    def test_rejects_zero_in_grid(self):
        with pytest.raises(DomainError):
            monotonicity_scan(0.5, ScanGrid(np.array([0.0, 0.5]), 0.5))


class TestTriangleSearch:
    def test_probe_violation_at_one(self):
        found = triangle_search(1.0, 2, 10, seed=0)
        assert found is not None
        assert found.lhs == 1.0
        assert found.rhs == pytest.approx(2 * JSD_DELTA_UNIFORM, abs=1e-14)
        assert found.gap == pytest.approx(1 - 2 * JSD_DELTA_UNIFORM, abs=1e-14)
        assert found.p == ProbDist([1, 0]) and found.r == ProbDist([0.5, 0.5])

    def test_probe_not_a_violation_at_half(self):
        p, q, r = probe_triple()
        assert d_alpha(p, q, 0.5) <= d_alpha(p, r, 0.5) + d_alpha(r, q, 0.5)

    @pytest.mark.parametrize("dim", [2, 3, 5])
    def test_probe_in_higher_dimension(self, dim):
        found = triangle_search(1.5, dim, 1, seed=0)
        assert len(found.p) == dim
        assert found.gap == pytest.approx(1 - 2 * JSD_DELTA_UNIFORM**1.5, abs=1e-14)

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_none_at_half(self, dim):
        assert triangle_search(0.5, dim, 20_000, seed=dim) is None

    def test_random_violation_at_large_alpha(self):
        # with the probe it trivially fails; the sampled triples must also contain violations
        rng = np.random.default_rng(1)
        t = sample_simplex(rng, (2000, 3), 3)
        from jsdm.probability import jsd_rows

        lhs = jsd_rows(t[:, 0], t[:, 1]) ** 3
        rhs = jsd_rows(t[:, 0], t[:, 2]) ** 3 + jsd_rows(t[:, 2], t[:, 1]) ** 3
        assert np.any(lhs > rhs + 1e-12)

    def test_deterministic(self):
        a = triangle_search(0.4, 3, 15_000, seed=42)
        b = triangle_search(0.4, 3, 15_000, seed=42)
        assert a is None and b is None

    def test_counterexample_must_be_genuine(self):
        p = ProbDist([1, 0])
        with pytest.raises(ValueError):
            TriangleCounterexample(p, p, p, 1.0, 0.0, 0.0, 0.0)


class TestSimplexSampler:
    def test_on_simplex(self):
        x = sample_simplex(np.random.default_rng(0), 1000, 4)
        assert np.all(x >= 0)
        np.testing.assert_allclose(x.sum(axis=1), 1.0, atol=1e-15)

    def test_uniform_marginal_mean(self):
        x = sample_simplex(np.random.default_rng(0), 200_000, 3)
        # Dirichlet(1,1,1): each coordinate has mean 1/3 and std ~ 0.236
        np.testing.assert_allclose(x.mean(axis=0), 1 / 3, atol=3 * 0.236 / np.sqrt(200_000))


class TestFigureData:
    def test_fig1_nonnegative(self):
        rows = figure_data("fig1", u_points=500, alpha_points=20)
        assert rows.shape == (500 * 20, 3)
        assert np.all(rows[:, 1] <= 0.5) and np.all(rows[:, 1] > 0)
        assert np.min(rows[:, 2]) >= -1e-10

    def test_fig2_curves(self):
        rows = figure_data("fig2", u_points=2000)
        fractions = {}
        for d in FIG2_DELTA_ALPHAS:
            curve = rows[np.isclose(rows[:, 1], 0.5 + d)]
            assert curve.shape[0] == 2000
            fractions[d] = np.mean(curve[:, 2] < 0)
        assert fractions[0.01] > 0
        assert fractions[0.2] > 0.9
        ordered = [fractions[d] for d in FIG2_DELTA_ALPHAS]
        assert all(a <= b for a, b in zip(ordered, ordered[1:]))

    def test_unknown(self):
        with pytest.raises(DomainError):
            figure_data("fig3")
