import math

import numpy as np
import pytest

from eqc import (
    Coefficients,
    DomainError,
    PenaltySpec,
    SolverConfig,
    binomial_loss,
    fit_linear_svm,
    fit_penalized_logistic,
    hinge_loss,
)
from eqc.metalearners import binomial_gradient


def _rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


def _naive_binomial(coef, lam, Z, y, kind):
    """Independent per-sample summation oracle for the penalized deviance."""
    n = len(y)
    total = 0.0
    for i in range(n):
        c = coef.intercept + float(np.dot(Z[i], coef.weights))
        total += -((y[i] - 1) * c - math.log(1.0 + math.exp(c)))
    total /= n
    if kind == "ridge":
        total += 0.5 * lam * float(np.sum(coef.weights**2))
    else:
        total += 0.5 * lam * float(np.sum(np.abs(coef.weights)))
    return total


def _naive_hinge(coef, cost, Z, y):
    n = len(y)
    total = 0.0
    for i in range(n):
        s = 2 * (y[i] - 1) - 1
        c = coef.intercept + float(np.dot(Z[i], coef.weights))
        total += max(0.0, 1.0 - s * c)
    return total / n + float(np.sum(coef.weights**2)) / (2 * n * cost)


class TestBinomialLoss:
    def test_zero_coefficients_log2(self):
        coef = Coefficients(0.0, np.zeros(3))
        pen = PenaltySpec("ridge", 5.0)
        for label in (1, 2):
            loss = binomial_loss(coef, pen, np.zeros((1, 3)), [label])
            assert loss == pytest.approx(math.log(2.0), abs=1e-15)

    def test_matches_naive_summation(self):
        rng = _rng(3)
        Z = rng.standard_normal((17, 4))
        y = rng.integers(1, 3, size=17)
        y[:2] = [1, 2]
        coef = Coefficients(0.3, rng.standard_normal(4))
        for kind in ("ridge", "lasso"):
            pen = PenaltySpec(kind, 0.37)
            ours = binomial_loss(coef, pen, Z, y)
            oracle = _naive_binomial(coef, 0.37, Z, y, kind)
            assert ours == pytest.approx(oracle, abs=1e-12)

    def test_dimension_mismatch(self):
        coef = Coefficients(0.0, np.zeros(2))
        with pytest.raises(DomainError):
            binomial_loss(coef, PenaltySpec("ridge", 1.0), np.zeros((3, 3)), [1, 2, 1])

    def test_convexity_witness(self):
        rng = _rng(11)
        Z = rng.standard_normal((25, 3))
        y = np.append(rng.integers(1, 3, size=23), [1, 2])
        for kind in ("ridge", "lasso"):
            pen = PenaltySpec(kind, 0.2)
            for _ in range(50):
                a = Coefficients(rng.normal(), rng.standard_normal(3))
                b = Coefficients(rng.normal(), rng.standard_normal(3))
                t = rng.uniform(0.05, 0.95)
                mid = Coefficients(
                    t * a.intercept + (1 - t) * b.intercept,
                    t * a.weights + (1 - t) * b.weights,
                )
                lhs = binomial_loss(mid, pen, Z, y)
                rhs = t * binomial_loss(a, pen, Z, y) + (1 - t) * binomial_loss(b, pen, Z, y)
                assert lhs <= rhs + 1e-10


class TestRidgeNewton:
    def test_all_zero_design_balanced(self):
        Z = np.zeros((10, 2))
        y = np.array([1, 2] * 5)
        coef, report = fit_penalized_logistic(Z, y, PenaltySpec("ridge", 0.5))
        assert report.converged
        assert coef.intercept == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(coef.weights, 0.0, atol=1e-9)

    def test_beats_grid_search_oracle(self):
        rng = _rng(7)
        Z = rng.standard_normal((20, 2))
        y = np.where(Z[:, 0] + 0.5 * rng.standard_normal(20) > 0, 2, 1)
        y[:2] = [1, 2]
        pen = PenaltySpec("ridge", 0.1)
        coef, report = fit_penalized_logistic(Z, y, pen)
        assert report.converged
        ours = binomial_loss(coef, pen, Z, y)
        grid = np.linspace(-3, 3, 41)
        best = np.inf
        for b0 in grid:
            for b1 in grid:
                for b2 in grid:
                    cand = Coefficients(b0, np.array([b1, b2]))
                    best = min(best, binomial_loss(cand, pen, Z, y))
        assert ours <= best + 1e-12

    def test_gradient_matches_finite_differences(self):
        rng = _rng(19)
        Z = rng.standard_normal((30, 4))
        y = np.append(rng.integers(1, 3, size=28), [1, 2])
        pen = PenaltySpec("ridge", 0.3)
        coef = Coefficients(0.2, rng.standard_normal(4))
        g = binomial_gradient(coef, pen, Z, y)
        eps = 1e-6
        x = np.concatenate(([coef.intercept], coef.weights))
        for j in range(5):
            lo, hi = x.copy(), x.copy()
            lo[j] -= eps
            hi[j] += eps
            f_lo = binomial_loss(Coefficients(lo[0], lo[1:]), pen, Z, y)
            f_hi = binomial_loss(Coefficients(hi[0], hi[1:]), pen, Z, y)
            fd = (f_hi - f_lo) / (2 * eps)
            assert abs(g[j] - fd) <= 1e-6 * max(1.0, abs(fd))

    def test_monotone_loss_trace(self):
        rng = _rng(23)
        Z = rng.standard_normal((40, 3))
        y = np.where(Z @ np.array([1.0, -0.5, 0.2]) > 0, 2, 1)
        y[:2] = [1, 2]
        trace: list = []
        fit_penalized_logistic(Z, y, PenaltySpec("ridge", 0.05), trace=trace)
        assert len(trace) >= 2
        diffs = np.diff(np.asarray(trace))
        assert np.all(diffs <= 1e-12)

    def test_doubling_lambda_shrinks_weights(self):
        rng = _rng(29)
        Z = rng.standard_normal((30, 3))
        y = np.where(Z[:, 0] > 0, 2, 1)
        y[:2] = [1, 2]
        norms = []
        for lam in (0.01, 0.02, 0.04, 0.08, 0.16):
            coef, _ = fit_penalized_logistic(Z, y, PenaltySpec("ridge", lam))
            norms.append(np.linalg.norm(coef.weights))
        # heavier penalty never grows the optimum's weight norm
        assert np.all(np.diff(norms) <= 1e-8)

    def test_nonconvergence_reports_not_raises(self):
        rng = _rng(67)
        Z = rng.standard_normal((30, 3))
        y = np.where(Z[:, 0] > 0, 2, 1)
        y[:2] = [1, 2]
        # a one-step budget cannot reach the 1e-8 gradient tolerance
        coef, report = fit_penalized_logistic(
            Z, y, PenaltySpec("ridge", 0.01), SolverConfig(max_iter=1)
        )
        assert not report.converged
        assert np.isfinite(coef.weights).all()
        assert report.iterations == 1


class TestLassoProx:
    def test_above_critical_threshold_weights_zero(self):
        rng = _rng(31)
        Z = rng.standard_normal((40, 5))
        y = np.append(rng.integers(1, 3, size=38), [1, 2])
        y01 = (y - 1).astype(float)
        # at the intercept-only optimum mu = mean(y01); the subgradient
        # condition for an all-zero weight vector is
        # max_j |(1/n) sum z_ij (y01_i - ybar)| <= lambda/2
        corr = np.abs(Z.T @ (y01 - y01.mean())) / len(y)
        lam = 2.0 * corr.max() * 1.0001
        coef, report = fit_penalized_logistic(Z, y, PenaltySpec("lasso", lam))
        assert report.converged
        assert np.all(coef.weights == 0.0)

    def test_kkt_stationarity(self):
        rng = _rng(37)
        Z = rng.standard_normal((60, 6))
        beta_true = np.array([2.0, -1.5, 0.0, 0.0, 0.0, 0.0])
        y = np.where(Z @ beta_true + 0.3 * rng.standard_normal(60) > 0, 2, 1)
        y[:2] = [1, 2]
        lam = 0.05
        coef, report = fit_penalized_logistic(
            Z, y, PenaltySpec("lasso", lam), SolverConfig(max_iter=5000)
        )
        y01 = (y - 1).astype(float)
        c = coef.intercept + Z @ coef.weights
        r = 1.0 / (1.0 + np.exp(-c)) - y01
        grad_smooth = Z.T @ r / len(y)
        for j, bj in enumerate(coef.weights):
            if bj == 0.0:
                assert abs(grad_smooth[j]) <= 0.5 * lam + 1e-6
            else:
                assert abs(grad_smooth[j] + 0.5 * lam * np.sign(bj)) <= 1e-5
        assert abs(r.mean()) <= 1e-6  # intercept stationarity

    def test_recovers_sparse_signal_support(self):
        rng = _rng(41)
        Z = rng.standard_normal((200, 8))
        beta_true = np.zeros(8)
        beta_true[:2] = [3.0, -3.0]
        y = np.where(Z @ beta_true > 0, 2, 1)
        coef, _ = fit_penalized_logistic(
            Z, y, PenaltySpec("lasso", 0.1), SolverConfig(max_iter=3000)
        )
        assert np.all(np.abs(coef.weights[:2]) > 0.1)
        assert np.all(np.abs(coef.weights[2:]) < np.abs(coef.weights[:2]).min())


class TestHinge:
    def test_zero_coefficients_loss_one(self):
        coef = Coefficients(0.0, np.zeros(2))
        rng = _rng(43)
        Z = rng.standard_normal((12, 2))
        y = np.append(rng.integers(1, 3, size=10), [1, 2])
        assert hinge_loss(coef, 1.0, Z, y) == pytest.approx(1.0, abs=1e-15)

    def test_margin_above_one_leaves_penalty_only(self):
        Z = np.array([[-5.0], [5.0]])
        y = np.array([1, 2])
        coef = Coefficients(0.0, np.array([1.0]))
        expect = 1.0 / (2 * 2 * 3.0)
        assert hinge_loss(coef, 3.0, Z, y) == pytest.approx(expect, abs=1e-15)

    def test_matches_naive_summation(self):
        rng = _rng(47)
        Z = rng.standard_normal((15, 3))
        y = np.append(rng.integers(1, 3, size=13), [1, 2])
        coef = Coefficients(-0.2, rng.standard_normal(3))
        assert hinge_loss(coef, 0.7, Z, y) == pytest.approx(
            _naive_hinge(coef, 0.7, Z, y), abs=1e-12
        )

    def test_cost_must_be_positive(self):
        coef = Coefficients(0.0, np.zeros(1))
        with pytest.raises(DomainError):
            hinge_loss(coef, 0.0, np.zeros((2, 1)), [1, 2])

    def test_convexity_witness(self):
        rng = _rng(53)
        Z = rng.standard_normal((20, 2))
        y = np.append(rng.integers(1, 3, size=18), [1, 2])
        for _ in range(50):
            a = Coefficients(rng.normal(), rng.standard_normal(2))
            b = Coefficients(rng.normal(), rng.standard_normal(2))
            t = rng.uniform(0.05, 0.95)
            mid = Coefficients(
                t * a.intercept + (1 - t) * b.intercept,
                t * a.weights + (1 - t) * b.weights,
            )
            lhs = hinge_loss(mid, 2.0, Z, y)
            rhs = t * hinge_loss(a, 2.0, Z, y) + (1 - t) * hinge_loss(b, 2.0, Z, y)
            assert lhs <= rhs + 1e-10


class TestSvmSolver:
    def test_separable_symmetric_pair(self):
        Z = np.array([[-1.0], [1.0]])
        y = np.array([1, 2])
        coef, _ = fit_linear_svm(Z, y, 100.0)
        assert coef.weights[0] > 0
        assert coef.intercept + coef.weights[0] > 0
        assert coef.intercept - coef.weights[0] < 0

    def test_zero_design_zero_weights(self):
        Z = np.zeros((8, 2))
        y = np.array([1, 2] * 4)
        coef, _ = fit_linear_svm(Z, y, 1.0)
        assert np.allclose(coef.weights, 0.0, atol=1e-12)

    def test_within_tolerance_of_grid_oracle(self):
        rng = _rng(59)
        Z = rng.standard_normal((10, 1))
        y = np.where(Z[:, 0] + 0.3 * rng.standard_normal(10) > 0, 2, 1)
        y[:2] = [1, 2]
        cost = 2.0
        coef, report = fit_linear_svm(Z, y, cost, SolverConfig(hinge_iters=20000))
        ours = hinge_loss(coef, cost, Z, y)
        grid = np.linspace(-3, 3, 301)
        best = np.inf
        for b0 in grid:
            for b1 in grid:
                cand = Coefficients(b0, np.array([b1]))
                best = min(best, hinge_loss(cand, cost, Z, y))
        assert ours <= best + 1e-3

    def test_deterministic(self):
        rng = _rng(61)
        Z = rng.standard_normal((12, 2))
        y = np.append(rng.integers(1, 3, size=10), [1, 2])
        c1, _ = fit_linear_svm(Z, y, 1.5)
        c2, _ = fit_linear_svm(Z, y, 1.5)
        assert c1.intercept == c2.intercept
        assert np.array_equal(c1.weights, c2.weights)
