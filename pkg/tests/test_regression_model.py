"""Matrix regression: generation moments, loss/gradient, init, RIP probe."""

import numpy as np
import pytest

from lrpgd import factors as fx
from lrpgd.models import regression as mr
from lrpgd.solver import Constant, SolverOptions, pgd


class TestGenerate:
    def test_noiseless_responses(self):
        data, gt = mr.generate(d=8, r=2, n=20, noise_sd=0.0, seed=0)
        target = gt.factor @ gt.factor.T
        expect = np.einsum("nij,ij->n", data.designs, target)
        np.testing.assert_allclose(data.responses, expect, atol=1e-12)

    def test_seed_determinism(self):
        a, _ = mr.generate(6, 2, 10, 0.1, seed=5)
        b, _ = mr.generate(6, 2, 10, 0.1, seed=5)
        assert np.array_equal(a.designs, b.designs)
        assert np.array_equal(a.responses, b.responses)

    def test_designs_symmetric(self):
        data, _ = mr.generate(7, 2, 15, 0.0, seed=1)
        np.testing.assert_allclose(data.designs, np.transpose(data.designs, (0, 2, 1)), atol=1e-12)

    def test_design_second_moment(self, rng):
        # E[<X, M>^2] = (||M||_F^2 + <M, M^T>)/2 for the symmetrized design
        d, n = 5, 100_000
        data, _ = mr.generate(d, 1, n, 0.0, seed=7)
        m = rng.standard_normal((d, d))
        vals = np.einsum("nij,ij->n", data.designs, m) ** 2
        expect = 0.5 * (np.sum(m * m) + np.sum(m * m.T))
        se = vals.std(ddof=1) / np.sqrt(n)
        assert abs(vals.mean() - expect) <= 3 * se


class TestLossGrad:
    def test_zero_at_exact_fit(self):
        data, gt = mr.generate(10, 2, 30, 0.0, seed=2)
        loss, grad = mr.loss_grad(data, gt.factor)
        assert loss == pytest.approx(0.0, abs=1e-18)
        np.testing.assert_allclose(grad, 0.0, atol=1e-10)

    def test_scalar_hand_example(self):
        # single design X=1, y=1: loss(t) = (t^2-1)^2/2, grad = 2t(t^2-1)
        data = mr.SensingData(designs=np.ones((1, 1, 1)), responses=np.ones(1), noise_sd=0.0)
        loss, grad = mr.loss_grad(data, np.array([[2.0]]))
        assert loss == pytest.approx(4.5)
        assert grad[0, 0] == pytest.approx(12.0)

    def test_finite_differences(self, rng):
        data, gt = mr.generate(8, 2, 40, 0.1, seed=3)
        f = gt.factor + 0.3 * rng.standard_normal((8, 2))
        _, grad = mr.loss_grad(data, f)
        h = 1e-5
        for _ in range(5):
            e = rng.standard_normal((8, 2))
            e /= np.linalg.norm(e)
            lp, _ = mr.loss_grad(data, f + h * e)
            lm, _ = mr.loss_grad(data, f - h * e)
            fd = (lp - lm) / (2 * h)
            assert abs(fd - np.sum(grad * e)) <= 1e-5 * max(1.0, abs(fd))

    def test_matrix_gradient_symmetric(self, rng):
        data, gt = mr.generate(6, 2, 25, 0.05, seed=4)
        f = gt.factor + 0.1 * rng.standard_normal((6, 2))
        res = np.einsum("nij,ij->n", data.designs, f @ f.T) - data.responses
        grad_mat = np.tensordot(res, data.designs, axes=(0, 0)) / data.n
        np.testing.assert_allclose(grad_mat, grad_mat.T, atol=1e-10)

    def test_convex_in_matrix_argument(self, rng):
        data, _ = mr.generate(6, 2, 25, 0.05, seed=5)
        m0 = rng.standard_normal((6, 6))
        direction = rng.standard_normal((6, 6))
        h = 0.3
        second = (
            mr.matrix_loss(data, m0 + h * direction)
            - 2 * mr.matrix_loss(data, m0)
            + mr.matrix_loss(data, m0 - h * direction)
        )
        assert second >= -1e-8


class TestInitSvd:
    def test_consistency_at_large_n(self):
        d, r = 60, 2
        n = 50 * d * r
        hits = 0
        for seed in range(10):
            data, gt = mr.generate(d, r, n, 0.0, seed=seed)
            theta0 = mr.init_svd(data, r)
            hits += fx.subspace_sin_dist(theta0, gt.factor) < 0.1
        assert hits >= 9

    def test_rank_one_exact_span(self):
        gt = fx.make_ground_truth(6, 1, seed=6)
        x = 3.0 * gt.factor @ gt.factor.T
        data = mr.SensingData(designs=x[None], responses=np.array([1.0]), noise_sd=0.0)
        theta0 = mr.init_svd(data, 1)
        assert fx.subspace_sin_dist(theta0, gt.factor) == pytest.approx(0.0, abs=1e-12)

    def test_determinism(self):
        data, _ = mr.generate(10, 2, 50, 0.0, seed=8)
        assert np.array_equal(mr.init_svd(data, 2), mr.init_svd(data, 2))


class TestRipEstimate:
    def test_concentration(self):
        data, _ = mr.generate(20, 2, 8000, 0.0, seed=9)
        assert mr.rip_estimate(data, rank_k=2, trials=10, seed=1) < 0.2

    def test_single_candidate_definition(self):
        data, gt = mr.generate(10, 2, 200, 0.0, seed=10)
        m = gt.factor @ gt.factor.T
        m = m / np.linalg.norm(m)
        xm = np.einsum("nij,ij->n", data.designs, m)
        expect = abs(np.dot(xm, xm) / data.n - 1.0)
        assert mr.rip_estimate(data, 2, trials=1, seed=0, candidates=[m]) == pytest.approx(expect, rel=1e-12)

    def test_fixed_direction_moment(self, rng):
        # (1/n)||X(M)||^2 -> E[<X, M>^2] = (||M||^2 + <M, M^T>)/2 for unit M
        d, n = 6, 60_000
        data, _ = mr.generate(d, 1, n, 0.0, seed=11)
        m = rng.standard_normal((d, d))
        m = 0.5 * (m + m.T)
        m /= np.linalg.norm(m)
        vals = np.einsum("nij,ij->n", data.designs, m) ** 2
        se = vals.std(ddof=1) / np.sqrt(n)
        assert abs(vals.mean() - 1.0) <= 3 * se


class TestNoiselessRecovery:
    def test_exact_recovery_rate(self):
        d, r = 60, 2
        hits = 0
        for seed in range(10):
            data, gt = mr.generate(d, r, 10 * d * r, 0.0, seed=seed)
            theta0 = mr.init_svd(data, r)
            eta = 0.25 / np.linalg.svd(theta0, compute_uv=False)[0] ** 2
            _, final = pgd(
                mr.instance(data, r), theta0, Constant(eta),
                SolverOptions(max_iters=200, record_every=200, ground_truth=gt),
            )
            hits += fx.factor_dist(final, gt) < 1e-6
        assert hits >= 8
