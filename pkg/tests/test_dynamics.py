import unittest
import logging
import math
import torch

from heightlab.dynamics import (
    GridSpec,
    TimeGrid,
    check_differential_logconvexity,
    check_discrete_logconvexity,
    check_exponential_bound,
    check_monotonicity,
    check_squared_height_convexity,
    evolve,
    h_prime_at_zero,
    height_series,
    operator_norm_series,
    propagators,
    reevaluate,
    richardson_limit,
)
from heightlab.errors import ConsistencyError, DomainError
from heightlab.examples import contrast_matrix, random_family, showex_matrix2
from heightlab.linalg import (
    DTYPE,
    basis_vector,
    hermitian_eigen,
    hermitian_part,
    identity,
    norm,
)
from heightlab.operators import check_logconvex_criterion, lower_bound_m


def diag(*values):
    return torch.diag(torch.tensor(values, dtype=DTYPE))


def random_unit_vectors(n: int, count: int, seed: int):
    generator = torch.Generator().manual_seed(seed)
    xs = torch.randn(count, n, dtype=DTYPE, generator=generator)
    return xs / torch.linalg.vector_norm(xs, dim=-1, keepdim=True)


def has_accretive_square(A: torch.Tensor):
    return hermitian_eigen(hermitian_part(A @ A)).min >= 0.0


class TestEvolve(unittest.TestCase):
    def test_time_zero(self):
        A = random_family("unrestricted", 4, seed=0)
        u0 = random_unit_vectors(4, 1, seed=0)[0]
        self.assertTrue(torch.allclose(evolve(A, u0, 0.0), u0, atol=1e-15))

    def test_diagonal_closed_form(self):
        A = diag(1.0, 2.0)
        u0 = torch.tensor([1.0, 1.0], dtype=DTYPE)
        for t in [0.1, 1.0, 5.0]:
            expected = torch.tensor(
                [math.exp(-t), math.exp(-2.0 * t)], dtype=DTYPE
            )
            self.assertTrue(
                torch.allclose(evolve(A, u0, t), expected, rtol=1e-12, atol=0.0)
            )

    def test_nilpotent(self):
        N = torch.tensor([[0.0, 1.0], [0.0, 0.0]], dtype=DTYPE)
        u0 = torch.tensor([0.0, 1.0], dtype=DTYPE)
        u = evolve(N, u0, 2.0)
        self.assertAlmostEqual(u[0].item(), -2.0, places=12)
        self.assertAlmostEqual(u[1].item(), 1.0, places=12)

    def test_semigroup_law(self):
        for n in [1, 2, 4, 8, 16]:
            A = random_family("unrestricted", n, seed=n)
            u0 = random_unit_vectors(n, 1, seed=n)[0]
            s, t = 0.3, 0.45
            composed = evolve(A, evolve(A, u0, s), t)
            direct = evolve(A, u0, s + t)
            rel = norm(composed - direct) / norm(direct)
            logging.info(f"n={n}: semigroup law relative error {rel:.3e}")
            self.assertLess(rel, 1e-10)

    def test_errors(self):
        A = identity(2)
        with self.assertRaises(DomainError):
            evolve(A, torch.ones(2, dtype=DTYPE), -1.0)
        with self.assertRaises(DomainError):
            evolve(A, torch.zeros(2, dtype=DTYPE), 1.0)
        with self.assertRaises(DomainError):
            evolve(A, torch.ones(3, dtype=DTYPE), 1.0)


class TestTimeGrid(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            TimeGrid([0.0, 1.0])
        with self.assertRaises(DomainError):
            TimeGrid([0.5, 1.0, 2.0])
        with self.assertRaises(DomainError):
            TimeGrid([0.0, 1.0, 1.0])
        with self.assertRaises(DomainError):
            TimeGrid([0.0, 1.0, float("nan")])
        with self.assertRaises(DomainError):
            TimeGrid.uniform(-1.0, 10)

    def test_hybrid(self):
        spec = GridSpec.from_config()
        grid = TimeGrid.hybrid(4.0, spec)
        self.assertEqual(len(grid), spec.n_points)
        self.assertEqual(grid[0], 0.0)
        self.assertAlmostEqual(grid.t_max, 4.0, places=12)
        self.assertAlmostEqual(grid[1], spec.first_fraction * 4.0, places=15)

    def test_default_for(self):
        spec = GridSpec.from_config()
        # m(diag(-1, 3)) = -1 falls back to the floor
        grid = TimeGrid.default_for(contrast_matrix(), spec)
        self.assertAlmostEqual(grid.t_max, spec.t_scale / spec.m_floor)

        grid = TimeGrid.default_for(2.0 * identity(2), spec)
        self.assertAlmostEqual(grid.t_max, spec.t_scale / 2.0)

        grid = TimeGrid.default_for(identity(2), spec, t_max=3.0)
        self.assertAlmostEqual(grid.t_max, 3.0)


class TestHeightSeries(unittest.TestCase):
    def test_scalar(self):
        a = 0.7
        A = torch.tensor([[a]], dtype=DTYPE)
        grid = TimeGrid.uniform(5.0, 51)
        series = height_series(A, torch.tensor([1.0], dtype=DTYPE), grid)
        expected = torch.exp(-a * grid.points)
        self.assertTrue(torch.allclose(series.h, expected, rtol=1e-12))
        self.assertTrue(
            torch.allclose(series.h_prime, -a * expected, rtol=1e-12)
        )
        self.assertTrue(
            torch.allclose(series.h_second, a**2 * expected, rtol=1e-12)
        )
        self.assertLess(series.margins().abs().max().item(), 1e-14)

    def test_diagonal_closed_form(self):
        A = diag(1.0, 2.0)
        u0 = torch.tensor([1.0, 1.0], dtype=DTYPE)
        grid = TimeGrid.uniform(3.0, 31)
        series = height_series(A, u0, grid)

        t = grid.points
        h2 = torch.exp(-2.0 * t) + torch.exp(-4.0 * t)
        h = torch.sqrt(h2)
        h_prime = -(torch.exp(-2.0 * t) + 2.0 * torch.exp(-4.0 * t)) / h
        h2_second = 4.0 * torch.exp(-2.0 * t) + 16.0 * torch.exp(-4.0 * t)

        self.assertTrue(torch.allclose(series.h, h, rtol=1e-12))
        self.assertTrue(torch.allclose(series.h_prime, h_prime, rtol=1e-12))
        self.assertTrue(torch.allclose(series.h2_second, h2_second, rtol=1e-12))

    def test_initial_height(self):
        u0 = torch.tensor([3.0, 4j, 0.0], dtype=DTYPE)
        A = random_family("strictly-accretive", 3, seed=2)
        series = height_series(A, u0, TimeGrid.uniform(1.0, 11))
        self.assertAlmostEqual(series.h[0].item(), 5.0, delta=1e-14)

    def test_norm_check(self):
        A = random_family("strictly-accretive", 5, seed=4)
        u0 = random_unit_vectors(5, 1, seed=4)[0]
        grid = TimeGrid.default_for(A)
        series = height_series(A, u0, grid)
        rel = ((series.u_norm_check - series.h).abs() / series.h).max().item()
        self.assertLess(rel, 1e-9)

    def test_snapshots(self):
        A = random_family("unrestricted", 3, seed=5)
        u0 = random_unit_vectors(3, 1, seed=5)[0]
        grid = TimeGrid.uniform(1.0, 5)
        series = height_series(A, u0, grid, keep_snapshots=True)
        self.assertEqual(tuple(series.snapshots.shape), (5, 3))
        self.assertTrue(
            torch.allclose(
                series.snapshots[3], evolve(A, u0, grid[3]), atol=1e-13
            )
        )
        self.assertIsNone(height_series(A, u0, grid).snapshots)

    def test_finite_differences(self):
        A = random_family("strictly-accretive", 4, seed=6)
        u0 = random_unit_vectors(4, 1, seed=6)[0]
        grid = TimeGrid.uniform(2.0, 11)
        series = height_series(A, u0, grid)

        def h(t):
            return norm(evolve(A, u0, t))

        for k in range(1, len(grid)):
            t = grid[k]
            for step, bound in [(1e-2, 1e-2), (1e-3, 1e-4), (1e-4, 1e-6)]:
                central = (h(t + step) - h(t - step)) / (2.0 * step)
                self.assertLess(abs(central - series.h_prime[k].item()), bound)

            step = 1e-4
            left, mid, right = h(t - step), h(t), h(t + step)
            second = (right - 2.0 * mid + left) / step**2
            self.assertAlmostEqual(
                second, series.h_second[k].item(), delta=1e-4
            )

            squared = (right**2 - 2.0 * mid**2 + left**2) / step**2
            self.assertAlmostEqual(
                squared, series.h2_second[k].item(), delta=1e-4
            )

    def test_shared_propagators(self):
        A = random_family("strictly-accretive", 3, seed=7)
        grid = TimeGrid.uniform(1.0, 9)
        props = propagators(A, grid)
        for u0 in random_unit_vectors(3, 3, seed=7):
            shared = height_series(A, u0, grid, props=props)
            fresh = height_series(A, u0, grid)
            self.assertTrue(torch.equal(shared.h, fresh.h))

    def test_zero_initial_vector(self):
        with self.assertRaises(DomainError):
            height_series(
                identity(2),
                torch.zeros(2, dtype=DTYPE),
                TimeGrid.uniform(1.0, 5),
            )

    def test_tiny_heights(self):
        # e^{-400} and below square to less than the smallest double
        A = diag(1.0, 100.0)
        grid = TimeGrid.uniform(5.0, 11)
        series = height_series(A, basis_vector(2, 1), grid)
        for k, t in enumerate(grid.tolist()):
            expected = math.exp(-100.0 * t)
            self.assertAlmostEqual(
                series.h[k].item() / expected, 1.0, places=10
            )
            self.assertAlmostEqual(
                series.h_prime[k].item() / expected, -100.0, delta=1e-7
            )
            self.assertAlmostEqual(
                series.u_norm_check[k].item() / expected, 1.0, delta=1e-9
            )

    def test_underflowed_trajectory(self):
        # e^{-1000} is not representable, so u(1) comes out exactly zero
        A = diag(1.0, 1000.0)
        with self.assertRaises(ConsistencyError):
            height_series(A, basis_vector(2, 1), TimeGrid.uniform(1.0, 3))


class TestDerivativeLimits(unittest.TestCase):
    def test_richardson_polynomial(self):
        steps = [1e-1, 5e-2, 2.5e-2]
        values = [2.0 + 3.0 * d + 5.0 * d**2 for d in steps]
        self.assertAlmostEqual(richardson_limit(steps, values), 2.0, places=12)

    def test_contrast_short_time(self):
        A = contrast_matrix()
        analytic, numeric = h_prime_at_zero(A, basis_vector(2, 1))
        logging.info(f"h'(0) analytic {analytic}, numeric {numeric}")
        self.assertAlmostEqual(analytic, -3.0, delta=1e-12)
        self.assertAlmostEqual(numeric, -3.0, delta=1e-6)

        norms = operator_norm_series(A, TimeGrid.uniform(1.0, 11))
        logging.info(f"E'(0) estimate {norms.E_prime_zero_estimate}")
        self.assertAlmostEqual(norms.E_prime_zero_estimate, 1.0, delta=1e-4)
        self.assertAlmostEqual(lower_bound_m(A), -1.0, delta=1e-12)
        self.assertAlmostEqual(norms.spectral_abscissa, -1.0, places=10)

    def test_ordering_law(self):
        # h'(0) = -Re<A u0, u0> <= -m(A) for every unit u0
        A = diag(1.0, 2.0)
        u0 = torch.tensor([1.0, 1.0], dtype=DTYPE)
        analytic, numeric = h_prime_at_zero(A, u0)
        self.assertAlmostEqual(analytic, -1.5, places=12)
        self.assertAlmostEqual(numeric, -1.5, delta=1e-6)
        self.assertLessEqual(analytic, -lower_bound_m(A))

        for seed in range(10):
            A = random_family("unrestricted", 4, seed=seed)
            m = lower_bound_m(A)
            for u0 in random_unit_vectors(4, 10, seed=seed):
                analytic, _ = h_prime_at_zero(A, u0)
                self.assertLessEqual(analytic, -m + 1e-8)

    def test_norm_derivative_is_minus_m(self):
        A = showex_matrix2(1.0, 0.5)
        norms = operator_norm_series(A, TimeGrid.uniform(1.0, 11))
        self.assertAlmostEqual(norms.E[0].item(), 1.0, places=12)
        self.assertAlmostEqual(norms.E_prime_zero_estimate, -1.0, delta=1e-4)
        self.assertLessEqual(norms.peak, 1.0 + 1e-10)


class TestNormSeries(unittest.TestCase):
    def test_normal_rate(self):
        # For normal A, E(t) = e^{-t s} with s the spectral abscissa
        A = random_family("normal-accretive", 4, seed=1)
        grid = TimeGrid.uniform(5.0, 11)
        norms = operator_norm_series(A, grid)
        s = norms.spectral_abscissa
        for k, t in enumerate(grid.tolist()):
            self.assertAlmostEqual(
                norms.E[k].item() / math.exp(-s * t), 1.0, delta=1e-9
            )
        self.assertAlmostEqual(norms.rate_estimate, -s, delta=1e-9)

        norms = operator_norm_series(diag(1.0, 2.0), grid)
        self.assertAlmostEqual(norms.rate_estimate, -1.0, delta=1e-10)

    def test_jordan_rate(self):
        # E(t) = e^{-t} |[[1, -t], [0, 1]]| grows like t e^{-t}
        A = torch.tensor([[1.0, 1.0], [0.0, 1.0]], dtype=DTYPE)
        norms = operator_norm_series(A, TimeGrid.uniform(200.0, 5))
        logging.info(f"Jordan rate estimate {norms.rate_estimate}")
        self.assertGreater(norms.rate_estimate, -1.0)
        self.assertLess(norms.rate_estimate, -0.95)
        self.assertAlmostEqual(norms.spectral_abscissa, 1.0, delta=1e-6)

    def test_large_growth(self):
        A = random_family("unrestricted", 40, seed=20190226)
        norms = operator_norm_series(A, TimeGrid.uniform(100.0, 3))
        logging.info(f"E on [0, 50, 100]: {norms.E.tolist()}")
        self.assertTrue(torch.isfinite(norms.E).all())
        self.assertGreater(norms.E[2].item(), norms.E[1].item())
        self.assertTrue(math.isfinite(norms.rate_estimate))


class TestConvexityVerdicts(unittest.TestCase):
    def test_normal_accretive_logconvex(self):
        count = 0
        for seed in range(50):
            n = (2, 4, 8)[seed % 3]
            A = random_family("normal-accretive", n, seed=seed)
            grid = TimeGrid.default_for(A)
            props = propagators(A, grid)
            for u0 in random_unit_vectors(n, 20, seed=1000 + seed):
                series = height_series(A, u0, grid, props=props)
                discrete = check_discrete_logconvexity(series)
                differential = check_differential_logconvexity(series)
                scale = max(
                    1.0,
                    (series.h * series.h_second).abs().max().item(),
                    (series.h_prime**2).max().item(),
                )
                self.assertGreaterEqual(discrete.margin, -1e-9)
                self.assertGreaterEqual(differential.margin, -1e-9 * scale)
                count += 1

        logging.info(f"checked {count} normal trajectories")

    def test_showalter_witness_violates(self):
        A = showex_matrix2(1.0, 0.5)
        report = check_logconvex_criterion(A)
        grid = TimeGrid.default_for(A)
        series = height_series(A, report.witness, grid)

        early = grid.points <= 1e-2
        worst = series.margins()[early].min().item()
        logging.info(
            f"worst early margin {worst}, g(witness) {report.extremal_value}"
        )
        self.assertLess(worst, -1e-8)
        self.assertAlmostEqual(
            series.margins()[0].item(), report.extremal_value, delta=1e-10
        )

        verdict = check_differential_logconvexity(series)
        self.assertFalse(verdict.holds)
        self.assertAlmostEqual(
            reevaluate(series, verdict), verdict.margin, places=12
        )

    def test_accretive_square_strictly_convex(self):
        collected = 0
        seed = 0
        while collected < 50 and seed < 2000:
            n = 2 + seed % 3
            A = random_family("strictly-accretive", n, seed=seed)
            seed += 1
            if not has_accretive_square(A):
                continue

            collected += 1
            grid = TimeGrid.default_for(A)
            props = propagators(A, grid)
            for u0 in random_unit_vectors(n, 10, seed=5000 + seed):
                series = height_series(A, u0, grid, props=props)
                self.assertTrue((series.h_second > 0.0).all())
                decrease, monotone = check_monotonicity(series)
                self.assertTrue(decrease.holds, decrease.to_dict())
                self.assertTrue(monotone.holds, monotone.to_dict())
                self.assertTrue(check_squared_height_convexity(series).holds)

        logging.info(f"{collected} accretive squares in {seed} draws")
        self.assertEqual(collected, 50)

    def test_contraction_bound(self):
        for seed in range(5):
            A = random_family("strictly-accretive", 4, seed=seed)
            u0 = random_unit_vectors(4, 1, seed=seed)[0]
            series = height_series(A, u0, TimeGrid.default_for(A))
            self.assertTrue(check_exponential_bound(series, 0.0).holds)
            self.assertTrue(
                check_exponential_bound(series, lower_bound_m(A)).holds
            )

        # diag(-1, 3) grows along e1
        u0 = torch.ones(2, dtype=DTYPE)
        series = height_series(contrast_matrix(), u0, TimeGrid.uniform(2.0, 21))
        verdict = check_exponential_bound(series, 0.0)
        self.assertFalse(verdict.holds)
        self.assertAlmostEqual(
            reevaluate(series, verdict, m=0.0), verdict.margin, places=12
        )

    def test_discrete_witness_reproduces(self):
        A = showex_matrix2(1.0, 0.5)
        report = check_logconvex_criterion(A)
        series = height_series(A, report.witness, TimeGrid.uniform(0.5, 41))
        verdict = check_discrete_logconvexity(series)
        self.assertFalse(verdict.holds)
        self.assertEqual(len(verdict.witness), 3)
        self.assertAlmostEqual(
            reevaluate(series, verdict), verdict.margin, places=12
        )


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    unittest.main()
