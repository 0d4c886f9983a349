import unittest
import logging
import math
import torch

from heightlab.errors import DomainError
from heightlab.examples import RANDOM_KINDS, random_family, showex_matrix2
from heightlab.linalg import (
    DTYPE,
    frobenius,
    hermitian_part,
    identity,
    normalize,
)
from heightlab.operators import (
    CriterionConfig,
    brute_force_criterion_min,
    check_accretivity,
    check_hyponormal,
    check_logconvex_criterion,
    check_semiangle,
    criterion_gradient,
    criterion_polynomial,
    criterion_value,
    criterion_value_cartesian,
    evaluate_at,
    lower_bound_m,
    strict_convexity_value,
)


def showalter_direction(s: float):
    return torch.tensor([1j * s, 1.0], dtype=DTYPE)


def showalter_closed_form(lam: float, s: float):
    """g(i s e1 + e2) for showex_matrix2(lam, delta); independent of delta."""
    return -6.0 * lam**2 * s * (s**2 - 3.0 * s + 1.0) / (s**2 + 1.0) ** 2


class TestCriterionValue(unittest.TestCase):
    def test_cartesian_agrees(self):
        generator = torch.Generator().manual_seed(0)
        for seed in range(20):
            A = random_family("unrestricted", 1 + seed % 6, seed=seed)
            x = torch.randn(A.shape[0], dtype=DTYPE, generator=generator)
            self.assertAlmostEqual(
                criterion_value(A, x),
                criterion_value_cartesian(A, x),
                delta=1e-10 * max(1.0, abs(criterion_value(A, x))),
            )

    def test_scalar_matrices(self):
        # g = Re(a^2) + |a|^2 - 2 (Re a)^2 = 0 for every scalar a
        for a in [1.0, -2.0 + 1j, 3j, 0.5 - 0.25j]:
            A = torch.tensor([[a]], dtype=DTYPE)
            x = torch.tensor([1.0 - 2j], dtype=DTYPE)
            self.assertAlmostEqual(criterion_value(A, x), 0.0, delta=1e-12)

    def test_normalizes(self):
        A = showex_matrix2(1.0, 0.5)
        x = showalter_direction(5.0)
        self.assertAlmostEqual(
            criterion_value(A, x), criterion_value(A, 7.0 * x), places=12
        )
        self.assertAlmostEqual(
            criterion_value(A, x),
            criterion_polynomial(A, normalize(x)),
            places=12,
        )

    def test_zero_vector(self):
        with self.assertRaises(DomainError):
            criterion_value(identity(2), torch.zeros(2, dtype=DTYPE))

    def test_showalter_closed_form(self):
        for lam, delta in [(1.0, 0.5), (0.3, 0.1), (4.0, 0.25)]:
            A = showex_matrix2(lam, delta)
            for s in [0.1, 1.0, 2.0, 3.0, 5.0, 10.0]:
                self.assertAlmostEqual(
                    criterion_value(A, showalter_direction(s)),
                    showalter_closed_form(lam, s),
                    delta=1e-10 * max(1.0, lam**2),
                )

        # At s = 5 the criterion is clearly negative
        g = criterion_value(showex_matrix2(1.0, 0.5), showalter_direction(5.0))
        logging.info(f"g(5 i e1 + e2) = {g}")
        self.assertLess(g, -0.48)

    def test_strict_convexity_value(self):
        # For the identity h(t) = e^{-t}, so h''(0) = 1
        x = torch.tensor([1.0, 1j], dtype=DTYPE)
        self.assertAlmostEqual(strict_convexity_value(identity(2), x), 1.0)

        # Without the factor 2 the quantity exceeds the criterion
        A = random_family("unrestricted", 4, seed=3)
        generator = torch.Generator().manual_seed(1)
        y = torch.randn(4, dtype=DTYPE, generator=generator)
        self.assertGreaterEqual(
            strict_convexity_value(A, y), criterion_value(A, y) - 1e-12
        )


class TestCriterionInvariants(unittest.TestCase):
    def test_scale_covariance(self):
        generator = torch.Generator().manual_seed(4)
        A = random_family("unrestricted", 3, seed=4)
        x = torch.randn(3, dtype=DTYPE, generator=generator)
        g = criterion_value(A, x)
        for c in [0.1, 2.5, 7.0]:
            self.assertAlmostEqual(
                criterion_value(c * A, x),
                c**2 * g,
                delta=1e-10 * c**2 * max(1.0, abs(g)),
            )

    def test_verdict_scale_invariant(self):
        matrices = [
            showex_matrix2(1.0, 0.5),
            random_family("normal-accretive", 3, seed=0),
            random_family("unrestricted", 3, seed=0),
        ]
        for A in matrices:
            status = check_logconvex_criterion(A).status
            for c in [0.1, 10.0]:
                self.assertEqual(
                    check_logconvex_criterion(c * A).status, status
                )

    def test_selfadjoint_nonnegative(self):
        # For Hermitian A, g = 2 (|Ax|^2 - <Ax, x>^2) >= 0
        for seed in range(10):
            n = 2 + seed % 4
            H = hermitian_part(random_family("unrestricted", n, seed=seed))
            witness = brute_force_criterion_min(H, n_samples=5000, seed=seed)
            self.assertGreaterEqual(witness.value, -1e-12 * frobenius(H) ** 2)
            self.assertTrue(check_logconvex_criterion(H).holds)


class TestCriterionGradient(unittest.TestCase):
    def test_central_differences(self):
        generator = torch.Generator().manual_seed(11)
        step = 1e-6
        for k in range(100):
            A = random_family("unrestricted", 2 + k % 5, seed=100 + k)
            n = A.shape[0]
            x = normalize(torch.randn(n, dtype=DTYPE, generator=generator))
            d = torch.randn(n, dtype=DTYPE, generator=generator)

            analytic = torch.vdot(d, criterion_gradient(A, x)).real.item()
            numeric = (
                criterion_polynomial(A, x + step * d)
                - criterion_polynomial(A, x - step * d)
            ) / (2.0 * step)
            scale = max(1.0, abs(analytic))
            self.assertLess(abs(analytic - numeric) / scale, 1e-5)


class TestCriterionOptimizer(unittest.TestCase):
    def test_showalter_violated(self):
        A = showex_matrix2(1.0, 0.5)
        report = check_logconvex_criterion(A)
        logging.info(f"criterion report: {report.to_dict()}")
        self.assertTrue(report.violated)
        self.assertLess(report.extremal_value, -0.48)
        self.assertAlmostEqual(
            report.extremal_value,
            criterion_value(A, report.witness),
            delta=1e-10,
        )
        self.assertAlmostEqual(
            evaluate_at(A, "log-convexity-criterion", report.witness),
            report.extremal_value,
            delta=1e-10,
        )
        self.assertAlmostEqual(
            torch.linalg.vector_norm(report.witness).item(), 1.0, places=12
        )

    def test_descent_improves_sampling(self):
        A = showex_matrix2(1.0, 0.5)
        report = check_logconvex_criterion(A)
        self.assertLessEqual(
            report.extremal_value, report.method["best_sample"]
        )

    def test_deterministic(self):
        A = random_family("unrestricted", 4, seed=7)
        config = CriterionConfig.from_config(seed=123)
        first = check_logconvex_criterion(A, config=config)
        second = check_logconvex_criterion(A, config=config)
        self.assertEqual(first.extremal_value, second.extremal_value)
        self.assertTrue(torch.equal(first.witness, second.witness))

    def test_normal_holds(self):
        for seed in range(10):
            A = random_family("normal-accretive", 4, seed=seed)
            report = check_logconvex_criterion(A)
            self.assertTrue(report.holds)
            self.assertGreaterEqual(report.extremal_value, -1e-9)

    def test_identity_equality(self):
        report = check_logconvex_criterion(identity(3))
        self.assertTrue(report.holds)
        self.assertAlmostEqual(report.extremal_value, 0.0, delta=1e-12)


class TestShowalterFamily(unittest.TestCase):
    def test_verdict_pattern(self):
        generator = torch.Generator().manual_seed(2)
        log_lams = torch.empty(20, dtype=torch.float64).uniform_(
            math.log(0.1), math.log(10.0), generator=generator
        )
        uniform = torch.rand(20, dtype=torch.float64, generator=generator)
        deltas = 0.5 * (1.0 - uniform)

        for lam, delta in zip(log_lams.exp().tolist(), deltas.tolist()):
            A = showex_matrix2(lam, delta)
            _, positive = check_accretivity(A)
            self.assertTrue(positive.holds)
            self.assertAlmostEqual(
                lower_bound_m(A), lam, delta=1e-8 * max(1.0, lam)
            )
            self.assertTrue(check_semiangle(A).holds)

            hyponormal = check_hyponormal(A)
            self.assertTrue(hyponormal.violated)
            self.assertLessEqual(
                hyponormal.extremal_value, -6.0 * lam**2 + 1e-6
            )

            report = check_logconvex_criterion(A)
            self.assertTrue(report.violated)
            self.assertLess(criterion_value(A, report.witness), -1e-8)
            logging.info(
                f"lambda={lam:.3f}, delta={delta:.3f}: "
                f"g = {report.extremal_value:.4e}"
            )


class TestBruteForce(unittest.TestCase):
    def test_normal_matrices(self):
        # Normal matrices satisfy the criterion whatever their spectrum
        for seed in range(100):
            n = 2 + seed % 4
            A = random_family("normal-accretive", n, seed=seed)
            A = A - 1.2 * identity(n)
            witness = brute_force_criterion_min(A, n_samples=10000, seed=seed)
            self.assertGreaterEqual(witness.value, -1e-9)
            self.assertEqual(witness.origin, "sampled")

    def test_showalter(self):
        A = showex_matrix2(1.0, 0.5)
        witness = brute_force_criterion_min(A, n_samples=10000, seed=0)
        logging.info(f"brute force min {witness.value}")
        self.assertLess(witness.value, -0.4)
        self.assertAlmostEqual(
            witness.value, criterion_value(A, witness.x), places=12
        )

        optimized = check_logconvex_criterion(A)
        self.assertLessEqual(optimized.extremal_value, witness.value + 1e-10)

    def test_agrees_with_descent(self):
        outcomes = set()
        for seed in range(24):
            kind = RANDOM_KINDS[seed % len(RANDOM_KINDS)]
            A = random_family(kind, 2 + seed % 2, seed=seed)
            sampled = brute_force_criterion_min(A, n_samples=5000, seed=seed)
            report = check_logconvex_criterion(A)
            logging.info(
                f"{kind} seed {seed}: sampled {sampled.value:.3e}, "
                f"descent {report.extremal_value:.3e}"
            )
            if sampled.value < -report.tolerance:
                self.assertTrue(report.violated)
                self.assertLess(report.extremal_value, 0.0)
            outcomes.add(report.status)

        self.assertEqual(outcomes, {"holds", "violated"})

    def test_deterministic(self):
        A = random_family("unrestricted", 3, seed=1)
        first = brute_force_criterion_min(A, n_samples=1000, seed=5)
        second = brute_force_criterion_min(A, n_samples=1000, seed=5)
        self.assertEqual(first.value, second.value)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    unittest.main()
