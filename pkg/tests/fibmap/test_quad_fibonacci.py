from __future__ import annotations

import math
import os
import unittest

import mpmath

from src.fibmap.config import REFERENCE_C
from src.fibmap.errors import DomainError, PrecisionError, SearchError, StructuralError
from src.fibmap.fib_arith import fib
from src.fibmap.kneading import fib_signs
from src.fibmap.model_map import ModelParams
from src.fibmap.mp_dynamics import itinerary, orbit_quadratic
from src.fibmap.quad_fibonacci import (
    EXPECTED_FIBONACCI_GROWTH,
    build_cover,
    build_model_cover,
    cover_indices,
    cover_orbit_length,
    derivative_growth_fit,
    dimension_estimate,
    faithful_depth,
    find_c,
    gap_partner,
    parameter_bits,
    parameter_depth,
    return_derivative_ratios,
    scaling_report,
    summability_series,
    target_bits_for,
    verify_closest_returns,
)

SLOW = os.getenv("FIBMAP_SLOW_TESTS") == "1"

# endpoint indices of M^1 .. M^5, left to right
EXPECTED_COVERS = {
    1: [(1, 2)],
    2: [(1, 4), (5, 2)],
    3: [(1, 4), (5, 3), (7, 2)],
    4: [(1, 6), (12, 4), (5, 13), (11, 3), (7, 2)],
    5: [(1, 9), (19, 6), (12, 4), (5, 18), (8, 13), (11, 3), (7, 20), (10, 2)],
}


class FindCTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.located = find_c(10, 64)

    def test_bracket_holds_reference_value(self) -> None:
        self.assertTrue(self.located.contains(REFERENCE_C))
        self.assertGreaterEqual(self.located.matched_horizon, fib(10))
        self.assertGreaterEqual(self.located.agreeing_digits(REFERENCE_C), 8)

    def test_schedule_starts_above_working_bits(self) -> None:
        self.assertEqual(self.located.schedule[0], 192)
        self.assertEqual(self.located.precision, self.located.schedule[-1])
        self.assertGreater(self.located.width_bits, 20)

    def test_located_itinerary(self) -> None:
        orb = orbit_quadratic(self.located.c, fib(10), self.located.precision)
        self.assertEqual(itinerary(orb).signs, fib_signs(fib(10)).signs)

    def test_bad_bracket(self) -> None:
        with self.assertRaises(SearchError):
            find_c(6, 64, bracket=("-1.5", "-1"))

    def test_domain(self) -> None:
        with self.assertRaises(DomainError):
            find_c(4, 64)
        with self.assertRaises(DomainError):
            find_c(10, 32)


class ParameterDepthTests(unittest.TestCase):
    def test_decimal_and_rational_bits(self) -> None:
        self.assertAlmostEqual(parameter_bits(REFERENCE_C), 22 * math.log2(10))
        self.assertAlmostEqual(parameter_bits("1/8"), 3.0)
        self.assertAlmostEqual(parameter_bits("-1.5"), math.log2(10))
        self.assertIsNone(parameter_bits(mpmath.mpf("-1.5")))
        self.assertIsNone(parameter_bits(-1.5))

    def test_faithful_depth(self) -> None:
        self.assertEqual(faithful_depth(80), 14)
        self.assertEqual(faithful_depth(79), 13)
        self.assertEqual(faithful_depth(0), 1)
        self.assertEqual(parameter_depth(REFERENCE_C), 13)
        self.assertEqual(parameter_depth(REFERENCE_C, 16), 16)
        self.assertIsNone(parameter_depth(mpmath.mpf(-2)))

    def test_target_bits(self) -> None:
        self.assertEqual(target_bits_for(16), 150)
        self.assertEqual(target_bits_for(18), 172)
        for n in range(5, 24):
            self.assertGreaterEqual(faithful_depth(target_bits_for(n)), n)


class ClosestReturnTests(unittest.TestCase):
    def test_reference_parameter(self) -> None:
        report = verify_closest_returns(REFERENCE_C, 10, 128)
        self.assertTrue(report.ok, report.failures)
        self.assertTrue(report.x4_negative)
        self.assertIsNone(report.first_failure)
        for a, b in zip(report.distances, report.distances[1:]):
            self.assertLess(b, a)

    def test_full_map_fails_at_two(self) -> None:
        report = verify_closest_returns("-2", 6, 64)
        self.assertFalse(report.ok)
        self.assertEqual(report.first_failure, 2)
        self.assertFalse(report.x4_negative)

    def test_mutated_parameter_is_flagged(self) -> None:
        report = verify_closest_returns("-1.8695286321646448888906", 10, 128)
        self.assertFalse(report.ok)
        self.assertIsNotNone(report.first_failure)

    def test_itinerary_matches_fibonacci_signs(self) -> None:
        orb = orbit_quadratic(REFERENCE_C, fib(12), 128)
        self.assertEqual(itinerary(orb).to_string(), fib_signs(fib(12)).to_string())


class CoverTests(unittest.TestCase):
    def test_symbolic_endpoints(self) -> None:
        for n, pairs in EXPECTED_COVERS.items():
            got = [(p, q) for _, _, p, q in cover_indices(n)]
            self.assertEqual(got, pairs, f"M^{n}")

    def test_counts_follow_fibonacci(self) -> None:
        for n in range(1, 12):
            self.assertEqual(len(cover_indices(n)), fib(n))

    def test_numeric_cover_matches_indices(self) -> None:
        orb = orbit_quadratic(REFERENCE_C, cover_orbit_length(8), 128)
        previous = None
        for n in range(1, 9):
            cover = build_cover(REFERENCE_C, n, 128, orbit=orb)
            self.assertEqual(cover.count, fib(n))
            self.assertEqual(cover.endpoint_pairs(), [(p, q) for _, _, p, q in cover_indices(n)])
            total = cover.total_length()
            if previous is not None:
                self.assertLess(total, previous)
            previous = total

    def test_gaps_pair_by_partner_rule(self) -> None:
        cover = build_cover(REFERENCE_C, 5, 128)
        gaps = cover.gaps()
        self.assertEqual(
            gaps, [(9, 19), (6, 12), (4, 5), (18, 8), (13, 11), (3, 7), (20, 10)]
        )
        for a, b in gaps:
            self.assertTrue(gap_partner(a) == b or gap_partner(b) == a, (a, b))

    def test_model_cover(self) -> None:
        for n in range(1, 9):
            cover = build_model_cover(n, ModelParams())
            self.assertEqual(cover.count, fib(n))

    def test_level_beyond_parameter_digits(self) -> None:
        build_cover(REFERENCE_C, 11, 128)
        with self.assertRaises(PrecisionError):
            build_cover(REFERENCE_C, 12, 128)

    def test_find_rejects_unknown_interval(self) -> None:
        cover = build_model_cover(3, ModelParams())
        self.assertEqual(cover.find("J", 0).name, "J^3_0")
        with self.assertRaises(DomainError):
            cover.find("J", 5)


class GapPartnerTests(unittest.TestCase):
    def test_listed_pairs(self) -> None:
        self.assertEqual(gap_partner(9), 19)
        self.assertEqual(gap_partner(4), 5)
        self.assertEqual(gap_partner(3), 7)
        self.assertEqual(gap_partner(6), 12)
        self.assertEqual(gap_partner(13), 11)

    def test_no_gap_at_extremes(self) -> None:
        for value in (0, 1, 2):
            with self.assertRaises(DomainError):
                gap_partner(value)


class ScalingTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.report = scaling_report(REFERENCE_C, 10, 128)

    def test_lambdas_contract(self) -> None:
        for lam in self.report.lambdas.values():
            self.assertGreater(lam, 0.0)
            self.assertLess(lam, 1.0)
        self.assertLess(self.report.sup_lambda, 1.0)
        self.assertLess(self.report.sup_lambda_pair, 1.0)

    def test_first_ratios(self) -> None:
        self.assertAlmostEqual(self.report.lambdas[3], 0.48, delta=0.01)
        self.assertAlmostEqual(self.report.lambdas[4], 0.36, delta=0.01)

    def test_ratio_near_cube_root_half(self) -> None:
        for n in range(3, 9):
            self.assertGreater(self.report.ratios[n], 0.6)
            self.assertLess(self.report.ratios[n], 0.95)
        self.assertGreater(self.report.slope, -0.5)
        self.assertLess(self.report.slope, -0.2)
        self.assertGreater(self.report.a, 0.7)
        self.assertLess(self.report.a, 1.3)

    def test_measure_decreases(self) -> None:
        levels = sorted(self.report.measure)
        for m, n in zip(levels, levels[1:]):
            self.assertLess(self.report.measure[n], self.report.measure[m])
        self.assertIsNotNone(self.report.measure_q)
        self.assertLess(self.report.measure_q, 1.0)

    def test_rows(self) -> None:
        rows = self.report.rows()
        self.assertEqual([r["n"] for r in rows], list(range(1, 11)))
        self.assertIsNone(rows[0]["lambda_n"])

    def test_measure_stops_at_requested_level(self) -> None:
        self.assertEqual(sorted(self.report.measure), list(range(1, 11)))
        shallow = scaling_report(REFERENCE_C, 8, 128, measure_depth=6)
        self.assertEqual(sorted(shallow.measure), list(range(1, 7)))

    def test_measure_cut_two_levels_below_parameter_depth(self) -> None:
        deep = scaling_report(REFERENCE_C, 13, 128)
        self.assertEqual(sorted(deep.measure), list(range(1, 12)))
        for lam in deep.lambdas.values():
            self.assertGreater(lam, 0.0)
            self.assertLess(lam, 1.0)

    def test_level_beyond_parameter_digits(self) -> None:
        with self.assertRaises(PrecisionError):
            scaling_report(REFERENCE_C, 14, 128)

    def test_growing_return_is_structural(self) -> None:
        with self.assertRaises(StructuralError):
            scaling_report(mpmath.mpf(-2), 6, 64)

    def test_domain(self) -> None:
        with self.assertRaises(DomainError):
            scaling_report(REFERENCE_C, 3, 128)


class DerivativeTests(unittest.TestCase):
    def test_return_ratios(self) -> None:
        rows = return_derivative_ratios(REFERENCE_C, range(2, 11), 128)
        self.assertEqual([r.n for r in rows], list(range(2, 11)))
        self.assertIsNone(rows[0].chain_rule_residual)
        for row in rows:
            self.assertGreaterEqual(row.ratio, 0.5)
            self.assertLessEqual(row.ratio, 2.0)
            if row.n >= 3:
                self.assertLess(row.chain_rule_residual, 1e-30)

    def test_return_ratio_domain(self) -> None:
        with self.assertRaises(DomainError):
            return_derivative_ratios(REFERENCE_C, [1, 2], 128)

    def test_growth_fit_shape(self) -> None:
        fit = derivative_growth_fit(REFERENCE_C, fib(11), 128)
        self.assertEqual(fit.horizon, fib(11))
        self.assertIsNotNone(fit.fibonacci_slope)
        self.assertTrue(math.isfinite(fit.residual_bound))
        self.assertEqual(fit.peak_growth[0][0], 2)
        with self.assertRaises(DomainError):
            derivative_growth_fit(REFERENCE_C, 7, 128)

    def test_growth_fit_cut_at_certified_horizon(self) -> None:
        fit = derivative_growth_fit(REFERENCE_C, 1000, 128)
        self.assertEqual(fit.horizon, fib(13))
        deeper = derivative_growth_fit(REFERENCE_C, 1000, 128, c_depth=11)
        self.assertEqual(deeper.horizon, fib(11))

    def test_summability_cut_at_certified_horizon(self) -> None:
        rep = summability_series(REFERENCE_C, 0.5, 10000, 128, precision_cap=2**12)
        self.assertEqual(rep.horizon, fib(13))
        self.assertEqual(len(rep.increments), fib(13))

    def test_summability(self) -> None:
        half = summability_series(REFERENCE_C, 0.5, 200, 128, threshold=0.5)
        one = summability_series(REFERENCE_C, 1.0, 200, 128, threshold=0.5)
        for a, b in zip(half.partial_sums, half.partial_sums[1:]):
            self.assertGreater(b, a)
        for h, o in zip(half.increments, one.increments):
            if h < 1.0:
                self.assertLessEqual(o, h)
        k = half.first_small_index
        self.assertIsNotNone(k)
        self.assertLess(half.increments[k - 1], 0.5)
        self.assertTrue(all(inc >= 0.5 for inc in half.increments[: k - 1]))
        self.assertIn(2, half.block_increments)
        with self.assertRaises(DomainError):
            summability_series(REFERENCE_C, 0.0, 10, 128)


class DimensionTests(unittest.TestCase):
    def test_quadratic_estimate_decays(self) -> None:
        orb = orbit_quadratic(REFERENCE_C, cover_orbit_length(10), 128)
        covers = [build_cover(REFERENCE_C, n, 128, orbit=orb) for n in range(1, 11)]
        points = dimension_estimate(covers, start=4)
        self.assertEqual([pt.n for pt in points], list(range(4, 11)))
        for a, b in zip(points, points[1:]):
            self.assertLess(b.estimate, a.estimate)
        for a, b in zip(covers, covers[1:]):
            self.assertLessEqual(b.max_length(), a.max_length())

    def test_model_estimate_stays_positive(self) -> None:
        covers = [build_model_cover(n, ModelParams()) for n in range(4, 11)]
        for pt in dimension_estimate(covers):
            self.assertGreater(pt.estimate, 0.3)


@unittest.skipUnless(SLOW, "set FIBMAP_SLOW_TESTS=1 for the deep parameter search")
class DeepSearchTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.located = find_c(18, target_bits_for(18))
        cls.c_depth = cls.located.faithful_depth

    def test_located_to_twelve_digits(self) -> None:
        self.assertGreaterEqual(self.located.agreeing_digits(REFERENCE_C), 12)
        self.assertGreaterEqual(self.c_depth, 18)
        report = verify_closest_returns(self.located.c, 16, 512)
        self.assertTrue(report.ok, report.failures)

    def test_covers_through_level_fourteen(self) -> None:
        orb = orbit_quadratic(self.located.c, cover_orbit_length(14), 512)
        for n in range(1, 15):
            cover = build_cover(self.located.c, n, 512, orbit=orb, c_depth=self.c_depth)
            self.assertEqual(cover.count, fib(n))
            self.assertEqual(cover.endpoint_pairs(), [(p, q) for _, _, p, q in cover_indices(n)])

    def test_scaling_law(self) -> None:
        report = scaling_report(self.located.c, 16, 512, c_depth=self.c_depth)
        self.assertAlmostEqual(report.slope, -1.0 / 3.0, delta=0.03)
        for n in sorted(report.ratios)[-4:]:
            self.assertGreaterEqual(report.ratios[n], 0.72)
            self.assertLessEqual(report.ratios[n], 0.87)
        self.assertEqual(sorted(report.measure), list(range(1, 17)))

    def test_dimension_estimate_decreases_below_half(self) -> None:
        orb = orbit_quadratic(self.located.c, cover_orbit_length(14), 512)
        covers = [
            build_cover(self.located.c, n, 512, orbit=orb, c_depth=self.c_depth)
            for n in range(4, 15)
        ]
        points = dimension_estimate(covers, start=4)
        for a, b in zip(points, points[1:]):
            self.assertLess(b.estimate, a.estimate)
        self.assertLess(points[-1].estimate, 0.5)

    def test_summability_increment_drops_early(self) -> None:
        rep = summability_series(self.located.c, 0.5, fib(16), 512, c_depth=self.c_depth)
        self.assertEqual(rep.horizon, fib(16))
        self.assertIsNotNone(rep.first_small_index)
        self.assertLess(rep.first_small_index, 10**4)

    def test_growth_coefficient(self) -> None:
        fit = derivative_growth_fit(self.located.c, fib(16), 512, c_depth=self.c_depth)
        self.assertEqual(fit.horizon, fib(16))
        self.assertGreaterEqual(fit.slope_m_coeff, 0.6)
        self.assertLessEqual(fit.slope_m_coeff, 0.74)
        self.assertIsNotNone(fit.fibonacci_slope)
        self.assertLess(EXPECTED_FIBONACCI_GROWTH, 1.0)


if __name__ == "__main__":
    unittest.main()
