from __future__ import annotations

from fractions import Fraction
import math
import unittest

import mpmath
from mpmath import mpf, workprec

from src.fibmap.errors import DomainError, PrecisionError, ResolutionError
from src.fibmap.kneading import SYMBOL_J, SYMBOL_TMINUS, SYMBOL_TPLUS
from src.fibmap.mp_dynamics import (
    MPValue,
    certified_signs,
    derivative_product,
    escalating_orbit,
    itinerary,
    log2_derivative_series,
    orbit_piecewise,
    orbit_quadratic,
    poincare_length,
    render,
    to_mpf,
)


def _float_orbit(c: float, n: int):
    x, out = 0.0, []
    for _ in range(n):
        x = x * x + c
        out.append(x)
    return out


class _AffineTent:
    """J = [-3, -2] mapped affinely onto T = [-1, 1]; T folded by 2x^2 - 3."""

    component = 1

    @property
    def critical_point(self) -> mpf:
        return mpf(0)

    def branch_of(self, x, slack):
        if -3 - slack <= x <= -2 + slack:
            return SYMBOL_J
        if -1 - slack <= x <= 1 + slack:
            return "T"
        return None

    def apply(self, x):
        if x < -1.5:
            return 2 * x + 5
        return 2 * x * x - 3

    def derivative(self, x):
        return mpf(2) if x < -1.5 else 4 * x


class QuadraticOrbitTests(unittest.TestCase):
    def test_agrees_with_float_orbit(self) -> None:
        orb = orbit_quadratic("-1.5", 20, 128)
        ref = _float_orbit(-1.5, 20)
        for i in range(1, 21):
            self.assertAlmostEqual(float(orb.x(i)), ref[i - 1], delta=1e-6)
        self.assertEqual(orb.x(0), 0)
        self.assertEqual(orb.working_bits, 256)

    def test_certified_digits_shrink_along_chaotic_orbit(self) -> None:
        orb = orbit_quadratic("-1.9", 60, 128)
        self.assertGreater(orb.digits(1), 30)
        self.assertLess(orb.digits(60), orb.digits(1))

    def test_precision_exhaustion(self) -> None:
        with self.assertRaises(PrecisionError) as ctx:
            orbit_quadratic("-1.99", 400, 64)
        self.assertIsNotNone(ctx.exception.index)
        partial = orbit_quadratic("-1.99", 400, 64, allow_partial=True)
        self.assertLess(len(partial), 400)

    def test_escalation_doubles_precision(self) -> None:
        orb = escalating_orbit("-1.99", 400, 64, 2**12)
        self.assertEqual(len(orb), 400)
        self.assertGreater(orb.precision, 64)
        self.assertGreater(min(orb.certified_digits), 0)
        same = escalating_orbit("-1.5", 20, 128, 128)
        self.assertEqual(same.precision, 128)

    def test_escalation_stops_at_cap(self) -> None:
        with self.assertRaises(PrecisionError) as ctx:
            escalating_orbit("-1.99", 400, 64, 64)
        self.assertIn("precision cap 64", str(ctx.exception))
        self.assertIsNotNone(ctx.exception.index)

    def test_exact_superattracting_orbit(self) -> None:
        orb = orbit_quadratic(-1, 6, 64)
        self.assertEqual(certified_signs(orb), [-1, 0, -1, 0, -1, 0])
        with self.assertRaises(ResolutionError):
            itinerary(orb)

    def test_itinerary_signs(self) -> None:
        orb = orbit_quadratic("-1.6", 30, 128)
        ref = _float_orbit(-1.6, 30)
        expected = [1 if x > 0 else -1 for x in ref[:15]]
        self.assertEqual(list(itinerary(orb).signs[:15]), expected)

    def test_domain(self) -> None:
        with self.assertRaises(DomainError):
            orbit_quadratic("-1.5", 0, 128)
        with self.assertRaises(DomainError):
            orbit_quadratic("-1.5", 10, 32)


class DerivativeTests(unittest.TestCase):
    def test_product_matches_chain_rule(self) -> None:
        orb = orbit_quadratic("-1.7", 25, 128)
        ref = _float_orbit(-1.7, 25)
        expected = math.prod(abs(2 * x) for x in ref[:10])
        got = float(derivative_product(orb, 1, 10))
        self.assertAlmostEqual(got / expected, 1.0, places=8)
        self.assertEqual(float(derivative_product(orb, 3, 0)), 1.0)

    def test_log_series_is_cumulative(self) -> None:
        orb = orbit_quadratic("-1.7", 25, 128)
        logs = log2_derivative_series(orb)
        with workprec(orb.working_bits):
            d = derivative_product(orb, 1, 12).value
            self.assertAlmostEqual(logs[11], float(mpmath.log(d, 2)), places=9)

    def test_window_outside_orbit(self) -> None:
        orb = orbit_quadratic("-1.7", 10, 128)
        with self.assertRaises(DomainError):
            derivative_product(orb, 5, 10)


class PoincareLengthTests(unittest.TestCase):
    def test_known_value(self) -> None:
        # [H:L] for L = [1,2] in H = [0,3]: log(2*2 / (1*1))
        val = poincare_length(0, 1, 2, 3)
        self.assertAlmostEqual(float(val), math.log(4.0), places=12)

    def test_accepts_mixed_inputs(self) -> None:
        val = poincare_length(Fraction(0), "1", MPValue(mpf(2), 200), 3)
        self.assertEqual(val.precision, 200)

    def test_strict_order(self) -> None:
        with self.assertRaises(DomainError):
            poincare_length(0, 1, 1, 3)


class RenderingTests(unittest.TestCase):
    def test_render_digits(self) -> None:
        with workprec(200):
            self.assertEqual(render(to_mpf("1/3"), 5), "0.33333")
        self.assertEqual(to_mpf(Fraction(1, 4)), mpf("0.25"))


class PiecewiseOrbitTests(unittest.TestCase):
    def test_symbols_follow_branches(self) -> None:
        fmap = _AffineTent()
        orb, seq, escape = orbit_piecewise(fmap, 0, 3, 128)
        # 0 -> -3 (J) -> -1 (T-) -> -1 (T-)
        self.assertEqual(seq.to_string(), SYMBOL_J + SYMBOL_TMINUS + SYMBOL_TMINUS)
        self.assertIsNone(escape)
        self.assertEqual(float(orb.x(1)), -3.0)

    def test_escape_is_reported(self) -> None:
        # 0.9 -> -1.38 lies in the gap between J and T
        orb, seq, escape = orbit_piecewise(_AffineTent(), "0.9", 3, 128)
        self.assertIsNotNone(escape)
        self.assertEqual(escape.index, 1)
        self.assertEqual(len(seq), 0)
        self.assertEqual(len(orb), 0)

    def test_critical_hit_is_unresolved(self) -> None:
        # 0.5 -> -2.5 -> 0
        with self.assertRaises(ResolutionError):
            orbit_piecewise(_AffineTent(), "0.5", 4, 128)

    def test_start_outside_domain(self) -> None:
        with self.assertRaises(DomainError):
            orbit_piecewise(_AffineTent(), "5", 3, 128)


if __name__ == "__main__":
    unittest.main()
