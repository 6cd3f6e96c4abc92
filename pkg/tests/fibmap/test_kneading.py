from __future__ import annotations

import math
import unittest

from src.fibmap.errors import DomainError, ShapeError
from src.fibmap.fib_arith import _u, fib, zeckendorf
from src.fibmap.kneading import (
    ClassASeq,
    KneadingSeries,
    SignSeq,
    admissible,
    entropy_from_kneading,
    fib_classA,
    fib_sign,
    fib_signs,
    first_difference,
    renormalize_kneading,
)
from src.fibmap.mp_dynamics import itinerary, orbit_quadratic

FIBONACCI_GROWTH = 1.7292119317


def _lap_growth(c: float, K: int = 22, window: int = 10) -> float:
    """Growth of the lap number of f^n for x^2 + c, by counting preimages of 0."""
    level = [0.0]
    counts = []
    for _ in range(K):
        counts.append(len(level))
        nxt = []
        for y in level:
            if y > c:
                r = math.sqrt(y - c)
                nxt.extend((r, -r))
            elif y == c:
                nxt.append(0.0)
        level = nxt
    laps = [1 + sum(counts[:n]) for n in range(1, K + 1)]
    return (laps[-1] / laps[-1 - window]) ** (1.0 / window)


class FibSignTests(unittest.TestCase):
    def test_first_signs(self) -> None:
        self.assertEqual(fib_signs(13).to_string(), "-++---+--++-+")

    def test_block_recursion_matches_closed_form(self) -> None:
        signs = fib_signs(3000)
        for i in range(1, 3001):
            self.assertEqual(signs.at(i), fib_sign(i), i)

    def test_fibonacci_indices(self) -> None:
        # sign at u(n) depends on the parity of (n+1)(n+2)/2
        for n in range(1, 20):
            expected = -1 if ((n + 1) * (n + 2) // 2) % 2 else 1
            self.assertEqual(fib_sign(fib(n)), expected)

    def test_domain(self) -> None:
        with self.assertRaises(DomainError):
            fib_sign(0)

    def test_sign_string_round_trip(self) -> None:
        s = SignSeq.from_string("-+--+")
        self.assertEqual(s.to_string(), "-+--+")
        self.assertEqual(s.first_disagreement(SignSeq.from_string("-+-++")), 4)
        with self.assertRaises(DomainError):
            SignSeq.from_string("-x")


class KneadingSeriesTests(unittest.TestCase):
    def test_epsilon_is_cumulative_sign_product(self) -> None:
        eps = KneadingSeries.fibonacci(10000)
        signs = fib_signs(10000)
        acc = 1
        for i in range(1, 10001):
            acc *= signs.at(i)
            self.assertEqual(eps.eps(i), acc)

    def test_fibonacci_series_is_admissible(self) -> None:
        self.assertTrue(admissible(KneadingSeries.fibonacci(300)))

    def test_full_map_is_admissible(self) -> None:
        self.assertTrue(admissible(KneadingSeries.full_map(50)))

    def test_mutated_series_is_rejected(self) -> None:
        coeffs = list(KneadingSeries.fibonacci(60).coefficients)
        coeffs[2] = -coeffs[2]
        verdict = admissible(KneadingSeries(tuple(coeffs)))
        self.assertFalse(verdict)
        self.assertEqual((verdict.failing_m, verdict.failing_i), (1, 6))

    def test_first_difference_lies_at_fibonacci_offsets(self) -> None:
        eps = KneadingSeries.fibonacci(3000)
        for m in range(1, 400):
            n1 = zeckendorf(m).indices[0]
            allowed = {_u(n1 - 1), _u(n1)}
            if n1 == 1:
                allowed.add(2)
            self.assertIn(first_difference(eps, m), allowed, m)

    def test_series_must_start_with_one(self) -> None:
        with self.assertRaises(DomainError):
            KneadingSeries((-1, 1))


class EntropyTests(unittest.TestCase):
    def test_fibonacci_growth_rate(self) -> None:
        est = entropy_from_kneading(KneadingSeries.fibonacci(800))
        self.assertAlmostEqual(est.growth_rate, FIBONACCI_GROWTH, delta=1e-6)
        self.assertAlmostEqual(est.entropy, math.log(FIBONACCI_GROWTH), delta=1e-6)
        self.assertLessEqual(abs(1.0 / est.root - 1.0 / est.root_doubled), 1e-7)

    def test_full_map(self) -> None:
        est = entropy_from_kneading(KneadingSeries.full_map(200))
        self.assertAlmostEqual(est.growth_rate, 2.0, places=8)

    def test_zero_entropy_without_root(self) -> None:
        eps = KneadingSeries.from_signs(SignSeq((-1,) * 200))
        est = entropy_from_kneading(eps)
        self.assertEqual(est.growth_rate, 1.0)
        self.assertEqual(est.entropy, 0.0)
        self.assertIsNone(est.root)

    def test_horizon_must_cover_doubled_truncation(self) -> None:
        with self.assertRaises(DomainError):
            entropy_from_kneading(KneadingSeries.fibonacci(10), 6)

    def test_matches_lap_counting(self) -> None:
        orb = orbit_quadratic("-1.6", 120, 256)
        eps = KneadingSeries.from_signs(itinerary(orb))
        est = entropy_from_kneading(eps, 60, tol=1e-6)
        self.assertAlmostEqual(est.growth_rate, _lap_growth(-1.6), delta=0.03 * est.growth_rate)


class ClassASequenceTests(unittest.TestCase):
    def test_prefixes(self) -> None:
        self.assertEqual(fib_classA(1, 13).to_string(), "JMPJPJMMJMPJM")
        self.assertEqual(fib_classA(-1, 13).to_string(), "JPPJMJPMJPPJP")

    def test_block_structure(self) -> None:
        seq = fib_classA(1, fib(12)).to_string()
        for n in range(3, 11):
            head = seq[: fib(n - 1)]
            block = seq[fib(n) : fib(n) + fib(n - 1)]
            self.assertEqual(block[:-1], head[:-1])
            self.assertNotEqual(block[-1], head[-1])

    def test_renormalization_maps_prefixes(self) -> None:
        for k in (1, -1):
            for n in range(3, 21):
                out = renormalize_kneading(fib_classA(k, fib(n)))
                self.assertEqual(out.component, -k)
                self.assertEqual(out.symbols, fib_classA(-k, fib(n - 1)).symbols, (k, n))

    def test_trailing_symbol_rules(self) -> None:
        seq = ClassASeq.from_string("JMMJP", 1)
        self.assertEqual(renormalize_kneading(seq).to_string(), "JM")
        self.assertEqual(renormalize_kneading(seq, lookahead="J").to_string(), "JMP")

    def test_shape_errors(self) -> None:
        with self.assertRaises(ShapeError):
            renormalize_kneading(ClassASeq.from_string("JJ", 1))
        with self.assertRaises(ShapeError):
            renormalize_kneading(ClassASeq.from_string("MJP", -1))
        with self.assertRaises(DomainError):
            ClassASeq.from_string("JX", 1)


if __name__ == "__main__":
    unittest.main()
