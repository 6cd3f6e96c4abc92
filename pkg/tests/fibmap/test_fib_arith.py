from __future__ import annotations

from itertools import combinations
import unittest

from src.fibmap.errors import DomainError, UnsupportedRepresentationError
from src.fibmap.fib_arith import (
    FibIndexSet,
    cylinder_word,
    decode,
    enumerate_cylinders,
    epsilon,
    fib,
    fib_index,
    sigma_power,
    sigma_shift,
    successor,
    zeckendorf,
)


def _subset_sum_representations(m: int, top: int = 14):
    """Every non-consecutive index set summing to m (brute force)."""
    idx = range(1, top + 1)
    found = []
    for r in range(1, 6):
        for combo in combinations(idx, r):
            if any(b - a < 2 for a, b in zip(combo, combo[1:])):
                continue
            if sum(fib(i) for i in combo) == m:
                found.append(combo)
    return found


class FibonacciNumbersTests(unittest.TestCase):
    def test_first_values(self) -> None:
        self.assertEqual([fib(n) for n in range(1, 11)], [1, 2, 3, 5, 8, 13, 21, 34, 55, 89])

    def test_rejects_non_positive_index(self) -> None:
        with self.assertRaises(DomainError):
            fib(0)
        with self.assertRaises(DomainError):
            fib(-3)

    def test_fib_index(self) -> None:
        self.assertEqual(fib_index(89), 10)
        self.assertIsNone(fib_index(90))
        self.assertIsNone(fib_index(0))


class ZeckendorfTests(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(zeckendorf(12).indices, (1, 3, 5))
        self.assertEqual(str(zeckendorf(12)), "u(1)+u(3)+u(5)")
        self.assertEqual(zeckendorf(4).indices, (1, 3))
        self.assertEqual(zeckendorf(5).indices, (4,))

    def test_value_round_trip_and_spacing(self) -> None:
        for m in range(1, 2000):
            s = zeckendorf(m)
            self.assertEqual(s.value, m)
            self.assertTrue(all(b - a >= 2 for a, b in zip(s.indices, s.indices[1:])))

    def test_matches_unique_subset_sum(self) -> None:
        for m in range(1, 200):
            reps = _subset_sum_representations(m)
            self.assertEqual(len(reps), 1, m)
            self.assertEqual(reps[0], zeckendorf(m).indices)

    def test_zero_and_negative(self) -> None:
        with self.assertRaises(DomainError):
            zeckendorf(0)
        self.assertTrue(FibIndexSet.from_int(0).is_empty)
        with self.assertRaises(DomainError):
            FibIndexSet.from_int(-1)

    def test_consecutive_indices_rejected(self) -> None:
        with self.assertRaises(DomainError):
            FibIndexSet((2, 3))
        with self.assertRaises(DomainError):
            decode([4, 4])


class SuccessorAndShiftTests(unittest.TestCase):
    def test_successor_of_finite_points(self) -> None:
        for m in range(0, 500):
            self.assertEqual(successor(FibIndexSet.from_int(m)).value, m + 1)

    def test_sigma_shift_examples(self) -> None:
        self.assertEqual(sigma_shift(zeckendorf(12)).indices, (2, 4, 6))
        self.assertEqual(sigma_power(12, 1), 2 + 5 + 13)
        self.assertEqual(sigma_power(1, 3), fib(4))
        self.assertEqual(sigma_power(0, 5), 0)

    def test_sigma_maps_fibonacci_to_next(self) -> None:
        for n in range(1, 20):
            self.assertEqual(sigma_power(fib(n), 1), fib(n + 1))

    def test_tail_canonical_form(self) -> None:
        # u(3) + tail(5) is the tail starting at 3
        self.assertEqual(FibIndexSet((1, 3), 5), FibIndexSet((), 1))
        self.assertEqual(FibIndexSet((2,), 5).indices, (2,))

    def test_successor_with_tail(self) -> None:
        s = FibIndexSet((), 3)
        self.assertEqual(successor(s), FibIndexSet((), 1))
        self.assertEqual(successor(FibIndexSet((1,), 5)), FibIndexSet((2,), 5))
        self.assertEqual(successor(FibIndexSet((2,), 5)), FibIndexSet((), 3))

    def test_maximal_points_wrap_to_zero(self) -> None:
        self.assertTrue(successor(FibIndexSet((), 1)).is_empty)
        self.assertTrue(successor(FibIndexSet((), 2)).is_empty)

    def test_infinite_point_has_no_integer_value(self) -> None:
        with self.assertRaises(UnsupportedRepresentationError):
            FibIndexSet((), 4).value

    def test_shift_of_tail(self) -> None:
        self.assertEqual(sigma_shift(FibIndexSet((1,), 4)), FibIndexSet((2,), 5))


class EpsilonTests(unittest.TestCase):
    def test_parity_of_summands(self) -> None:
        self.assertEqual(epsilon(1), -1)
        self.assertEqual(epsilon(4), 1)
        self.assertEqual(epsilon(12), -1)

    def test_domain(self) -> None:
        with self.assertRaises(DomainError):
            epsilon(0)


class CylinderTests(unittest.TestCase):
    def test_counts_follow_fibonacci(self) -> None:
        for k in range(1, 15):
            self.assertEqual(len(enumerate_cylinders(k)), fib(k + 1))

    def test_words_are_sorted_and_admissible(self) -> None:
        words = enumerate_cylinders(6)
        self.assertEqual(words, sorted(words))
        self.assertTrue(all("11" not in w for w in words))

    def test_cylinder_word(self) -> None:
        self.assertEqual(cylinder_word(zeckendorf(12), 6), "101010")
        self.assertEqual(cylinder_word(FibIndexSet((), 2), 5), "01010")
        self.assertEqual(FibIndexSet.from_word("10100").value, 1 + 3)


if __name__ == "__main__":
    unittest.main()
