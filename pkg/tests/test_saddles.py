import math
import unittest

from stadium_entropy.coding import parse_word
from stadium_entropy.combinatorics import count_Q
from stadium_entropy.errors import DomainError, EmptyArcRunError
from stadium_entropy.saddles import (
    SaddleConnection,
    bound_audit,
    count_N,
    find_saddles,
    launch_family,
    resimulate,
    saddle_growth_estimate,
    saddle_signed_composition,
    verify_uniqueness,
)
from stadium_entropy.table import Corner, StadiumTable

from tests.utils import DEFAULT_L


def connection(start, end, word="", param=0.5, length=None) -> SaddleConnection:
    letters = parse_word(word).letters if word else ()
    k = len(letters)
    return SaddleConnection(
        start=start,
        end=end,
        letters=letters,
        length=length or k + 1,
        weight=k + int(start.is_center) + int(end.is_center),
        launch_param=param,
        residual=0.0,
    )


def short_keys(count, n) -> set:
    return {key for key, members in count.classes.items() if members[0].length <= n}


class SaddleSearchTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.table = StadiumTable(DEFAULT_L)
        cls.count = count_N(cls.table, 2, grid=2000)
        cls.coarse = count_N(cls.table, 2, grid=1000)
        cls.longer = count_N(cls.table, 4, grid=1000)

    def test_axial_and_vertical_connections(self):
        keys = set(self.count.classes)
        self.assertIn(("cL", "cR", ("cL", "cR")), keys)
        self.assertIn(("b", "p", ("b", "p")), keys)
        self.assertIn(("g", "r", ("g", "r")), keys)

        axial = self.count.classes[("cL", "cR", ("cL", "cR"))][0]
        self.assertEqual(axial.length, 1)
        self.assertEqual(axial.weight, 2)
        self.assertAlmostEqual(axial.launch_param, math.pi, places=8)

        vertical = self.count.classes[("b", "p", ("b", "p"))][0]
        self.assertEqual(vertical.length, 1)
        self.assertEqual(vertical.weight, 0)

    def test_connections_resimulate(self):
        for sc in self.count.connections:
            with self.subTest(code=sc.code_string()):
                code_ok, residual = resimulate(self.table, sc)
                self.assertTrue(code_ok)
                self.assertLessEqual(residual, 1e-10)

    def test_unique(self):
        report = verify_uniqueness(self.count.connections)
        self.assertTrue(report.unique)
        self.assertEqual(report.duplicates, {})

    def test_counts_monotone(self):
        counts = self.count.counts
        self.assertEqual(sorted(counts), [1, 2])
        self.assertGreater(counts[1], 0)
        self.assertLessEqual(counts[1], counts[2])

    def test_audit(self):
        rows = bound_audit(self.count, count_Q(3))
        self.assertEqual([row.n for row in rows], [1, 2])
        self.assertTrue(all(row.ok for row in rows))
        self.assertEqual(rows[1].conservative_bound, 36 * (1 + 1 + 4 + 12))
        with self.assertRaises(DomainError):
            bound_audit(self.count, count_Q(2))

    def test_counts_do_not_depend_on_max_len(self):
        # Tracing further must not change which short connections are found
        for n in (1, 2):
            with self.subTest(n=n):
                self.assertEqual(short_keys(self.coarse, n), short_keys(self.longer, n))
                self.assertEqual(self.coarse.N(n), self.longer.N(n))

    def test_grid_refinement_keeps_connections(self):
        self.assertLessEqual(set(self.coarse.classes), set(self.count.classes))
        for n in (1, 2):
            self.assertLessEqual(self.coarse.N(n), self.count.N(n))

    def test_orbits_through_a_centre_are_dropped(self):
        # The axial orbit continues from cR back through cL; only cL::cR counts
        for letter in ("R+", "R-"):
            self.assertNotIn(("cL", "cL", ("cL", letter, "cL")), self.longer.classes)
        self.assertIn(("cL", "cR", ("cL", "cR")), self.longer.classes)

    def test_short_connections_between_b_and_p(self):
        # Three classes of at most two links, against Q(0) + Q(1) = 2
        for code in (("b", "p"), ("b", "L-", "p"), ("b", "R+", "p")):
            with self.subTest(code=code):
                members = self.count.classes[("b", "p", code)]
                self.assertEqual(members[0].length, len(code) - 1)
                self.assertEqual(members[0].weight, len(code) - 2)
        self.assertEqual(count_Q(2).partial_sum(1), 2)

    def test_tight_bound_is_reported(self):
        rows = bound_audit(self.count, count_Q(3))
        self.assertEqual([row.tight_bound for row in rows], [36, 72])
        for row in rows:
            self.assertEqual(row.tight_ok, row.N <= row.tight_bound)

    def test_growth_estimate(self):
        estimate = saddle_growth_estimate(self.count)
        self.assertEqual([n for n, _ in estimate], [1, 2])
        self.assertAlmostEqual(estimate[0][1], math.log(self.count.N(1)))

    def test_search_arguments(self):
        with self.assertRaises(DomainError):
            find_saddles(self.table, Corner.b, 2, grid=10)
        with self.assertRaises(DomainError):
            find_saddles(self.table, Corner.b, 0, grid=1000)

    def test_launch_families(self):
        family = launch_family(self.table, Corner.cL)
        self.assertEqual(family.kind, "arc")
        self.assertGreater(family.lo, 0.5 * math.pi)
        self.assertLess(family.hi, 1.5 * math.pi)

        family = launch_family(self.table, Corner.r)
        self.assertEqual(family.kind, "direction")
        self.assertGreater(family.lo, math.pi)


class SaddleBookkeepingTestCase(unittest.TestCase):
    def test_duplicates_are_reported(self):
        first = connection(Corner.b, Corner.p, "L+", param=4.0)
        second = connection(Corner.b, Corner.p, "L+", param=4.5)
        report = verify_uniqueness([first, second])
        self.assertFalse(report.unique)
        self.assertEqual(list(report.duplicates.values()), [[4.0, 4.5]])

        # Detections of one orbit within the merge window count once
        close = connection(Corner.b, Corner.p, "L+", param=4.0 + 1e-12)
        self.assertTrue(verify_uniqueness([first, close]).unique)

    def test_signed_compositions(self):
        sc = connection(Corner.b, Corner.g, "TBR+TB")
        self.assertEqual(saddle_signed_composition(sc).terms, (2, 1, 2))

        sc = connection(Corner.r, Corner.p, "TBTBL-BTBT")
        self.assertEqual(saddle_signed_composition(sc).terms, (4, 1, -4))

        # Centre endpoints count as a collision with their semicircle
        axial = connection(Corner.cL, Corner.cR)
        self.assertEqual(saddle_signed_composition(axial).pairs, ((0, 1), (0, 1)))
        self.assertEqual(axial.weight, 2)

        with self.assertRaises(EmptyArcRunError):
            saddle_signed_composition(connection(Corner.b, Corner.p))

    def test_code_string(self):
        sc = connection(Corner.b, Corner.p, "TBR+TB")
        self.assertEqual(sc.code_string(), "b:TBR+TB:p")
        self.assertEqual(sc.as_row()["length"], 6)


if __name__ == "__main__":
    unittest.main()
