import math
import unittest
from unittest import mock

import numpy as np

from stadium_entropy import dynamics
from stadium_entropy.coding import code_orbit
from stadium_entropy.dynamics import (
    FLAG_JUNCTION,
    FLAG_PERPENDICULAR,
    billiard_map,
    billiard_map_inverse,
    orbit,
    orbit_or_raise,
    reflect,
    trace,
)
from stadium_entropy.errors import (
    DomainError,
    GeometryError,
    GrazingError,
    SingularOrbitError,
    StadiumError,
)
from stadium_entropy.table import PhasePoint, Side, StadiumTable

from tests.utils import DEFAULT_L, SQRT_HALF


class DynamicsTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self.table = StadiumTable(DEFAULT_L)

    def test_axial_orbit(self):
        """The horizontal diameter bounces between the semicircles"""
        start = self.table.phase_point(Side.L, math.pi, 0.0)
        result = orbit(self.table, start, 4)

        self.assertTrue(result.ok)
        self.assertEqual(
            [pp.side for pp in result.points], [Side.L, Side.R, Side.L, Side.R, Side.L]
        )
        for segment in result.segments:
            self.assertAlmostEqual(segment.tau, DEFAULT_L + 2.0)
        for transit in result.transits:
            self.assertIn(FLAG_PERPENDICULAR, transit.flags)

    def test_rectangle_orbit(self):
        """A period-four orbit through the points at 45 degrees on both semicircles"""
        start = self.table.phase_point(Side.L, 0.75 * math.pi, -0.25 * math.pi)
        result = orbit(self.table, start, 4)

        self.assertTrue(result.ok)
        points = result.points
        self.assertEqual([pp.side for pp in points], [Side.L, Side.L, Side.R, Side.R, Side.L])
        expected = [
            (-SQRT_HALF, -SQRT_HALF),
            (DEFAULT_L + SQRT_HALF, -SQRT_HALF),
            (DEFAULT_L + SQRT_HALF, SQRT_HALF),
            (-SQRT_HALF, SQRT_HALF),
        ]
        for pp, (x, y) in zip(points[1:], expected):
            self.assertAlmostEqual(pp.point.x, x)
            self.assertAlmostEqual(pp.point.y, y)
            self.assertAlmostEqual(pp.theta, -0.25 * math.pi)
        self.assertLess(self.table.phase_distance(points[4], start), 1e-9)

    def test_theta_preserved_along_arc(self):
        """Successive collisions on one semicircle keep the same angle"""
        start = self.table.phase_point(Side.L, math.radians(220.0), math.radians(70.0))
        image = billiard_map(self.table, start)
        self.assertEqual(image.side, Side.L)
        self.assertAlmostEqual(image.point.coord, math.radians(180.0))
        self.assertAlmostEqual(image.theta, math.radians(70.0), places=12)

        # 220, 180, 140 and 100 degrees, then off the arc
        result = orbit(self.table, start, 4)
        self.assertEqual([pp.side for pp in result.points[:4]], [Side.L] * 4)
        for pp in result.points[1:4]:
            self.assertAlmostEqual(pp.theta, math.radians(70.0), places=12)

    def test_time_reversal(self):
        for side, coord, theta in (
            (Side.B, 0.7, 0.4),
            (Side.L, 2.0, -0.9),
            (Side.R, 0.3, 1.2),
            (Side.T, 1.3, -0.2),
        ):
            with self.subTest(side=side, coord=coord, theta=theta):
                pp = self.table.phase_point(side, coord, theta)
                back = billiard_map_inverse(self.table, billiard_map(self.table, pp))
                self.assertLess(self.table.phase_distance(back, pp), 1e-9)

    def test_vertical_bounce(self):
        start = self.table.phase_point(Side.B, 1.0, 0.0)
        image = billiard_map(self.table, start)
        self.assertEqual(image.side, Side.T)
        self.assertAlmostEqual(image.point.x, 1.0)
        self.assertAlmostEqual(image.theta, 0.0)

    def test_junction_hit_is_singular(self):
        # From the middle of B straight at the junction r = (2, 1)
        start = self.table.phase_point(Side.B, 1.0, -math.asin(1.0 / math.sqrt(5.0)))
        with self.assertRaises(SingularOrbitError):
            billiard_map(self.table, start)

        result = orbit(self.table, start, 5)
        self.assertEqual(result.status, "singular")
        self.assertEqual(len(result.transits), 1)
        self.assertIn(FLAG_JUNCTION, result.transits[0].flags)
        with self.assertRaises(SingularOrbitError):
            orbit_or_raise(self.table, start, 5)

    def test_trace_from_corner(self):
        # Straight down from b lands on p
        result = trace(self.table, (0.0, 1.0), (0.0, -1.0), 3)
        self.assertIsNone(result.start)
        self.assertEqual(result.status, "singular")

        result = trace(self.table, (0.0, 0.0), (1.0, 0.0), 2)
        self.assertTrue(result.ok)
        self.assertEqual([pp.side for pp in result.points], [Side.R, Side.L])
        self.assertAlmostEqual(result.segments[0].tau, DEFAULT_L + 1.0)

    def test_reflect(self):
        self.assertEqual(reflect((0.0, -1.0), (0.0, 1.0)), (0.0, 1.0))
        with self.assertRaises(GrazingError):
            reflect((1.0, 0.0), (0.0, 1.0))
        with self.assertRaises(DomainError):
            reflect((0.0, 1.0), (0.0, 1.0))

    def test_lost_flight_ends_the_orbit(self):
        start = self.table.phase_point(Side.B, 1.0, 0.3)
        real = dynamics.next_collision
        calls = []

        def failing(*args):
            calls.append(args)
            if len(calls) == 2:
                raise GeometryError("Ray from (0, 0) never meets the boundary")
            return real(*args)

        with mock.patch.object(dynamics, "next_collision", side_effect=failing):
            result = orbit(self.table, start, 5)
            self.assertEqual(result.status, "lost")
            self.assertEqual(len(result.transits), 1)
            self.assertIn("GeometryError", result.message)

            calls.clear()
            with self.assertRaises(GeometryError):
                code_orbit(self.table, start, 4)

    def test_orbit_length(self):
        with self.assertRaises(DomainError):
            orbit(self.table, self.table.phase_point(Side.B, 1.0, 0.0), 0)


class DynamicsPropertyTestCase(unittest.TestCase):
    LENGTHS = (0.5, 1.0, 2.0, 5.0)

    def test_time_reversal_on_random_points(self):
        for l in self.LENGTHS:
            table = StadiumTable(l)
            rng = np.random.default_rng(17)
            s_values = rng.uniform(0.0, table.perimeter, 10_000)
            theta_values = rng.uniform(-1.5, 1.5, 10_000)
            checked = 0
            worst = 0.0
            for s, theta in zip(s_values, theta_values):
                pp = PhasePoint(table.from_arc_length(float(s)), float(theta))
                try:
                    back = billiard_map_inverse(table, billiard_map(table, pp))
                except StadiumError:
                    continue
                worst = max(worst, table.phase_distance(back, pp))
                checked += 1
            with self.subTest(l=l):
                self.assertGreater(checked, 9_900)
                self.assertLess(worst, 1e-8)

    def test_axial_and_rectangle_orbits(self):
        for l in self.LENGTHS:
            table = StadiumTable(l)
            with self.subTest(l=l, orbit="axial"):
                result = orbit(table, table.phase_point(Side.L, math.pi, 0.0), 4)
                self.assertTrue(result.ok)
                for segment in result.segments:
                    self.assertAlmostEqual(segment.tau, l + 2.0)

            with self.subTest(l=l, orbit="rectangle"):
                start = table.phase_point(Side.L, 0.75 * math.pi, -0.25 * math.pi)
                result = orbit(table, start, 4)
                self.assertTrue(result.ok)
                taus = [segment.tau for segment in result.segments]
                self.assertAlmostEqual(taus[0], 2.0 * SQRT_HALF)
                self.assertAlmostEqual(taus[1], l + 2.0 * SQRT_HALF)
                self.assertLess(table.phase_distance(result.points[4], start), 1e-9)

    def test_reflection_law(self):
        rng = np.random.default_rng(3)
        for alpha, beta in rng.uniform(0.0, 2.0 * math.pi, (500, 2)):
            normal = (math.cos(alpha), math.sin(alpha))
            direction = (math.cos(beta), math.sin(beta))
            dot = direction[0] * normal[0] + direction[1] * normal[1]
            if dot > -1e-3:
                continue
            rx, ry = reflect(direction, normal)
            self.assertAlmostEqual(math.hypot(rx, ry), 1.0, places=12)
            self.assertAlmostEqual(rx * normal[0] + ry * normal[1], -dot, places=12)
            tangent = (-normal[1], normal[0])
            self.assertAlmostEqual(
                rx * tangent[0] + ry * tangent[1],
                direction[0] * tangent[0] + direction[1] * tangent[1],
                places=12,
            )


if __name__ == "__main__":
    unittest.main()
