# test_elementary_maps.py
import cmath
import math
import unittest

import numpy as np

from complex_core import INF, circle_through, real_axis_second_intersection
from elementary_maps import (CircularSlitParams, GeodesicParams, SlitParams, circular_slit_forward,
                             circular_slit_inverse, geodesic_forward, geodesic_forward_array, geodesic_inverse,
                             initial_geodesic, initial_unbounded, initial_zipper, slit_forward,
                             slit_forward_array, step_from_dict, terminal_geodesic, terminal_zipper)
from errors import DegenerateInputError, PreconditionError, TangentArcError


class TestGeodesicMap(unittest.TestCase):

    def test_vertical_arc(self):
        # בדיקה של מפת הגאודזית עבור a = i (הקטע [0, i])
        gp = GeodesicParams.from_tip(1j)
        self.assertIs(gp.b, INF)
        self.assertAlmostEqual(gp.c, 1)
        self.assertAlmostEqual(geodesic_forward(gp, 1j), 0)
        self.assertAlmostEqual(geodesic_forward(gp, 1), math.sqrt(2))
        self.assertAlmostEqual(geodesic_forward(gp, -1), -math.sqrt(2))
        self.assertAlmostEqual(geodesic_forward(gp, 2j), 1j * math.sqrt(3))
        self.assertIs(geodesic_forward(gp, INF), INF)

    def test_inverse(self):
        gp = GeodesicParams.from_tip(1j)
        self.assertAlmostEqual(geodesic_inverse(gp, math.sqrt(2)), 1)
        self.assertAlmostEqual(geodesic_inverse(gp, -math.sqrt(2)), -1)
        self.assertAlmostEqual(geodesic_inverse(gp, 0), 1j)

    def test_tilted_arc(self):
        gp = GeodesicParams.from_tip(1 + 1j)
        self.assertAlmostEqual(gp.b, 2)
        self.assertAlmostEqual(gp.c, 2)
        self.assertAlmostEqual(geodesic_forward(gp, 1 + 1j), 0)
        self.assertAlmostEqual(geodesic_forward(gp, INF), -2 * math.sqrt(2))

    def test_round_trip_upper_half_plane(self):
        gp = GeodesicParams.from_tip(0.3 + 0.8j)
        zs = np.array([2 + 1j, -1 + 0.2j, 0.1 + 3j, 5j])
        ws = geodesic_forward_array(gp, zs)
        self.assertTrue(np.all(ws.imag > 0))
        for z, w in zip(zs, ws):
            self.assertAlmostEqual(geodesic_inverse(gp, w), z, places=10)

    def test_tip_below_axis(self):
        with self.assertRaises(PreconditionError):
            GeodesicParams.from_tip(1 - 1j)


class TestSlitMap(unittest.TestCase):

    def test_normalization(self):
        # בדיקה ש-g(p) = g(p - 1) = 0 ו-g(0) = a
        a = 0.4 + 0.9j
        sp = SlitParams.from_tip(a)
        self.assertAlmostEqual(sp.p, cmath.phase(a) / math.pi)
        self.assertEqual(slit_forward(sp, sp.p), 0)
        self.assertEqual(slit_forward(sp, sp.p - 1), 0)
        self.assertAlmostEqual(slit_forward(sp, 0), a)
        self.assertIs(slit_forward(sp, INF), INF)

    def test_half_slit(self):
        sp = SlitParams.from_tip(0.5j)
        self.assertAlmostEqual(sp.p, 0.5)
        self.assertAlmostEqual(sp.C, 1)
        self.assertAlmostEqual(slit_forward(sp, 1j), 1j * math.sqrt(1.25))

    def test_reflection(self):
        sp = SlitParams.from_tip(1 + 2j)
        z = 0.7 + 0.4j
        upper, lower = slit_forward_array(sp, [z, z.conjugate()])
        self.assertAlmostEqual(lower, upper.conjugate())

    def test_from_angle(self):
        sp = SlitParams.from_angle(0.5)
        self.assertAlmostEqual(sp.C, 1)
        self.assertAlmostEqual(sp.slit_length, 0.5)
        self.assertAlmostEqual(sp.unnormalized_tip, 0.5j)
        with self.assertRaises(PreconditionError):
            SlitParams.from_angle(1.0)


class TestCircularSlit(unittest.TestCase):

    def test_params(self):
        # הקשת על המעגל |z - 1| = 1 מ-0 עד 1 + i
        c = 1 + cmath.exp(0.75j * math.pi)
        cp = CircularSlitParams.from_points(1 + 1j, c)
        self.assertAlmostEqual(cp.b, 2)
        self.assertAlmostEqual(cp.d, 2j)
        self.assertAlmostEqual(cp.inner.p, 0.5)

    def test_second_axis_point(self):
        # המעגל |z - (3 + 4i)| = 5 חותך את הציר הממשי ב-0 וב-6
        c = 3 + 4j + 5 * cmath.exp(2.5j)
        cp = CircularSlitParams.from_points(3 + 9j, c)
        self.assertAlmostEqual(cp.b, 6, places=12)
        self.assertAlmostEqual(cp.d, -4.8 + 3.6j, places=12)
        self.assertEqual(cp.b, real_axis_second_intersection(circle_through(0j, c, 3 + 9j)))

    def test_straight_arc_has_no_pole(self):
        cp = CircularSlitParams.from_points(1 + 1j, 0.5 + 0.5j)
        self.assertIs(cp.b, INF)
        self.assertAlmostEqual(cp.d, 1 + 1j)

    def test_tangent_arc(self):
        with self.assertRaises(TangentArcError):
            CircularSlitParams.from_points(1 + 1j, 2j)

    def test_round_trip(self):
        cp = CircularSlitParams.from_points(1 + 1j, 1 + cmath.exp(0.75j * math.pi))
        self.assertAlmostEqual(circular_slit_forward(cp, 1 + 1j), 0, places=6)
        for z in (3 + 1j, -2 + 0.5j, 0.5 + 4j):
            w = circular_slit_forward(cp, z)
            self.assertGreater(w.imag, 0)
            self.assertAlmostEqual(circular_slit_inverse(cp, w), z, places=9)


class TestInitialSteps(unittest.TestCase):

    def test_initial_geodesic(self):
        step = initial_geodesic(1, -1)
        self.assertEqual(step.forward(INF), 1j)
        w = step.forward(2j)
        self.assertAlmostEqual(w, (1 + 2j) / math.sqrt(5))
        self.assertAlmostEqual(step.inverse(w), 2j)
        self.assertEqual(step.inverse(INF), 1)
        self.assertTrue(step.near_cut(0.3))
        self.assertFalse(step.near_cut(0.3 + 1j))

    def test_initial_geodesic_coincident(self):
        with self.assertRaises(DegenerateInputError):
            initial_geodesic(1, 1)

    def test_initial_unbounded(self):
        # z2 הולך ל-i בשני הכיוונים
        self.assertAlmostEqual(initial_unbounded(0, -1).forward(-1), 1j)
        self.assertAlmostEqual(initial_unbounded(0, 1).forward(1), 1j)
        step = initial_unbounded(0, 1)
        self.assertEqual(step.forward(0), 0)
        self.assertIs(step.forward(INF), INF)
        self.assertAlmostEqual(step.inverse(step.forward(2 + 3j)), 2 + 3j)

    def test_initial_zipper(self):
        step = initial_zipper(0, 1, 1 + 1j)
        self.assertAlmostEqual(step.forward(1), -1)
        self.assertAlmostEqual(step.forward(1 + 1j), 0)
        self.assertEqual(step.inverse(INF), 0)
        z = 3 - 2j
        w = step.forward(z)
        self.assertGreaterEqual(w.imag, 0)
        self.assertAlmostEqual(step.inverse(w), z)


class TestTerminalSteps(unittest.TestCase):

    def test_terminal_geodesic_interior_sector(self):
        # נקודה בתוך חצי העיגול שמעל [-1, 0] עוברת לחצי המישור העליון כאשר sign = -1
        step = terminal_geodesic(-1, -1)
        w = step.forward(-0.5 + 0.25j)
        self.assertAlmostEqual(w, 0.28 + 0.96j)
        self.assertAlmostEqual(step.inverse(w), -0.5 + 0.25j)

    def test_terminal_geodesic_outer_sector(self):
        step = terminal_geodesic(-1, 1)
        self.assertAlmostEqual(step.forward(1j), 0.5j)
        self.assertAlmostEqual(step.inverse(0.5j), 1j)
        self.assertEqual(step.inverse(INF), -1)

    def test_terminal_sign_validation(self):
        with self.assertRaises(PreconditionError):
            terminal_geodesic(-1, 0)
        with self.assertRaises(DegenerateInputError):
            terminal_geodesic(0, 1)

    def test_terminal_zipper(self):
        step = terminal_zipper(INF, 1 + 1j, 1)
        self.assertAlmostEqual(step.alpha, math.pi / 4)
        z = cmath.exp(1j * math.pi / 8)
        self.assertAlmostEqual(step.forward(z), 1j)
        self.assertAlmostEqual(step.inverse(1j), z)
        other = terminal_zipper(INF, 1 + 1j, -1)
        self.assertAlmostEqual(other.alpha, 3 * math.pi / 4)
        self.assertAlmostEqual(other.forward(1j), cmath.exp(1j * math.pi / 3))

    def test_step_dicts(self):
        for step in (initial_geodesic(1, -1), initial_unbounded(0, 1), initial_zipper(0, 1, 1 + 1j),
                     terminal_geodesic(-1, -1), terminal_zipper(INF, 1 + 1j, 1)):
            with self.subTest(kind=step.kind):
                again = step_from_dict(step.to_dict())
                self.assertEqual(type(again), type(step))
                self.assertAlmostEqual(again.forward(0.3 + 0.4j), step.forward(0.3 + 0.4j))

    def test_unknown_kind(self):
        with self.assertRaises(PreconditionError):
            step_from_dict({"kind": "Nope"})


if __name__ == '__main__':
    unittest.main()
