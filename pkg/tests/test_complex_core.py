# test_complex_core.py
import cmath
import math
import pickle
import unittest

import numpy as np

from complex_core import (INF, Mobius, Polyline, arg_branch, as_extended, circle_through, decode_point,
                          encode_point, hausdorff_distance, log_branch, mobius_apply, mobius_inverse,
                          pow_branch, pow_branch_array, real_axis_second_intersection, spherical_distance,
                          sqrt_right, sqrt_right_array, winding_sign)
from errors import DegenerateInputError, DomainError, InvalidTransformError

SQUARE = [0, 1, 1 + 1j, 1j]


class TestInfinity(unittest.TestCase):

    def test_singleton(self):
        # בדיקה שהנקודה באינסוף היא יחידה גם אחרי pickle
        self.assertIs(pickle.loads(pickle.dumps(INF)), INF)
        self.assertEqual(str(INF), "inf")

    def test_as_extended(self):
        self.assertIs(as_extended("inf"), INF)
        self.assertIs(as_extended(complex(math.inf, 0)), INF)
        self.assertEqual(as_extended("1+2j"), 1 + 2j)
        with self.assertRaises(DegenerateInputError):
            as_extended(complex(math.nan, 0))


class TestMobius(unittest.TestCase):

    def test_pole_at(self):
        # בדיקה של z/(1 - z/2)
        m = Mobius.pole_at(2)
        self.assertAlmostEqual(m(1), 2)
        self.assertIs(m(2), INF)
        self.assertAlmostEqual(m(INF), -2)

    def test_pole_at_infinity_is_identity(self):
        self.assertEqual(Mobius.pole_at(INF)(3 + 1j), 3 + 1j)

    def test_inverse(self):
        m = Mobius(1, 2j, 3, 4)
        z = 0.3 - 0.7j
        self.assertAlmostEqual(mobius_inverse(m)(mobius_apply(m, z)), z)
        self.assertAlmostEqual(m.compose(m.inverse())(z), z)

    def test_degenerate(self):
        with self.assertRaises(InvalidTransformError):
            Mobius(1, 2, 2, 4)

    def test_far_base_point_is_not_degenerate(self):
        # הבסיס רחוק מאוד מהמקור ביחס לגובה שלו
        w0 = -7.9e21 + 2.5e19j
        m = Mobius(1, -w0, 1, -w0.conjugate())
        self.assertEqual(m(w0), 0)
        self.assertAlmostEqual(abs(m(0)), 1, places=12)
        self.assertAlmostEqual(abs(m(-3e21)), 1, places=12)

    def test_apply_array_matches_scalar(self):
        m = Mobius(2, 1j, 1, 3)
        zs = np.array([0.5, 1j, -2 + 0.1j])
        np.testing.assert_allclose(m.apply_array(zs), [m(z) for z in zs])


class TestBranches(unittest.TestCase):

    def test_sqrt_right(self):
        self.assertAlmostEqual(sqrt_right(4), 2)
        self.assertAlmostEqual(sqrt_right(-1), 1j)
        # אפס שלילי בחלק המדומה לא הופך את הענף
        self.assertAlmostEqual(sqrt_right(complex(-4, -0.0)), 2j)
        np.testing.assert_allclose(sqrt_right_array([4, -1, complex(-4, -0.0)]), [2, 1j, 2j])

    def test_pow_branch(self):
        self.assertAlmostEqual(pow_branch(1j, 2), -1)
        self.assertAlmostEqual(pow_branch(-1, 0.5, "upper"), 1j)
        self.assertAlmostEqual(pow_branch(0, 3), 0)
        with self.assertRaises(DomainError):
            pow_branch(0, -1)
        np.testing.assert_allclose(pow_branch_array([1j, 0], 2), [-1, 0], atol=1e-15)

    def test_arg_ranges(self):
        # ענף "upper" רציף על החצי העליון, כולל הציר השלילי
        self.assertAlmostEqual(arg_branch(-1, "upper"), math.pi)
        self.assertAlmostEqual(arg_branch(-1j, "upper"), 3 * math.pi / 2)
        self.assertAlmostEqual(arg_branch(1j, "lower"), math.pi / 2)
        self.assertAlmostEqual(arg_branch(-1, "lower"), -math.pi)
        with self.assertRaises(DomainError):
            log_branch(0)
        self.assertAlmostEqual(log_branch(math.e * 1j, "right"), 1 + 1j * math.pi / 2)


class TestCircles(unittest.TestCase):

    def test_circle_through(self):
        c = circle_through(0, 2, 1j)
        self.assertFalse(c.is_line)
        self.assertAlmostEqual(c.center, 1 + 0.5j)
        self.assertAlmostEqual(c.radius, math.sqrt(1.25))
        self.assertAlmostEqual(real_axis_second_intersection(c), 2)

    def test_collinear_gives_line(self):
        c = circle_through(0, 1 + 1j, 2 + 2j)
        self.assertTrue(c.is_line)
        self.assertIs(real_axis_second_intersection(c), INF)

    def test_coincident(self):
        with self.assertRaises(DegenerateInputError):
            circle_through(1, 1, 2)


class TestDistances(unittest.TestCase):

    def test_spherical(self):
        self.assertAlmostEqual(spherical_distance(1, 1j), math.sqrt(2))
        self.assertAlmostEqual(spherical_distance(0, INF), 2)
        self.assertEqual(spherical_distance(INF, INF), 0)

    def test_hausdorff(self):
        a = Polyline([0, 1, 1 + 1j, 1j], closed=True)
        b = Polyline([0.1j, 1 + 0.1j, 1 + 1.1j, 1.1j], closed=True)
        self.assertAlmostEqual(hausdorff_distance(a, b), 0.1, places=9)
        self.assertAlmostEqual(hausdorff_distance(a, a), 0)


class TestPolygons(unittest.TestCase):

    def test_winding(self):
        self.assertEqual(winding_sign(SQUARE, 0.5 + 0.5j), 1)
        self.assertEqual(winding_sign(SQUARE[::-1], 0.5 + 0.5j), -1)
        with self.assertRaises(DegenerateInputError):
            winding_sign(SQUARE, 3)

    def test_polyline_rejects_repeats(self):
        with self.assertRaises(DegenerateInputError):
            Polyline([0, 1, 1])
        with self.assertRaises(DegenerateInputError):
            Polyline([0, 1, 0], closed=True)

    def test_sample(self):
        pts = Polyline([0, 1], closed=False).sample(4)
        np.testing.assert_allclose(pts, [0, 0.25, 0.5, 0.75, 1])

    def test_encode_decode(self):
        self.assertEqual(encode_point(INF), "inf")
        self.assertIs(decode_point("inf"), INF)
        self.assertEqual(decode_point(encode_point(0.1 + 0.2j)), 0.1 + 0.2j)


if __name__ == '__main__':
    unittest.main()
