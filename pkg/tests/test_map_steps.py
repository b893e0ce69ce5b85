# test_map_steps.py
import cmath
import math
import unittest

import numpy as np

from complex_core import INF, Mobius
from errors import PreconditionError
from map_steps import CircularSlit, GeodesicSlit, MobiusNormalize, SquareRoot, StraightSlit, WeldingSlit, step_from_dict


class TestSlitSteps(unittest.TestCase):

    def test_geodesic_slit(self):
        step = GeodesicSlit(1j)
        self.assertAlmostEqual(step.forward(1j), 0)
        self.assertEqual(step.seam_values(), (1.0, -1.0))
        self.assertIs(step.forward(INF), INF)
        self.assertTrue(step.near_cut(0.5j))
        self.assertFalse(step.near_cut(0.5 + 0.5j))
        # שני הצדדים של הקשת נפתחים לשני ערכים הפוכים
        self.assertEqual(len(step.forward_candidates(0.5 + 0.5j)), 2)

    def test_straight_slit(self):
        step = StraightSlit(1 + 1j)
        self.assertAlmostEqual(step.forward(1 + 1j), 0, places=6)
        self.assertIs(step.forward(INF), INF)
        z = -2 + 0.5j
        self.assertAlmostEqual(step.inverse(step.forward(z)), z, places=10)
        self.assertTrue(step.near_cut(0.5 + 0.5j))
        right, left = step.seam_values()
        self.assertAlmostEqual(right - left, 1)

    def test_straight_slit_continue(self):
        step = StraightSlit(1j)
        z = 0.3 + 0.2j
        w = step.forward(z)
        self.assertAlmostEqual(step.continue_from(z, w + 0.01), w, places=10)

    def test_circular_slit(self):
        step = CircularSlit(1 + 1j, 1 + cmath.exp(0.75j * math.pi))
        self.assertAlmostEqual(step.inverse_infinity(), 2)
        for z in (3 + 1j, 0.5 + 3j):
            self.assertAlmostEqual(step.inverse(step.forward(z)), z, places=9)
        # נקודה על הקשת נפתחת לשתי נקודות ממשיות משני צדי 0
        right, left = step.seam_preimages(1 + cmath.exp(0.75j * math.pi))
        self.assertGreater(right, 0)
        self.assertLess(left, 0)
        self.assertAlmostEqual(step.inverse(right), 1 + cmath.exp(0.75j * math.pi), places=9)


class TestWelding(unittest.TestCase):

    def test_pair_collapses_exactly(self):
        step = WeldingSlit(1, -1)
        self.assertEqual(step.inverse(1), 0)
        self.assertEqual(step.inverse(-1), 0)
        self.assertAlmostEqual(step.inverse(0), 0.5j)

    def test_forward(self):
        step = WeldingSlit(2, -1)
        self.assertEqual(step.forward(0), 2)
        z = 0.5 + 1.5j
        self.assertAlmostEqual(step.forward(step.inverse(z)), z, places=10)

    def test_pair_collapses_from_rounded_images(self):
        # תמונות של ריתוכים קודמים חוזרות עם שגיאת עיגול קטנה
        step = WeldingSlit(1.5, -0.75)
        values = step.inverse_array(np.array([1.5 + 3e-16j, 1.5 * (1 + 2e-16), -0.75 - 1e-16j]))
        self.assertTrue(np.all(values == 0))
        self.assertEqual(step.inverse_array(np.array([4.0 + 1e-17j]))[0].imag, 0)

    def test_pair_must_straddle_zero(self):
        with self.assertRaises(PreconditionError):
            WeldingSlit(1, 0.5)


class TestSimpleSteps(unittest.TestCase):

    def test_square_root(self):
        step = SquareRoot()
        self.assertAlmostEqual(step.forward(-4), 2j)
        self.assertAlmostEqual(step.inverse(2j), -4)
        self.assertIs(step.forward(INF), INF)
        self.assertTrue(step.near_cut(3))

    def test_disc_map(self):
        step = MobiusNormalize.disc_map(1j, INF)
        self.assertAlmostEqual(step.forward(1j), 0)
        self.assertAlmostEqual(step.forward(INF), 1)
        step = MobiusNormalize.disc_map(1j, 0)
        self.assertAlmostEqual(step.forward(0), 1)
        for x in (-3.0, 0.5, 7.0):
            self.assertAlmostEqual(abs(step.forward(x)), 1)
        self.assertLess(abs(step.forward(0.2 + 0.3j)), 1)

    def test_disc_map_far_from_origin(self):
        w0 = -7.9e21 + 2.5e19j
        step = MobiusNormalize.disc_map(w0, 0)
        self.assertEqual(step.forward(w0), 0)
        self.assertAlmostEqual(step.forward(0), 1, places=12)
        self.assertAlmostEqual(abs(step.forward(-8e21)), 1, places=12)
        self.assertAlmostEqual(step.inverse(0), w0, delta=1e-12 * abs(w0))

    def test_dict_round_trip(self):
        steps = [GeodesicSlit(0.5 + 1j), StraightSlit(1 + 1j), CircularSlit(1 + 1j, 1 + cmath.exp(0.75j * math.pi)),
                 WeldingSlit(1, -2), SquareRoot(), MobiusNormalize(Mobius(1, -1j, 1, 1j))]
        for step in steps:
            with self.subTest(kind=step.kind):
                again = step_from_dict(step.to_dict())
                np.testing.assert_allclose(again.forward_array(np.array([0.4 + 2j])),
                                           step.forward_array(np.array([0.4 + 2j])))


if __name__ == '__main__':
    unittest.main()
