# test_map_builder.py
import math
import unittest

import numpy as np

from chain_geometry import curve_in_chain, pacman_condition, polygon_disc_chain, tangency_points, tangent_deviation
from complex_core import INF, Polyline, hausdorff_distance, winding_sign
from config import Config
from errors import AmbiguousBranchError, DegenerateInputError, PreconditionError
from map_builder import (BranchPolicy, WeldingSpec, _inverse_chunk, boundary_sample, build, build_zipper,
                         data_image_residual, data_winding, eval_forward, eval_forward_many, eval_inverse,
                         eval_inverse_many, grid_curves, inverted_ellipse_points, normalize_to_disc,
                         pipeline_from_dict, pipeline_to_dict, prevertex_angle_error, weld_build, welded_map)

# ריבוע עם נקודות אמצע, נגד כיוון השעון
SQUARE = [0, 0.5, 1, 1 + 0.5j, 1 + 1j, 0.5 + 1j, 1j, 0.5j]
CENTER = 0.5 + 0.5j


def circle_points(n, radius=1.0):
    return [complex(v) for v in radius * np.exp(2j * math.pi * np.arange(n) / n)]


class TestBuild(unittest.TestCase):

    def test_every_variant_interpolates(self):
        # בדיקה שכל נקודות הנתונים נשלחות לציר הממשי
        for variant in ("geodesic", "slit", "zipper"):
            with self.subTest(variant=variant):
                p = build(SQUARE, variant)
                self.assertEqual(len(p), len(SQUARE))
                self.assertLess(data_image_residual(p), 1e-8)
                self.assertIs(p.prevertices[0], INF)
                self.assertIn(0, p.prevertices)
                for value in p.prevertices[1:]:
                    self.assertEqual(value.imag, 0)
                self.assertGreater(eval_forward(p, CENTER).imag, 0)

    def test_clockwise_data(self):
        p = build(SQUARE[::-1], "geodesic")
        self.assertGreater(eval_forward(p, CENTER).imag, 0)

    def test_prevertices_are_ordered(self):
        p = build(circle_points(40), "slit")
        inner = np.array([v.real for v in p.prevertices[1:]])
        steps = np.diff(inner)
        self.assertTrue(np.all(steps > 0) or np.all(steps < 0))

    def test_zipper_needs_even_count(self):
        with self.assertRaises(PreconditionError) as ctx:
            build_zipper(SQUARE[:7])
        self.assertIn("even number of points, got 7", str(ctx.exception))

    def test_too_few_points(self):
        with self.assertRaises(PreconditionError):
            build([0, 1], "geodesic")

    def test_bad_input(self):
        with self.assertRaises(PreconditionError):
            build(SQUARE, "spline")
        with self.assertRaises(PreconditionError):
            build([0, INF, 1, 1j], "geodesic")
        with self.assertRaises(DegenerateInputError):
            build([0, 1, 1j, 1], "geodesic")

    def test_unbounded_line(self):
        p = build([INF, -2, -1, 0, 1, 2], "geodesic")
        self.assertFalse(p.bounded)
        w = eval_forward(p, 0.5 + 1j)
        self.assertGreater(w.imag, 0)
        self.assertAlmostEqual(eval_inverse(p, w), 0.5 + 1j, places=9)


class TestEvaluate(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.points = circle_points(200)
        cls.pipeline = build(cls.points, "geodesic")

    def test_data_points_land_on_prevertices(self):
        for j in (0, 1, 57, 199):
            self.assertEqual(eval_forward(self.pipeline, self.points[j]), self.pipeline.prevertices[j])
        # 0 הוא ה-prevertex של הנקודה האחרונה
        self.assertEqual(eval_inverse(self.pipeline, 0), self.points[-1])
        self.assertEqual(eval_inverse(self.pipeline, INF), self.points[0])

    def test_round_trip(self):
        for z in (0, 0.3 + 0.2j, -0.9j, 0.95):
            w = eval_forward(self.pipeline, z)
            self.assertGreater(w.imag, 0)
            self.assertAlmostEqual(eval_inverse(self.pipeline, w), z, places=8)

    def test_many_matches_single(self):
        config = Config(chunk_size=3, workers=2)
        zs = [0, 0.3 + 0.2j, self.points[5], -0.5, 0.1j, 0.7 - 0.1j, 0.2]
        many = eval_forward_many(self.pipeline, zs, config=config)
        for z, value in zip(zs, many):
            self.assertAlmostEqual(value, eval_forward(self.pipeline, z), places=12)
        back = eval_inverse_many(self.pipeline, many, config=config)
        for z, value in zip(zs, back):
            self.assertAlmostEqual(value, z, places=8)

    def test_boundary_close_to_circle(self):
        curve = boundary_sample(self.pipeline, 8)
        self.assertTrue(curve.closed)
        self.assertEqual(curve.points[0], self.points[0])
        self.assertIn(self.points[100], curve.points)
        fine = Polyline(tuple(circle_points(720)), closed=True)
        self.assertLess(hausdorff_distance(curve, fine), 1e-2)

    def test_extension_matches_interior(self):
        policy = BranchPolicy("extension", seed=0j)
        value = eval_forward(self.pipeline, 0.2j, policy)
        self.assertAlmostEqual(value, eval_forward(self.pipeline, 0.2j), places=8)

    def test_extension_near_cut_needs_seed(self):
        # הנקודה באמצע הקטע [z0, z1] יושבת על החתך של הצעד הראשון
        midpoint = (self.points[0] + self.points[1]) / 2
        with self.assertRaises(AmbiguousBranchError):
            eval_forward(self.pipeline, midpoint, BranchPolicy("extension"))

    def test_unknown_mode(self):
        with self.assertRaises(PreconditionError):
            BranchPolicy("sideways")


class TestNormalize(unittest.TestCase):

    def test_disc_normalization(self):
        p = normalize_to_disc(build(SQUARE, "zipper"), CENTER, 0)
        self.assertTrue(p.normalized)
        self.assertAlmostEqual(eval_forward(p, CENTER), 0, places=9)
        self.assertEqual(eval_forward(p, SQUARE[0]), 1)
        for value in p.output_prevertices():
            self.assertAlmostEqual(abs(value), 1)
        self.assertAlmostEqual(eval_inverse(p, 0), CENTER, places=9)

    def test_fix_by_point(self):
        p = normalize_to_disc(build(SQUARE, "geodesic"), CENTER, 1 + 1j)
        self.assertEqual(p.boundary_fix, 4)
        self.assertAlmostEqual(p.output_prevertices()[4], 1)

    def test_renormalize_replaces_step(self):
        base = build(SQUARE, "geodesic")
        once = normalize_to_disc(base, CENTER, 0)
        twice = normalize_to_disc(once, 0.3 + 0.3j, 2)
        self.assertEqual(len(twice.steps), len(base.steps) + 1)
        self.assertAlmostEqual(eval_forward(twice, 0.3 + 0.3j), 0, places=9)

    def test_bad_fix(self):
        base = build(SQUARE, "geodesic")
        with self.assertRaises(PreconditionError):
            normalize_to_disc(base, CENTER, 42)
        with self.assertRaises(PreconditionError):
            normalize_to_disc(base, CENTER, 0.25)

    def test_grid(self):
        base = build(circle_points(64), "geodesic")
        with self.assertRaises(PreconditionError):
            grid_curves(base)
        p = normalize_to_disc(base, 0, 0)
        curves = grid_curves(p, rings=4, rays=6, samples=32)
        self.assertEqual(sum(1 for kind, _ in curves if kind == "ring"), 3)
        self.assertEqual(sum(1 for kind, _ in curves if kind == "ray"), 6)
        for kind, values in curves:
            self.assertEqual(len(values), 33 if kind == "ring" else 32)
            # השפה של דיסק היחידה כוללת את הקוטב של 1, ולכן מסננים ערכים לא סופיים
            finite = values[np.isfinite(values)]
            self.assertTrue(np.all(np.abs(finite) < 1 + 1e-2))
        cartesian = grid_curves(p, kind="cartesian", rings=4, samples=16)
        self.assertEqual({kind for kind, _ in cartesian}, {"vertical", "horizontal"})


class TestWelding(unittest.TestCase):

    def test_single_pair(self):
        p = weld_build(WeldingSpec((1.0,), (-1.0,)))
        self.assertEqual(welded_map(p, 1), welded_map(p, -1))
        self.assertAlmostEqual(welded_map(p, 0), -0.25)

    def test_pairs_are_welded(self):
        spec = WeldingSpec((1.0, 2.0, 3.5), (-0.5, -2.0, -4.0))
        p = weld_build(spec)
        for x, y in zip(spec.x, spec.y):
            self.assertEqual(welded_map(p, x), welded_map(p, y))
        self.assertTrue(np.isfinite(welded_map(p, 1j)))

    def test_random_pairs_meet(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            n = int(rng.integers(2, 50))
            x = np.cumsum(rng.uniform(0.1, 1.0, n))
            y = -np.cumsum(rng.uniform(0.1, 1.0, n))
            p = weld_build(WeldingSpec(tuple(x), tuple(y)))
            at_x = _inverse_chunk(p.steps, x + 0j)
            at_y = _inverse_chunk(p.steps, y + 0j)
            scale = max(1.0, float(np.abs(at_x).max()))
            with self.subTest(trial=trial, n=n):
                self.assertTrue(np.all(np.isfinite(at_x)))
                self.assertLess(float(np.abs(at_x - at_y).max()), 1e-9 * scale)

    def test_spec_validation(self):
        with self.assertRaises(PreconditionError):
            weld_build(WeldingSpec((1.0, 0.5), (-1.0, -2.0)))
        with self.assertRaises(PreconditionError):
            weld_build(WeldingSpec((1.0,), (-1.0, -2.0)))
        with self.assertRaises(PreconditionError):
            weld_build(WeldingSpec((-1.0,), (-2.0,)))


class TestSelfTestAndSerialization(unittest.TestCase):

    def test_inverted_ellipse(self):
        points = inverted_ellipse_points(8, 0.5)
        self.assertEqual(len(points), 8)
        self.assertAlmostEqual(points[0], 0.5 / 1.25)

    def test_prevertex_error_shrinks(self):
        coarse = prevertex_angle_error("geodesic", 100)
        fine = prevertex_angle_error("geodesic", 400)
        self.assertLess(fine, coarse)
        self.assertLess(fine, 1e-2)

    def test_thousand_points_every_variant(self):
        # נקודת הבסיס של הנרמול רחוקה מאוד מהמקור במקרה הזה
        for variant in ("geodesic", "slit", "zipper"):
            with self.subTest(variant=variant):
                self.assertLess(prevertex_angle_error(variant, 1000), 1e-3)

    def test_error_drops_when_points_double(self):
        coarse = prevertex_angle_error("geodesic", 500)
        fine = prevertex_angle_error("geodesic", 1000)
        self.assertGreater(coarse / fine, 1.5)

    def test_pipeline_dict_round_trip(self):
        p = normalize_to_disc(build(SQUARE, "slit"), CENTER, 0)
        document = pipeline_to_dict(p)
        self.assertEqual(len(document["points"]), len(SQUARE))
        again = pipeline_from_dict(document)
        self.assertEqual(again.prevertices, p.prevertices)
        self.assertAlmostEqual(eval_forward(again, 0.2 + 0.7j), eval_forward(p, 0.2 + 0.7j), places=12)

    def test_malformed_document(self):
        with self.assertRaises(PreconditionError):
            pipeline_from_dict({"variant": "geodesic"})


class TestOrientation(unittest.TestCase):

    def test_winding_matches_orientation(self):
        for variant in ("geodesic", "slit", "zipper"):
            for data, sign in ((SQUARE, 1), (SQUARE[::-1], -1)):
                with self.subTest(variant=variant, sign=sign):
                    p = build(data, variant)
                    self.assertEqual(p.orientation, sign)
                    self.assertEqual(data_winding(p), sign)
                    curve = boundary_sample(p, 8)
                    finite = [z for z in curve.points if z is not INF]
                    self.assertEqual(winding_sign(finite, eval_inverse(p, 1j)), p.orientation)

    def test_unbounded_has_no_winding(self):
        p = build([INF, -2, -1, 0, 1, 2], "geodesic")
        self.assertIsNone(data_winding(p))


def star_polygon(rng, count):
    angles = 2 * math.pi * (np.arange(count) + rng.uniform(-0.25, 0.25, count)) / count
    radii = rng.uniform(0.7, 1.2, count)
    return radii * np.exp(1j * angles)


class TestBoundaryGeometry(unittest.TestCase):

    def test_geodesic_curve_stays_in_disc_chain(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            polygon = Polyline(tuple(complex(z) for z in star_polygon(rng, int(rng.integers(3, 7)))), closed=True)
            chain = polygon_disc_chain(polygon, 0.25)
            p = build(tangency_points(chain), "geodesic")
            report = curve_in_chain(boundary_sample(p, 50), chain)
            with self.subTest(trial=trial, discs=len(chain)):
                self.assertTrue(report.ok, report.violations[:3])

    def test_no_corner_at_data_points(self):
        points = circle_points(100)
        curve = np.array(boundary_sample(build(points, "geodesic"), 200).points, dtype=complex)
        worst = 0.0
        for z in points:
            k = int(np.nonzero(curve == z)[0][0])
            incoming = curve[k] - curve[k - 1]
            outgoing = curve[(k + 1) % len(curve)] - curve[k]
            worst = max(worst, abs(float(np.angle(outgoing / incoming))))
        self.assertLess(worst, 1e-2)

    def test_tangent_follows_chords(self):
        # קשת כמעט ישרה שעומדת בתנאי ה-pacman
        finite = [k + 0.002j * k * k for k in range(11)]
        points = [INF] + finite
        self.assertTrue(pacman_condition(points, 0.1, c1=0.1).ok)
        curve = boundary_sample(build(points, "geodesic"), 16)
        self.assertLess(tangent_deviation(curve, finite), 0.3)


def ellipse_points(n):
    t = 2 * math.pi * np.arange(n) / n
    return [complex(v) for v in np.cos(t) + 0.6j * np.sin(t)]


def flower_points(n):
    t = 2 * math.pi * np.arange(n) / n
    return [complex(v) for v in (1 + 0.2 * np.cos(5 * t)) * np.exp(1j * t)]


class TestRoundTrips(unittest.TestCase):

    def test_data_points_and_interior(self):
        rng = np.random.default_rng(5)
        inside = 0.4 * np.sqrt(rng.uniform(0, 1, 1000)) * np.exp(2j * math.pi * rng.uniform(0, 1, 1000))
        for shape in (ellipse_points, flower_points):
            for n in (10, 100, 500):
                data = shape(n)
                diameter = max(abs(a - b) for a in data for b in data)
                for variant in ("geodesic", "slit", "zipper"):
                    with self.subTest(shape=shape.__name__, n=n, variant=variant):
                        p = build(data, variant)
                        back = _inverse_chunk(p.halfplane_steps, np.array(p.prevertices[1:], dtype=complex))
                        gaps = np.abs(back - np.array(data[1:]))
                        self.assertLess(float(gaps.max()), 1e-9 * diameter)
                        images = eval_forward_many(p, list(inside))
                        again = np.array(eval_inverse_many(p, images), dtype=complex)
                        self.assertLess(float(np.abs(again - inside).max()), 1e-9 * diameter)


if __name__ == '__main__':
    unittest.main()
