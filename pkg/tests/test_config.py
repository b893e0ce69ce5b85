# test_config.py
import logging
import unittest
from unittest.mock import patch

from config import TOL_ENV_VAR, Config, NewtonConfig, setup_logging
from errors import PreconditionError


class TestConfig(unittest.TestCase):

    def test_defaults(self):
        config = Config()
        self.assertEqual(config.newton.tol, 1e-13)
        self.assertEqual(config.newton.max_iter, 30)
        self.assertEqual(config.c1, 8.0)
        self.assertEqual(config.eps0, 0.1)

    def test_env_override(self):
        # בדיקה של דריסת הסבולת ממשתנה סביבה
        config = Config.from_env({TOL_ENV_VAR: "1e-10"})
        self.assertEqual(config.newton.tol, 1e-10)
        self.assertEqual(Config.from_env({}).newton.tol, 1e-13)

    def test_env_rejects_garbage(self):
        with self.assertRaises(PreconditionError):
            Config.from_env({TOL_ENV_VAR: "tight"})
        with self.assertRaises(PreconditionError):
            Config.from_env({TOL_ENV_VAR: "0.5"})

    def test_newton_validation(self):
        with self.assertRaises(PreconditionError):
            NewtonConfig(max_iter=3)
        with self.assertRaises(PreconditionError):
            NewtonConfig(far_threshold=0)

    def test_selftest_threshold(self):
        config = Config()
        self.assertEqual(config.selftest_threshold("geodesic", 500), 1e-3)
        self.assertEqual(config.selftest_threshold("zipper", 2000), 1e-4)
        self.assertEqual(config.selftest_threshold("zipper", 10 ** 6), 1e-6)

    def test_setup_logging(self):
        with patch('config.logging.basicConfig') as basic:
            setup_logging(verbose=True, log_file="run.log")
            kwargs = basic.call_args.kwargs
            self.assertEqual(kwargs["level"], logging.DEBUG)
            self.assertEqual(kwargs["filename"], "run.log")


if __name__ == '__main__':
    unittest.main()
