# Test the command-line entry point

import os
import sys
import tempfile
import unittest
from unittest.mock import patch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from main import EXIT_ERROR, EXIT_PASS, build_parser, main
from utils.config import Config


@patch.dict(os.environ, {}, clear=True)
class TestMain(unittest.TestCase):
    """Test cases for locstab commands and exit codes"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()
        self.saved_cap = Config.MAX_DIMENSION

    def tearDown(self):
        Config.MAX_DIMENSION = self.saved_cap
        self.tmp.cleanup()

    def test_parser(self):
        """Test flags land on the expected attributes"""
        args = build_parser().parse_args(["verify", "markov", "--quick", "--cap-dim", "256", "--out", "x"])
        self.assertEqual((args.suite, args.quick, args.cap_dim, args.out_dir), ("markov", True, 256, "x"))
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["explode"])

    def test_fixtures(self):
        """Test listing the registry"""
        self.assertEqual(main(["fixtures"]), EXIT_PASS)

    def test_verify_counterexamples(self):
        """Test a quick suite run writes results.json"""
        code = main(["verify", "counterexamples", "--quick", "--out", self.tmp.name, "--seed", "1"])
        self.assertEqual(code, EXIT_PASS)
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, "results.json")))

    def test_unknown_suite(self):
        """Test unknown suites exit with the error code"""
        self.assertEqual(main(["verify", "nothing", "--out", self.tmp.name]), EXIT_ERROR)

    def test_bad_settings(self):
        """Test invalid settings exit with the error code"""
        self.assertEqual(main(["fixtures", "--threads", "0"]), EXIT_ERROR)
        self.assertEqual(main(["fixtures", "--config", os.path.join(self.tmp.name, "none.conf")]), EXIT_ERROR)

    def test_scan_and_plot(self):
        """Test a lindblad scan followed by its plot data"""
        code = main(["scan", "lindblad", "--n", "2", "--times", "0:1:0.5", "--out", self.tmp.name])
        self.assertEqual(code, EXIT_PASS)
        csv = os.path.join(self.tmp.name, "lindblad_ising.csv")
        self.assertTrue(os.path.exists(csv))
        out = os.path.join(self.tmp.name, "lindblad.dat")
        self.assertEqual(main(["plot", csv, out]), EXIT_PASS)
        self.assertTrue(os.path.exists(out))

    def test_plot_missing_csv(self):
        """Test plotting a missing file"""
        missing = os.path.join(self.tmp.name, "missing.csv")
        self.assertEqual(main(["plot", missing, os.path.join(self.tmp.name, "x.dat")]), EXIT_ERROR)

    def test_cap_dim_flag(self):
        """Test the dimension cap reaches Config"""
        main(["fixtures", "--cap-dim", "512"])
        self.assertEqual(Config.MAX_DIMENSION, 512)


if __name__ == '__main__':
    unittest.main(verbosity=2)
