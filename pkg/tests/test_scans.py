# Test decay scans, CSV output and plot data

import os
import sys
import tempfile
import unittest

import numpy as np
import pandas as pd

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.scans import (
    GIBBS_COLUMNS,
    LINDBLAD_COLUMNS,
    STABILITY_COLUMNS,
    detectability_table,
    fitted_lengths,
    gibbs_scan,
    hamiltonian,
    lindblad_scan,
    parse_range,
    plot_data,
    stability_scan,
    write_scan,
    z_measurement,
)
from src.states import Register
from utils.exceptions import BadName, ParseFailure


class TestParsing(unittest.TestCase):
    """Test cases for range parsing and model lookup"""

    def test_parse_range(self):
        """Test start:stop:step ranges and lists"""
        self.assertEqual(parse_range("0.1:0.5:0.1"), [0.1, 0.2, 0.3, 0.4, 0.5])
        self.assertEqual(parse_range("2:4:1"), [2.0, 3.0, 4.0])
        self.assertEqual(parse_range("1, 2,3"), [1.0, 2.0, 3.0])
        self.assertEqual(parse_range("0.3"), [0.3])

    def test_parse_errors(self):
        """Test malformed ranges"""
        for text in ("1:2:0", "1:2", "a,b"):
            with self.assertRaises(ParseFailure):
                parse_range(text)

    def test_models(self):
        """Test model lookup and the Z instrument"""
        self.assertEqual(hamiltonian("tfim", 3).register.n_sites, 3)
        with self.assertRaises(BadName):
            hamiltonian("heisenberg", 3)
        inst = z_measurement(Register((3, 2)), 0)
        self.assertEqual(len(inst), 3)
        self.assertTrue(inst.trace_preserving)


class TestScans(unittest.TestCase):
    """Test cases for small scans"""

    def test_gibbs_scan(self):
        """Test one beta of an Ising chain"""
        table = gibbs_scan([0.4], n=5, model="ising", restarts=2, seed=3)
        self.assertEqual(list(table.columns), GIBBS_COLUMNS)
        self.assertGreaterEqual(len(table), 3)
        self.assertTrue((table["cmi"] >= -1e-9).all())
        lengths = fitted_lengths(table)
        self.assertEqual(len(lengths), 1)
        self.assertTrue(fitted_lengths(table.iloc[0:0]).empty)

    def test_stability_scan(self):
        """Test radii leaving no region C are skipped"""
        table = stability_scan([2, 3, 9], n=5, beta=0.3, model="ising", seed=1)
        self.assertEqual(list(table.columns), STABILITY_COLUMNS)
        self.assertEqual(list(table["r"]), [2, 3])
        self.assertTrue((table["traj_error"] >= 0).all())
        self.assertTrue((table["chan_error"] >= 0).all())

    def test_lindblad_scan(self):
        """Test relaxation of a measured two-site Gibbs state"""
        table = lindblad_scan([0.0, 0.5, 1.0, 2.0], n=2, beta=0.5)
        self.assertEqual(list(table.columns), LINDBLAD_COLUMNS)
        self.assertGreater(table["error"].iloc[0], table["error"].iloc[-1])
        self.assertTrue((table["error"] <= table["bound"] * (1 + 1e-6) + 1e-10).all())

    def test_detectability_table(self):
        """Test one row per tower depth"""
        table = detectability_table([0, 1], n=3, beta=0.5)
        self.assertEqual(list(table["m"]), [0, 1])
        self.assertTrue(np.isfinite(table["error"]).all())


class TestOutput(unittest.TestCase):
    """Test cases for CSV and plot data files"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_stability_plot_data(self):
        """Test (r, log error) columns from a stability table"""
        table = pd.DataFrame({"r": [1, 2], "traj_error": [np.e ** -1, 0.0]})
        csv = write_scan(table, os.path.join(self.tmp.name, "scan", "stability.csv"))
        out = plot_data(csv, os.path.join(self.tmp.name, "stability.dat"))
        with open(out) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "# source: stability.csv")
        self.assertEqual(lines[1], "# r log_error")
        self.assertEqual(lines[2].split()[0], "1")
        self.assertAlmostEqual(float(lines[2].split()[1]), -1.0, places=9)
        self.assertAlmostEqual(float(lines[3].split()[1]), np.log(1e-12), places=6)

    def test_empty_csv(self):
        """Test an empty CSV gives only the header block"""
        csv = os.path.join(self.tmp.name, "empty.csv")
        open(csv, "w").close()
        out = plot_data(csv, os.path.join(self.tmp.name, "empty.dat"))
        with open(out) as f:
            self.assertEqual(len(f.read().splitlines()), 2)

    def test_missing_csv(self):
        """Test unreadable input"""
        with self.assertRaises(ParseFailure):
            plot_data(os.path.join(self.tmp.name, "missing.csv"), os.path.join(self.tmp.name, "x.dat"))


if __name__ == '__main__':
    unittest.main(verbosity=2)
