# Test run settings: config files, environment and flag precedence

import os
import sys
import tempfile
import unittest
from unittest.mock import patch

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.config import Config, RunSettings, apply_settings, load_settings, read_config_file
from utils.exceptions import ConfigError, LocstabError


class TestConfigFile(unittest.TestCase):
    """Test cases for key=value configuration files"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "locstab.conf")

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text):
        with open(self.path, "w") as f:
            f.write(text)
        return self.path

    def test_read_values(self):
        """Test comments, quoting, aliases and casts"""
        path = self.write("# run settings\n\nseed = 42\nout=\"runs/a\"\ncap-dim=256\ntol=1e-6\n")
        values = read_config_file(path)
        self.assertEqual(values, {"seed": 42, "out_dir": "runs/a", "cap_dim": 256, "tol": 1e-6})

    def test_unknown_keys_ignored(self):
        """Test keys outside the run settings are skipped"""
        values = read_config_file(self.write("colour=blue\nthreads=3\n"))
        self.assertEqual(values, {"threads": 3})

    def test_malformed_files(self):
        """Test missing files, lines without '=' and bad values"""
        with self.assertRaises(ConfigError):
            read_config_file(os.path.join(self.tmp.name, "missing.conf"))
        with self.assertRaises(ConfigError):
            read_config_file(self.write("seed 3\n"))
        with self.assertRaises(ConfigError):
            read_config_file(self.write("seed=three\n"))

    def test_config_error_is_locstab_error(self):
        """Test the error hierarchy"""
        self.assertTrue(issubclass(ConfigError, LocstabError))
        self.assertTrue(issubclass(ConfigError, ValueError))


class TestLoadSettings(unittest.TestCase):
    """Test cases for settings resolution"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "run.conf")
        with open(self.path, "w") as f:
            f.write("seed=5\nthreads=2\n")
        self.saved_cap = Config.MAX_DIMENSION

    def tearDown(self):
        Config.MAX_DIMENSION = self.saved_cap
        self.tmp.cleanup()

    @patch.dict(os.environ, {}, clear=True)
    def test_defaults(self):
        """Test defaults without any source"""
        self.assertEqual(load_settings(), RunSettings())

    @patch.dict(os.environ, {"LOCSTAB_SEED": "11", "LOCSTAB_CAP_DIM": "512", "LOCSTAB_TOL": "1e-5"}, clear=True)
    def test_environment(self):
        """Test LOCSTAB_* variables override defaults"""
        settings = load_settings()
        self.assertEqual(settings.seed, 11)
        self.assertEqual(settings.cap_dim, 512)
        self.assertEqual(settings.tol, 1e-5)

    @patch.dict(os.environ, {"LOCSTAB_SEED": "11", "LOCSTAB_THREADS": "4"}, clear=True)
    def test_precedence(self):
        """Test flags > config file > environment > defaults"""
        settings = load_settings(self.path, {"seed": 99, "out_dir": None})
        self.assertEqual(settings.seed, 99)
        self.assertEqual(settings.threads, 2)
        self.assertEqual(settings.out_dir, Config.DEFAULT_OUT_DIR)
        self.assertEqual(load_settings(self.path).seed, 5)

    @patch.dict(os.environ, {"LOCSTAB_THREADS": "x"}, clear=True)
    def test_bad_environment_value(self):
        """Test unparseable environment values"""
        with self.assertRaises(ConfigError):
            load_settings()

    @patch.dict(os.environ, {}, clear=True)
    def test_invalid_values(self):
        """Test range checks after resolution"""
        for overrides in ({"threads": 0}, {"cap_dim": 1}, {"tol": 0.0}):
            with self.assertRaises(ConfigError):
                load_settings(overrides=overrides)

    @patch.dict(os.environ, {}, clear=True)
    def test_apply_settings(self):
        """Test the dimension cap is installed on Config"""
        apply_settings(load_settings(overrides={"cap_dim": 128}))
        self.assertEqual(Config.MAX_DIMENSION, 128)


if __name__ == '__main__':
    unittest.main(verbosity=2)
