# Test JSON conversion of results, states and channels

import json
import os
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.fixtures import random_state
from src.channels import depolarizing_channel
from src.states import Register
from utils.exceptions import ParseFailure, WriteFailure
from utils.serialization import (
    channel_to_dict,
    jsonable,
    matrix_from_dict,
    read_json,
    state_from_dict,
    state_to_dict,
    write_json,
)


class Summary:
    def as_dict(self):
        return {"value": np.float64(0.25), "ok": np.bool_(True)}


class TestJsonable(unittest.TestCase):
    """Test cases for conversion to plain JSON values"""

    def test_numpy_and_special_values(self):
        """Test scalars, arrays, complex numbers and non-finite floats"""
        payload = {
            "n": np.int64(3),
            "array": np.arange(3),
            "z": 1 + 2j,
            "bad": [float("nan"), np.inf, -np.inf],
            "summary": Summary(),
            4: (1, 2),
        }
        out = jsonable(payload)
        self.assertEqual(out["n"], 3)
        self.assertEqual(out["array"], [0, 1, 2])
        self.assertEqual(out["z"], [1.0, 2.0])
        self.assertEqual(out["bad"], ["nan", "inf", "-inf"])
        self.assertEqual(out["summary"], {"value": 0.25, "ok": True})
        self.assertEqual(out["4"], [1, 2])
        json.dumps(out, allow_nan=False)


class TestFiles(unittest.TestCase):
    """Test cases for reading and writing JSON files"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_write_creates_directories(self):
        """Test nested output paths and sorted keys"""
        path = os.path.join(self.tmp.name, "nested", "out.json")
        write_json(path, {"b": 1, "a": np.float32(0.5)})
        with open(path) as f:
            text = f.read()
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(read_json(path), {"a": 0.5, "b": 1})

    def test_write_failure(self):
        """Test unwritable targets"""
        blocker = os.path.join(self.tmp.name, "file")
        with open(blocker, "w") as f:
            f.write("x")
        with self.assertRaises(WriteFailure):
            write_json(os.path.join(blocker, "out.json"), {})

    def test_parse_failure(self):
        """Test missing and malformed files"""
        with self.assertRaises(ParseFailure):
            read_json(os.path.join(self.tmp.name, "missing.json"))
        path = os.path.join(self.tmp.name, "broken.json")
        with open(path, "w") as f:
            f.write("{not json")
        with self.assertRaises(ParseFailure):
            read_json(path)


class TestStateRecords(unittest.TestCase):
    """Test cases for state and channel records"""

    def test_state_record(self):
        """Test a grid state survives a JSON file"""
        register = Register.grid(1, 2, d=3)
        rho = random_state(register, seed=4, rank=2)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(os.path.join(tmp, "state.json"), state_to_dict(rho))
            restored = state_from_dict(read_json(path))
        np.testing.assert_allclose(restored.matrix, rho.matrix, atol=1e-12)
        self.assertEqual(restored.register.coords, register.coords)
        self.assertEqual(restored.provenance, "random")

    def test_malformed_records(self):
        """Test records with missing fields"""
        with self.assertRaises(ParseFailure):
            state_from_dict({"site_dims": [2]})
        with self.assertRaises(ParseFailure):
            matrix_from_dict({"shape": [2, 2], "real": [[1, 0], [0, 1]]})

    def test_channel_record(self):
        """Test regions and Kraus operators of a channel"""
        register = Register.chain(3)
        record = channel_to_dict(depolarizing_channel(register.region([1]), 0.5))
        self.assertEqual(record["input"], [1])
        self.assertEqual(record["support"], [1])
        self.assertGreaterEqual(len(record["kraus"]), 1)


if __name__ == '__main__':
    unittest.main(verbosity=2)
