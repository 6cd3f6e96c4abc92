from __future__ import annotations

from fractions import Fraction
import os
import unittest
from unittest import mock

from src.fibmap.config import REFERENCE_C, FibmapConfig, load_config


class ConfigTests(unittest.TestCase):
    def test_defaults(self) -> None:
        with mock.patch.dict(os.environ, {}, clear=True):
            cfg = load_config()
        self.assertEqual(cfg, FibmapConfig())
        self.assertEqual(cfg.model_t_fraction, Fraction(1, 2))
        self.assertFalse(cfg.write_parquet)

    def test_environment_overrides(self) -> None:
        env = {
            "FIBMAP_PRECISION_BITS": "1024",
            "FIBMAP_DEPTH": "12",
            "FIBMAP_MODEL_T": "3/5",
            "FIBMAP_WRITE_PARQUET": "yes",
            "FIBMAP_LOG_LEVEL": "debug",
            "FIBMAP_OUTPUT_ROOT": "/tmp/fibmap",
        }
        with mock.patch.dict(os.environ, env, clear=True):
            cfg = load_config()
        self.assertEqual(cfg.precision_bits, 1024)
        self.assertEqual(cfg.depth, 12)
        self.assertEqual(cfg.model_t_fraction, Fraction(3, 5))
        self.assertTrue(cfg.write_parquet)
        self.assertEqual(cfg.log_level, "DEBUG")
        self.assertEqual(cfg.output_root, "/tmp/fibmap")

    def test_malformed_values_fall_back(self) -> None:
        env = {"FIBMAP_DEPTH": "deep", "FIBMAP_MODEL_T": "1/0", "FIBMAP_TARGET_BITS": " "}
        with mock.patch.dict(os.environ, env, clear=True):
            cfg = load_config()
        self.assertEqual(cfg.depth, 16)
        self.assertEqual(cfg.model_t, "1/2")
        self.assertEqual(cfg.target_bits, 80)

    def test_reference_parameter_is_in_range(self) -> None:
        self.assertTrue(-2 < float(REFERENCE_C) < -1)


if __name__ == "__main__":
    unittest.main()
