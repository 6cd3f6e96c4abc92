from __future__ import annotations

import contextlib
import io
import json
from pathlib import Path
import tempfile
import unittest

from src.fibmap.cli import RUN_MANIFEST_NAME, build_parser, dispatch
from src.fibmap.export import read_json


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        rc = dispatch(argv)
    return rc, out.getvalue(), err.getvalue()


class OutputModeTests(unittest.TestCase):
    def test_zeck_text(self) -> None:
        rc, out, _ = _run(["zeck", "12"])
        self.assertEqual(rc, 0)
        self.assertIn("12 = u(1)+u(3)+u(5)", out)
        self.assertIn("[fibmap] sigma: 20", out)
        self.assertIn("[fibmap] successor: 13", out)
        self.assertIn("[fibmap] rows: 3", out)

    def test_zeck_json(self) -> None:
        rc, out, _ = _run(["zeck", "--json", "12"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["indices"], [1, 3, 5])
        self.assertEqual(payload["epsilon"], -1)

    def test_knead_csv(self) -> None:
        rc, out, _ = _run(["knead", "--csv", "--length", "5"])
        self.assertEqual(rc, 0)
        lines = out.strip().splitlines()
        self.assertEqual(lines[0], "i,sign,epsilon,class_a")
        self.assertEqual(len(lines), 6)
        self.assertTrue(lines[1].endswith(",J"))

    def test_model_has_no_mismatches(self) -> None:
        rc, out, _ = _run(["model", "--json", "--count", "30"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["mismatches"], 0)
        self.assertEqual(payload["gap_slopes"]["0"], "-6/5")

    def test_example_reports_escape(self) -> None:
        rc, out, _ = _run(
            ["example", "10", "0.05", "0.02", "--iterations", "13", "--precision-bits", "128", "--json"]
        )
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["kneading"], "JMPJPJM")
        self.assertTrue(payload["matches_fibonacci"])
        self.assertIn("x_8", payload["escape"])

    def test_cover_model(self) -> None:
        rc, out, _ = _run(["cover", "--model", "--level", "5", "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["count"], 8)
        self.assertEqual(payload["gaps"][0], [9, 19])


class CertifiedDepthTests(unittest.TestCase):
    def test_verify_default_depth_is_lowered(self) -> None:
        rc, out, _ = _run(["verify", "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["depth"], 13)
        self.assertEqual(payload["c_depth"], 13)
        self.assertTrue(payload["ok"], payload["failures"])

    def test_scaling_defaults(self) -> None:
        rc, out, _ = _run(["scaling", "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["depth"], 13)
        self.assertEqual(payload["measure_levels"], 11)
        self.assertLess(payload["sup_lambda"], 1.0)

    def test_growth_defaults(self) -> None:
        rc, out, _ = _run(["growth", "--json"])
        self.assertEqual(rc, 0)
        self.assertEqual(json.loads(out)["horizon"], 377)

    def test_series_defaults(self) -> None:
        rc, out, _ = _run(["series", "--json", "--iterations", "10000"])
        self.assertEqual(rc, 0)
        self.assertEqual(json.loads(out)["horizon"], 377)

    def test_dimension_defaults(self) -> None:
        rc, out, _ = _run(["dimension", "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["top_level"], 11)
        self.assertTrue(payload["quadratic_decreasing"])

    def test_cover_beyond_parameter_digits(self) -> None:
        rc, _, err = _run(["cover", "--level", "12", "--json"])
        self.assertEqual(rc, 1)
        self.assertIn("ERROR: PrecisionError", err)

    def test_short_parameter_is_refused(self) -> None:
        rc, _, err = _run(["scaling", "--c", "-1.87"])
        self.assertEqual(rc, 1)
        self.assertIn("pass more digits or --locate", err)


class ArgumentErrorTests(unittest.TestCase):
    def test_seedless_is_rejected(self) -> None:
        with self.assertRaises(SystemExit) as ctx:
            _run(["zeck", "3", "--seedless"])
        self.assertEqual(ctx.exception.code, 2)

    def test_malformed_number(self) -> None:
        with self.assertRaises(SystemExit) as ctx:
            _run(["example", "abc", "0.05", "0"])
        self.assertEqual(ctx.exception.code, 2)

    def test_malformed_window(self) -> None:
        with self.assertRaises(SystemExit):
            _run(["scaling", "--window", "9:3"])

    def test_json_and_csv_exclusive(self) -> None:
        with self.assertRaises(SystemExit):
            _run(["zeck", "3", "--json", "--csv"])

    def test_domain_error_exit_code(self) -> None:
        rc, _, err = _run(["zeck", "0"])
        self.assertEqual(rc, 1)
        self.assertIn("ERROR: DomainError", err)

    def test_construction_error_exit_code(self) -> None:
        rc, _, err = _run(["example", "2", "0.9", "0"])
        self.assertEqual(rc, 1)
        self.assertIn("ERROR: ConstructionError", err)

    def test_missing_output_directory(self) -> None:
        rc, _, err = _run(["zeck", "5", "--out", "/nonexistent/fibmap-out"])
        self.assertEqual(rc, 1)
        self.assertIn("ERROR: DomainError: output directory does not exist", err)

    def test_help_lists_subcommands(self) -> None:
        parser = build_parser()
        help_text = parser.format_help()
        for name in ("zeck", "find-c", "renorm", "geometry", "replay"):
            self.assertIn(name, help_text)


class PersistenceTests(unittest.TestCase):
    def test_run_directory_and_replay(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            rc, out, _ = _run(["knead", "--length", "21", "--out", tmp])
            self.assertEqual(rc, 0)
            runs = [p for p in Path(tmp).iterdir() if p.is_dir()]
            self.assertEqual(len(runs), 1)
            run_dir = runs[0]
            self.assertIn(f"[fibmap] run_dir: {run_dir}", out)
            self.assertTrue((run_dir / "tables" / "knead.csv").exists())
            self.assertTrue((run_dir / "maps" / "knead.json").exists())
            self.assertTrue((run_dir / "run.json").exists())

            manifest = read_json(run_dir / RUN_MANIFEST_NAME)
            self.assertEqual(manifest["subcommand"], "knead")
            self.assertNotIn("--out", manifest["argv"])
            self.assertIn("tables/knead.csv", manifest["outputs"])
            self.assertEqual(manifest["parameters"]["length"], 21)

            rc, out, _ = _run(["replay", str(run_dir)])
            self.assertEqual(rc, 0)
            self.assertIn("[fibmap] mismatched: []", out)
            self.assertEqual(len([p for p in Path(tmp).iterdir() if p.is_dir()]), 2)

    def test_replay_detects_changed_table(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            _run(["zeck", "40", "--out", tmp])
            run_dir = next(p for p in Path(tmp).iterdir() if p.is_dir())
            manifest_path = run_dir / RUN_MANIFEST_NAME
            manifest = read_json(manifest_path)
            manifest["outputs"]["tables/zeck.csv"] = "0" * 64
            manifest_path.write_text(json.dumps(manifest), encoding="utf-8")
            rc, out, _ = _run(["replay", str(manifest_path)])
            self.assertEqual(rc, 1)
            self.assertIn("tables/zeck.csv", out)

    def test_replay_without_manifest(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            rc, _, err = _run(["replay", tmp])
            self.assertEqual(rc, 1)
            self.assertIn("ERROR: DomainError", err)


if __name__ == "__main__":
    unittest.main()
