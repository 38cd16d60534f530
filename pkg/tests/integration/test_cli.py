#!/usr/bin/env python3
"""
Integration tests for the soficlab command line
"""

import contextlib
import io
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import pytest

from soficlab.config import settings
from soficlab.exceptions import CertificateViolation
from soficlab.main import EXIT_ERROR, EXIT_VIOLATION, main

PROJECT_ROOT = Path(__file__).resolve().parents[2]


def _body(path: Path) -> str:
    """CSV content below the echoed configuration header."""
    return "".join(line for line in path.read_text().splitlines(True) if not line.startswith("#"))


@pytest.mark.integration
class TestCommandLine(unittest.TestCase):
    """Test cases for main() exit codes and written artifacts"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)
        self._saved = (settings.SEED, settings.THREADS, settings.LOG_LEVEL)

    def tearDown(self):
        settings.SEED, settings.THREADS, settings.LOG_LEVEL = self._saved
        self._tmp.cleanup()

    def cli(self, *argv):
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout):
            status = main(list(argv))
        return status, stdout.getvalue()

    def test_decide_writes_report(self):
        status, output = self.cli("--out", str(self.out), "--seed", "5", "decide", "weiss", "weiss")
        self.assertEqual(status, 0)
        report = self.out / "decide.csv"
        self.assertTrue(report.exists())
        text = report.read_text()
        self.assertIn("# kind = decide\n", text)
        self.assertIn("# seed = 5\n", text)
        self.assertIn("not_surjective", text)
        self.assertIn("012", output)
        self.assertIn(f"wrote {self.out / 'summary.md'}", output)

    def test_preset_and_file_references_agree(self):
        a, b = self.out / "preset", self.out / "file"
        self.assertEqual(self.cli("--out", str(a), "decide", "preset:weiss", "preset:weiss")[0], 0)
        presets = PROJECT_ROOT / "data" / "presets"
        status, _ = self.cli("--out", str(b), "decide", str(presets / "weiss.sft"), str(presets / "weiss.rule"))
        self.assertEqual(status, 0)
        self.assertEqual(_body(a / "decide.csv"), _body(b / "decide.csv"))

    def test_unknown_subshift_is_an_error(self):
        status, _ = self.cli("--out", str(self.out), "entropy", "missing.sft")
        self.assertEqual(status, EXIT_ERROR)

    def test_bad_parameter_is_an_error(self):
        status, _ = self.cli("--out", str(self.out), "entropy", "golden-mean", "--d", "eight")
        self.assertEqual(status, EXIT_ERROR)

    def test_budget_error_keeps_partial_sweep(self):
        status, _ = self.cli("--out", str(self.out), "sweep", "golden-mean", "--budget", "4")
        self.assertEqual(status, EXIT_ERROR)
        rows = _body(self.out / "sweep.csv").splitlines()
        self.assertEqual(rows[0], "index,table,preserves,injective,surjective,orphan,violation")

    def test_certificate_violation_exit_code(self):
        with patch("soficlab.main.run_recipe", side_effect=CertificateViolation("check failed")):
            status, _ = self.cli("--out", str(self.out), "recipe", "gromov-weiss")
        self.assertEqual(status, EXIT_VIOLATION)

    def test_run_config_file(self):
        config = PROJECT_ROOT / "data" / "experiments" / "weiss-decide.cfg"
        status, _ = self.cli("--out", str(self.out), "run", str(config))
        self.assertEqual(status, 0)
        self.assertIn("# kind = decide", (self.out / "decide.csv").read_text())

    def test_stirling_reports_are_deterministic(self):
        a, b = self.out / "a", self.out / "b"
        args = ["stirling", "--gamma", "1/4,2/5", "--span", "20", "--factorial", "20"]
        self.assertEqual(self.cli("--out", str(a), *args)[0], 0)
        self.assertEqual(self.cli("--out", str(b), *args)[0], 0)
        for name in ("tail_bound.csv", "factorial_bounds.csv"):
            self.assertEqual((a / name).read_bytes(), (b / name).read_bytes(), name)
        self.assertIn("kappa(1/4)", (a / "summary.md").read_text())

    def test_approx_dump(self):
        status, _ = self.cli(
            "--out", str(self.out), "approx", "--d", "32", "--test", "2", "--support", "3", "--dump"
        )
        self.assertEqual(status, 0)
        self.assertTrue((self.out / "approx_quality.csv").exists())
        self.assertTrue((self.out / "approximation-cyclic-32.txt").exists())
        summary = (self.out / "summary.md").read_text()
        self.assertIn("- **max_defect(d=32):** 0", summary)
        self.assertIn("- **min_separation(d=32):** 1", summary)

    def test_recipe_gromov_weiss(self):
        status, output = self.cli("--out", str(self.out), "recipe", "gromov-weiss")
        self.assertEqual(status, 0)
        report = self.out / "gromov-weiss" / "sweep" / "sweep.csv"
        self.assertTrue(report.exists())
        self.assertEqual(len(_body(report).splitlines()), 17)
        self.assertIn("violations", output)


@pytest.mark.integration
class TestNamedFlags(unittest.TestCase):
    """Test cases for the two-word verbs, named inputs and --out FILE"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)
        self._saved = (settings.SEED, settings.THREADS, settings.LOG_LEVEL)

    def tearDown(self):
        settings.SEED, settings.THREADS, settings.LOG_LEVEL = self._saved
        self._tmp.cleanup()

    def cli(self, *argv):
        with contextlib.redirect_stdout(io.StringIO()):
            return main(list(argv))

    def test_sweep_memory_with_commas(self):
        commas, spaces = self.out / "commas", self.out / "spaces"
        self.assertEqual(self.cli("--out", str(commas), "sweep", "golden-mean", "--memory", "0,1"), 0)
        self.assertEqual(self.cli("--out", str(spaces), "sweep", "golden-mean", "--memory", "0 1"), 0)
        self.assertEqual(_body(commas / "sweep.csv"), _body(spaces / "sweep.csv"))

    def test_ca_sweep_to_report_file(self):
        report = self.out / "report.csv"
        status = self.cli("ca", "sweep", "--subshift", "golden-mean", "--memory", "0,1", "--out", str(report))
        self.assertEqual(status, 0)
        self.assertEqual(_body(report).splitlines()[0], "index,table,preserves,injective,surjective,orphan,violation")
        self.assertTrue((self.out / "summary.md").exists())

    def test_ca_decide_with_named_inputs(self):
        status = self.cli("--out", str(self.out), "ca", "decide", "--rule", "weiss", "--subshift", "weiss")
        self.assertEqual(status, 0)
        self.assertIn("not_surjective", (self.out / "decide.csv").read_text())

    def test_missing_named_input_is_an_error(self):
        self.assertEqual(self.cli("--out", str(self.out), "ca", "decide", "--rule", "weiss"), EXIT_ERROR)

    def test_entropy_estimate_trace(self):
        trace = self.out / "trace.csv"
        status = self.cli(
            "entropy", "estimate", "--subshift", "golden-mean", "--d", "8,12", "--eps", "1/4",
            "--delta", "1e-3", "--out", str(trace),
        )
        self.assertEqual(status, 0)
        lines = _body(trace).splitlines()
        self.assertEqual(lines[0], "d,|microstates|,N_eps,log N_eps / d,oracle,upper_bound,points,perturbed")
        self.assertEqual([line.split(",")[2] for line in lines[1:]], ["47", "322"])
        self.assertIn("# delta = 1e-3\n", trace.read_text())

    def test_defaults_are_echoed(self):
        self.assertEqual(self.cli("--out", str(self.out), "entropy", "golden-mean", "--d", "8"), 0)
        text = (self.out / "entropy.csv").read_text()
        self.assertIn("# epsilon = 1/4\n", text)
        self.assertIn("# delta = 1/1000\n", text)
        self.assertIn("# mode = auto\n", text)

    def test_entropy_gap_with_named_inputs(self):
        status = self.cli("--out", str(self.out), "entropy", "gap", "--x", "golden-mean", "--y", "zero", "--d", "8")
        self.assertEqual(status, 0)
        self.assertIn("strict-gap", (self.out / "gap.csv").read_text())

    def test_stirling_verify_to_slack_file(self):
        slack = self.out / "slack.csv"
        status = self.cli(
            "stirling", "verify", "--gamma", "1/4", "--span", "5", "--factorial", "5", "--out", str(slack)
        )
        self.assertEqual(status, 0)
        self.assertEqual(len(_body(slack).splitlines()), 7)
        self.assertTrue((self.out / "factorial_bounds.csv").exists())

    def test_approx_build_dumps_to_file(self):
        table = self.out / "cyclic-16.txt"
        status = self.cli(
            "approx", "build", "--group", "lattice:1", "--kind", "cyclic", "--d", "16",
            "--support", "3", "--test", "2", "--out", str(table),
        )
        self.assertEqual(status, 0)
        self.assertTrue(table.exists())
        self.assertTrue((self.out / "approx_quality.csv").exists())


if __name__ == "__main__":
    unittest.main()
