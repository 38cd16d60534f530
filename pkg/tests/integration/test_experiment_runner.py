#!/usr/bin/env python3
"""
Integration tests for the experiment runner and the recipes
"""

import tempfile
import unittest
from pathlib import Path

import pytest

from soficlab.config import settings
from soficlab.exceptions import InvalidParameterError
from soficlab.models.experiment import ExperimentConfig
from soficlab.models.group import GroupModel
from soficlab.services.experiment_runner import int_list, output_dir, run, subset
from soficlab.services.recipes import RECIPES, recipe_configs, run_recipe


@pytest.mark.integration
class TestParameterParsing(unittest.TestCase):
    """Test cases for the runner's parameter helpers"""

    def test_int_list(self):
        self.assertEqual(int_list("8,12, 16"), [8, 12, 16])
        with self.assertRaises(InvalidParameterError):
            int_list("8,x")

    def test_effective_params_merge_defaults(self):
        config = ExperimentConfig(kind="entropy", inputs={"subshift": "preset:golden-mean"}, params={"d": "4"}, seed=1)
        params = config.effective_params()
        self.assertEqual(params["d"], "4")
        self.assertEqual(params["epsilon"], settings.DEFAULT_EPSILON)
        self.assertEqual(params["delta"], settings.DEFAULT_DELTA)
        self.assertEqual(config.resolved()["delta"], settings.DEFAULT_DELTA)
        self.assertEqual(config.params, {"d": "4"})

    def test_report_name_checked(self):
        with self.assertRaises(InvalidParameterError):
            ExperimentConfig(kind="stirling", seed=1, report="../slack.csv")
        with self.assertRaises(InvalidParameterError):
            ExperimentConfig(kind="stirling", seed=1, report="slack.txt")

    def test_subset_forms(self):
        z, z2 = GroupModel.lattice(1), GroupModel.lattice(2)
        self.assertEqual(subset(z, "ball:2").payloads, ((-1,), (0,), (1,)))
        self.assertEqual(len(subset(z2, "box:1")), 9)
        self.assertEqual(subset(z, "-1 0 1"), subset(z, "ball:2"))

    def test_subset_commas(self):
        z, z2, free = GroupModel.lattice(1), GroupModel.lattice(2), GroupModel.free(2)
        self.assertEqual(subset(z, "0,1"), subset(z, "0 1"))
        self.assertEqual(subset(z, "-1, 0;1"), subset(z, "ball:2"))
        self.assertEqual(subset(z2, "0,0 0,1").payloads, ((0, 0), (0, 1)))
        self.assertEqual(subset(z2, "(0,0),(0,1)"), subset(z2, "0,0;0,1"))
        self.assertEqual(len(subset(free, "a,b,A")), 3)
        with self.assertRaises(InvalidParameterError):
            subset(z, " , ")

    def test_output_dir_default(self):
        config = ExperimentConfig(kind="stirling", seed=1)
        self.assertEqual(output_dir(config), Path(settings.OUTPUT_DIR) / "stirling")


@pytest.mark.integration
class TestRun(unittest.TestCase):
    """Test cases for run()"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def config(self, kind, name, inputs=None, **params):
        return ExperimentConfig(kind=kind, inputs=inputs or {}, params=params, out=str(self.out / name), seed=11)

    def test_entropy_with_plateau(self):
        result = run(self.config(
            "entropy", "entropy", {"subshift": "preset:golden-mean"}, d="8,10", plateau="1/2,1/4"
        ))
        self.assertEqual(result.status, 0)
        self.assertEqual(result.summary["plateau_spread"], "0.000000000")
        names = sorted(Path(p).name for p in result.artifacts)
        self.assertEqual(names, ["entropy.csv", "plateau.csv", "summary.md"])

    def test_seed_is_restored(self):
        before = settings.SEED
        run(self.config("stirling", "stirling", gamma="1/4", span="5", factorial="5", identity="5"))
        self.assertEqual(settings.SEED, before)

    def test_certify_single_property(self):
        result = run(self.config("certify", "certify", {"subshift": "preset:golden-mean"},
                                 property="irreducibility", delta="ball:2", budget="6"))
        self.assertEqual(result.summary, {"strong_irreducibility": "certified"})

    def test_certify_rejects_unknown_property(self):
        with self.assertRaises(InvalidParameterError):
            run(self.config("certify", "certify", {"subshift": "preset:golden-mean"}, property="mixing"))

    def test_free_group_approximations_are_seeded(self):
        a = run(self.config("approx-quality", "a", group="free:2", d="200"))
        b = run(self.config("approx-quality", "b", group="free:2", d="200"))
        self.assertEqual(a.summary, b.summary)
        body = [
            [line for line in (self.out / n / "approx_quality.csv").read_text().splitlines() if not line.startswith("#")]
            for n in ("a", "b")
        ]
        self.assertEqual(body[0], body[1])


@pytest.mark.integration
class TestRecipes(unittest.TestCase):
    """Test cases for recipe configs and runs"""

    def test_recipe_outputs_are_numbered(self):
        configs = recipe_configs("weiss-counterexample", out="/tmp/r", seed=3)
        self.assertEqual([Path(c.out).name for c in configs], ["1-decide", "2-certify"])
        self.assertEqual({c.source for c in configs}, {"recipe:weiss-counterexample"})
        self.assertEqual(recipe_configs("golden-gap", out="/tmp/r")[0].out, str(Path("/tmp/r/golden-gap/gap")))

    def test_unknown_recipe(self):
        with self.assertRaises(InvalidParameterError):
            recipe_configs("banach-tarski")

    def test_every_recipe_builds_valid_configs(self):
        for name in RECIPES:
            self.assertTrue(recipe_configs(name, out="/tmp/r"), name)

    def test_weiss_counterexample(self):
        with tempfile.TemporaryDirectory() as tmp:
            decide, certify = run_recipe("weiss-counterexample", out=tmp)
        self.assertEqual(decide.summary["orphan"], "012")
        self.assertEqual(certify.summary["strong_irreducibility"], "refuted")
        self.assertEqual(certify.summary["splicable"], "certified")


if __name__ == "__main__":
    unittest.main()
