"""
Tests for the experiment pipeline, output helpers and the command line.
"""

import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from main import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from pipeline.models.models import AlphaGrid, ExperimentConfig, Fig3Config, Fig6Config, Fig7Config
from pipeline.orchestrator import ExperimentOrchestrator, load_config, resolve_seed
from pipeline.selftest import run_selftest
from pipeline.utils.helpers import format_value, read_csv, render_csv, to_jsonable

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")


class TestHelpers(unittest.TestCase):

    def test_format_value(self):
        self.assertEqual(format_value(True), "1")
        self.assertEqual(format_value(np.int64(3)), "3")
        self.assertEqual(format_value(0.1 + 0.2), "0.3")
        self.assertEqual(format_value(float("nan")), "nan")
        self.assertEqual(format_value(None), "")

    def test_csv_header_and_body(self):
        text = render_csv(["alpha", "risk"], [[0.5, np.float64(0.25)]], {"seed": 3, "config": {"w": 9.0}})
        lines = text.splitlines()
        self.assertEqual(lines[:2], ['# config: {"w": 9.0}', "# seed: 3"])
        self.assertEqual(read_csv(text), [{"alpha": "0.5", "risk": "0.25"}])

    def test_to_jsonable(self):
        value = to_jsonable({"a": np.array([1, 2]), "b": (np.bool_(True), np.float32(0.5))})
        self.assertEqual(json.dumps(value, sort_keys=True), '{"a": [1, 2], "b": [true, 0.5]}')

    def test_alpha_grid(self):
        np.testing.assert_array_equal(AlphaGrid(start=0.0, stop=1.0, step=0.25).values(), [0.0, 0.25, 0.5, 0.75, 1.0])
        self.assertEqual(len(AlphaGrid().values()), 101)


class TestSeeds(unittest.TestCase):

    def test_precedence(self):
        with mock.patch.dict(os.environ, {"CRN_SENSE_SEED": "5"}):
            self.assertEqual(resolve_seed(1, 9), 1)
            self.assertEqual(resolve_seed(None, 9), 5)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(resolve_seed(None, 9), 9)
            self.assertEqual(resolve_seed(None), 0)


class TestOrchestrator(unittest.TestCase):

    def test_risk_curves_are_reproducible(self):
        config = ExperimentConfig(
            experiment="fig3",
            fig3=Fig3Config(alphas=AlphaGrid(step=0.1), mc_trials=25_000),
        )
        first = ExperimentOrchestrator(threads=1).run(config, seed=4)
        second = ExperimentOrchestrator(threads=4).run(config, seed=4)
        self.assertEqual(first.csv, second.csv)
        rows = read_csv(first.csv["fig3.csv"])
        self.assertEqual(len(rows), 11)
        for row in rows:
            self.assertLessEqual(float(row["inference"]), float(row["traditional"]) + 1e-12)
        self.assertEqual(first.config["seed"], 4)

    def test_correlated_pair(self):
        config = ExperimentConfig(experiment="fig6", fig6=Fig6Config(rhos=[0.0, 0.8]))
        report = ExperimentOrchestrator(threads=1).run(config, seed=0)
        self.assertAlmostEqual(report.summary["alpha_c"]["rho0"], 0.5625)
        self.assertAlmostEqual(report.summary["alpha_c"]["single"], 0.75)
        self.assertLess(report.summary["alpha_c"]["rho0.8"], report.summary["alpha_c"]["rho0"])
        rows = {row["alpha"]: row for row in read_csv(report.csv["fig6.csv"])}
        self.assertEqual(rows["0.78"]["rho0.8_rule"], "XOR")

    def test_robust_orders(self):
        fig7 = Fig7Config(nodes=3, alphas=AlphaGrid(start=0.2, stop=0.8, step=0.2), selection_size=2)
        report = ExperimentOrchestrator(threads=2).run(ExperimentConfig(experiment="fig7", fig7=fig7), seed=0)
        self.assertEqual(report.summary["order_violations"], 0)
        self.assertEqual(len(report.summary["selected_subset"]), 2)
        rows = read_csv(report.csv["fig7.csv"])
        for row in rows:
            self.assertAlmostEqual(float(row["robust_k3"]), float(row["optimal"]), places=7)
        self.assertEqual(len(read_csv(report.csv["fig7_selection.csv"])), 3)

    def test_neighborhoods(self):
        config = ExperimentConfig.model_validate({"experiment": "fig4", "fig4": {"mc_trials": 20_000}})
        report = ExperimentOrchestrator(threads=1).run(config, seed=1)
        self.assertEqual(report.summary["selected_candidate"], 0)
        self.assertEqual(report.summary["links"]["without_cooperation"], [["rx", "tx"]])
        self.assertIn(["tx", "rx"], report.summary["links"]["with_cooperation"])
        self.assertAlmostEqual(report.summary["areas"]["coverage"]["ratio"], 1.0)
        self.assertGreaterEqual(report.summary["areas"]["ps_near"]["ratio"], 0.95)
        check = report.summary["outage_check"]
        self.assertGreaterEqual(check["success"], 0.9 - 3.0 * check["success_se"])

    def test_receiver_next_to_transmitter(self):
        config = ExperimentConfig.model_validate({
            "experiment": "fig4",
            "fig4": {"radio": [0.02, 0.0], "mc_trials": 2000, "rule": {"radial_cells": 40, "angular_cells": 36}},
        })
        report = ExperimentOrchestrator(threads=1).run(config, seed=2)
        self.assertIn(["tx", "rx"], report.summary["links"]["with_cooperation"])
        check = report.summary["outage_check"]
        self.assertGreater(check["declared"], 0)
        self.assertGreaterEqual(check["success"], 0.9)

    def test_obstacle(self):
        config = ExperimentConfig.model_validate({
            "experiment": "fig5",
            "fig5": {"rule": {"radial_cells": 40, "angular_cells": 36}},
        })
        report = ExperimentOrchestrator(threads=1).run(config, seed=0)
        self.assertEqual(sorted(report.summary["areas"]), ["kappa0.3", "kappa0.3_node", "kappa0.7", "kappa0.7_node"])
        header = [line for line in report.csv["fig5_boundary.csv"].splitlines() if not line.startswith("#")][0]
        self.assertEqual(header, "theta,kappa0.3,kappa0.3_node,kappa0.7,kappa0.7_node")
        areas = report.summary["areas"]
        self.assertLess(areas["kappa0.3"]["area"], areas["kappa0.7"]["area"])

    def test_run_and_write(self):
        config = ExperimentConfig(experiment="fig6", fig6=Fig6Config(rhos=[0.4]))
        with tempfile.TemporaryDirectory() as out:
            written = ExperimentOrchestrator(threads=1).run_and_write(config, out_dir=out, gnuplot=True)
            names = sorted(os.path.basename(path) for path in written)
            self.assertEqual(names, ["fig6.csv", "fig6.gp", "report.json"])
            with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
                report = json.load(f)
            self.assertEqual(report["files"], ["fig6.csv"])
            self.assertNotIn("csv", report)

    def test_load_config_rejects_unknown_keys(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"experiment": "fig3", "fig3": {"depht": 4}}, f)
            with self.assertRaises(ValueError):
                load_config(path)


class TestSelftest(unittest.TestCase):

    def test_all_checks_pass(self):
        results = run_selftest()
        self.assertEqual(len(results), 4)
        self.assertTrue(all(ok for _, ok, _ in results), results)


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.out = tempfile.TemporaryDirectory()
        self.addCleanup(self.out.cleanup)

    def write_json(self, payload) -> str:
        path = os.path.join(self.out.name, "request.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)
        return path

    def test_subcommands(self):
        for command, name in [("robust", "robust.json"), ("convert-pmf", "convert_pmf.json"), ("connectivity", "connectivity.json")]:
            code = main([command, "--config", os.path.join(DATA_DIR, name), "--out", self.out.name, "--seed", "1"])
            self.assertEqual(code, EXIT_OK, command)
        self.assertTrue(os.path.exists(os.path.join(self.out.name, "edges.csv")))
        with open(os.path.join(self.out.name, "robust.csv"), encoding="utf-8") as f:
            rows = read_csv(f.read())
        self.assertEqual([row["alpha"] for row in rows], ["0.5", "0.8", "0.9"])
        self.assertTrue(all(row["k_known"] == "1" for row in rows))

    def test_reproduce(self):
        self.assertEqual(main(["reproduce", "fig6", "--out", self.out.name]), EXIT_OK)
        self.assertTrue(os.path.exists(os.path.join(self.out.name, "fig6.csv")))

    def test_selftest(self):
        self.assertEqual(main(["selftest"]), EXIT_OK)

    def test_configuration_errors(self):
        missing = os.path.join(self.out.name, "missing.json")
        self.assertEqual(main(["robust", "--config", missing]), EXIT_CONFIG)
        broken = os.path.join(self.out.name, "broken.json")
        with open(broken, "w", encoding="utf-8") as f:
            f.write("{not json")
        self.assertEqual(main(["robust", "--config", broken]), EXIT_CONFIG)
        both = self.write_json({"nodes": 1, "k_known": 1, "p1": [0.5, 0.5], "p0": [0.5, 0.5], "q1": [1, 0.5], "q0": [1, 0.5]})
        self.assertEqual(main(["robust", "--config", both, "--out", self.out.name]), EXIT_CONFIG)

    def test_infeasible_marginals(self):
        request = self.write_json({"direction": "marginals_to_joint", "s": 0, "k": 2, "values": [1.0, 0.75, 0.7], "tail_mass": 0.9})
        self.assertEqual(main(["convert-pmf", "--config", request, "--out", self.out.name]), EXIT_INFEASIBLE)


if __name__ == '__main__':
    unittest.main()
