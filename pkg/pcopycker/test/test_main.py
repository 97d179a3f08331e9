#!/usr/bin/env python3

"""
Tests for the command line program
"""


import glob
import json
import os
import tempfile
import unittest

import numpy as np

import pcopycker
from pcopycker.config import RunConfig, load_config
from pcopycker.kernels import Bandwidth, Kernel
from pcopycker.main import ExitStatus
from pcopycker.pco import BandwidthGrid
from pcopycker.test import normal_sample, run_program, sample_path


__author__ = "PcoPycker developers"


class ProgramTests(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.out = self.directory.name

    def write_sample(self, n: int, seed: int = 0) -> str:
        path = os.path.join(self.out, "sample_{}.csv".format(n))
        np.savetxt(path, normal_sample(n, seed=seed), fmt="%.17g")
        return path

    def run_ok(self, *argv) -> dict:
        status, output = run_program(*argv, "--out", self.out, "-q")
        if status != ExitStatus.success:  # pragma: nocover
            self.fail("The program failed: \n{}".format(output.replace("\n", "\n\t")))
        return json.loads(output)

    def run_failing(self, status: ExitStatus, *argv) -> dict:
        code, output = run_program(*argv, "--out", self.out, "-q")
        self.assertEqual(code, status)
        result = json.loads(output)
        self.assertEqual(result["status"], int(status))
        return result


class SelectTests(ProgramTests):
    def test_select(self):
        result = self.run_ok("select", self.write_sample(1000))
        grid = BandwidthGrid.default(Kernel("gaussian"), 1000)
        self.assertEqual(result["n"], 1000)
        self.assertEqual(result["grid"]["size"], len(grid))
        self.assertIn(Bandwidth(tuple(result["selected"])), grid.bandwidths)
        self.assertEqual(len(result["table"]), len(grid))
        with open(result["output"]) as output:
            self.assertEqual(json.load(output)["selected"], result["selected"])

    def test_baselines(self):
        path = self.write_sample(200, seed=3)
        for method in ("gl", "lepski", "lscv"):
            with self.subTest(method=method):
                result = self.run_ok("select", path, "--method", method, "--grid", "geometric:0.02:1:10")
                self.assertEqual(result["method"], method)
                self.assertEqual(len(result["selected"]), 1)
                self.assertEqual("table" in result, method == "gl")

    def test_bivariate(self):
        result = self.run_ok("select", sample_path("bivariate.csv"), "--grid", "geometric:0.5:2:3")
        self.assertEqual(result["dimension"], 2)
        self.assertEqual(result["grid"]["size"], 9)

    def test_bad_data(self):
        result = self.run_failing(ExitStatus.data_error, "select", sample_path("bad_cell.csv"))
        self.assertEqual(result["error"], "DataFormatError")
        self.assertIn("row 3", result["message"])
        self.run_failing(ExitStatus.data_error, "select", sample_path("missing.csv"))

    def test_invalid_options(self):
        path = sample_path("simple.csv")
        self.run_failing(ExitStatus.invalid_configuration, "select", path, "--grid", "linear:1:2:3")
        self.run_failing(ExitStatus.invalid_configuration, "select", path, "--kernel", "cosine")
        self.run_failing(ExitStatus.invalid_configuration, "select", path, "--method", "kde")
        self.run_failing(ExitStatus.invalid_configuration, "plot")

    def test_lepski_is_univariate(self):
        self.run_failing(ExitStatus.invalid_configuration, "select", sample_path("bivariate.csv"), "--method",
                         "lepski", "--grid", "geometric:0.5:2:3")


class CalibrateTests(ProgramTests):
    def test_calibrate(self):
        code, output = run_program("calibrate", self.write_sample(500), "--out", self.out, "-q")
        self.assertIn(code, (ExitStatus.success, ExitStatus.calibration_failed))
        self.assertEqual(len(glob.glob(os.path.join(self.out, "calibrate_*.csv"))), 1)
        result = json.loads(output)
        if code == ExitStatus.success:
            self.assertAlmostEqual(result["recommended_lambda"], result["critical_lambda"] + 1, places=12)
        else:
            self.assertEqual(result["error"], "CalibrationFailed")


class SimulateTests(ProgramTests):
    def test_seed_is_mandatory(self):
        result = self.run_failing(ExitStatus.invalid_configuration, "simulate", "--n", "100")
        self.assertEqual(result["error"], "ConfigurationError")

    def test_sample_size_is_mandatory(self):
        self.run_failing(ExitStatus.invalid_configuration, "simulate", "--seed", "1")

    def test_too_few_replications(self):
        self.run_failing(ExitStatus.invalid_configuration, "simulate", "--seed", "1", "--n", "100", "--reps", "10")

    def test_oracle(self):
        argv = ("simulate", "--seed", "1", "--n", "100", "--reps", "50", "--grid", "geometric:0.05:1:6",
                "--methods", "pco:1,lscv")
        result = self.run_ok(*argv)
        self.assertEqual(set(result["methods"]), {"pco:1", "lscv"})
        self.assertEqual(len(result["bandwidths"]), 6)
        with open(result["table"]) as table:
            self.assertEqual(table.readline().strip(), "method,lambda,h1,rep,ise")
        self.assertEqual(self.run_ok(*argv, "--threads", "2")["methods"], result["methods"])

    def test_reruns_are_identical(self):
        contents = []
        for run in ("first", "second"):
            status, output = run_program("simulate", "--seed", "5", "--experiment", "calibration", "--n", "150",
                                         "--reps", "3", "--out", os.path.join(self.out, run), "-q")
            self.assertEqual(status, ExitStatus.success)
            result = json.loads(output)
            files = []
            for key in ("output", "table"):
                with open(result[key], "rb") as produced:
                    files.append(produced.read())
            contents.append(files)
        self.assertEqual(contents[0], contents[1])

    def test_scenario_file(self):
        config = os.path.join(self.out, "scenario.json")
        with open(config, "w") as output:
            json.dump({"experiment": "minimal_penalty", "n": 200, "reps": 5, "lambda_grid": [-0.5],
                       "grid": "geometric:0.002:1:10"}, output)
        result = self.run_ok("simulate", "--seed", "2", "--config", config)
        self.assertEqual(result["experiment"], "minimal_penalty")
        self.assertEqual(len(result["frequencies"]), 1)

    def test_shipped_scenarios(self):
        reduced = {
            "oracle": {"n": 100, "reps": 50, "grid": "geometric:0.05:1:6"},
            "minimal_penalty": {"n": 200, "reps": 5, "grid": "geometric:0.002:1:10"},
            "calibration": {"n": 150, "reps": 3},
            "rate": {"n_list": [50, 100, 200, 400], "reps": 5},
        }
        paths = sorted(glob.glob(os.path.join(os.path.dirname(pcopycker.__file__), "data", "scenarios", "*.json")))
        self.assertEqual(len(paths), 5)
        for path in paths:
            values = load_config(path)
            with self.subTest(scenario=os.path.basename(path)):
                config = RunConfig("simulate").override(values).validate()
                self.assertEqual(config.seed, values["seed"])
                small = os.path.join(self.out, os.path.basename(path))
                with open(small, "w") as output:
                    json.dump(dict(values, **reduced[values["experiment"]]), output)
                result = self.run_ok("simulate", "--config", small)
                self.assertEqual(result["experiment"], values["experiment"])
                self.assertEqual(result["density"], values["density"])


class GwnDemoTests(ProgramTests):
    def test_reproducible(self):
        tables = []
        for run in ("first", "second"):
            status, output = run_program("gwn-demo", "--seed", "3", "--N", "50", "--reps", "5", "--lambda-grid",
                                         "0.5,2", "--out", os.path.join(self.out, run), "-q")
            self.assertEqual(status, ExitStatus.success)
            with open(json.loads(output)["table"]) as table:
                tables.append(table.read())
        self.assertEqual(tables[0], tables[1])

    def test_seed_is_mandatory(self):
        self.run_failing(ExitStatus.invalid_configuration, "gwn-demo", "--N", "50")


if __name__ == "__main__":
    unittest.main()
