"""Command line front end.

Each test drives main() with an argv list and checks the exit code plus
whatever the command printed or wrote.  Exit code map: 0 success, 1 invalid
input, 2 argparse usage error, 3 cost identity violated.
"""

import contextlib
import io
import json
import os
import tempfile
import unittest

from artifact.cli import main


def run_cli(argv):
    buf = io.StringIO()
    err = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        rc = main(argv)
    return rc, buf.getvalue(), err.getvalue()


class CliCase(unittest.TestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.dir.cleanup)

    def path(self, name):
        return os.path.join(self.dir.name, name)

    def write_json(self, name, payload):
        p = self.path(name)
        with open(p, "w") as fh:
            json.dump(payload, fh)
        return p

    def bsc_file(self, flip=0.2):
        return self.write_json("chan.json", {
            "dmc": {"w": [[1 - flip, flip], [flip, 1 - flip]],
                    "cost": [0.0, 1.0]}})


class CapacityTests(CliCase):
    def test_dmc_capacity_json(self):
        rc, out, _ = run_cli(["capacity", self.bsc_file(), "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertAlmostEqual(payload["bits_per_unit_cost"], 1.2, places=10)
        self.assertEqual(payload["maximizing_symbol"], 1)
        self.assertAlmostEqual(payload["per_symbol_ratios"]["1"], 1.2,
                               places=10)
        self.assertNotIn("timing_upper", payload)

    def test_dmc_capacity_with_timing_bounds(self):
        rc, out, _ = run_cli(["capacity", self.bsc_file(), "--mu", "0.5",
                              "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertAlmostEqual(payload["timing_upper"], 0.6, places=10)
        self.assertAlmostEqual(payload["timing_lower"], 0.3, places=10)

    def test_gaussian_capacity_needs_mu(self):
        chan = self.write_json("g.json", {"gaussian": {"eta2": 1.0}})
        rc, _, err = run_cli(["capacity", chan])
        self.assertEqual(rc, 1)
        self.assertTrue(err.strip())
        rc, out, _ = run_cli(["capacity", chan, "--mu", "1.0", "--json"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertAlmostEqual(payload["bits_per_unit_energy"],
                               1.0 / (2.0 * 0.6931471805599453), places=10)

    def test_human_readable_output(self):
        rc, out, _ = run_cli(["capacity", self.bsc_file(), "--mu", "0.9"])
        self.assertEqual(rc, 0)
        self.assertIn("capacity per unit cost: 1.200000 bits", out)
        self.assertIn("letter 1: 1.200000", out)
        self.assertIn("[0.540000, 1.080000]", out)

    def test_missing_file(self):
        rc, _, err = run_cli(["capacity", self.path("none.json")])
        self.assertEqual(rc, 1)
        self.assertTrue(err.strip())

    def test_bad_usage_exits_2(self):
        with self.assertRaises(SystemExit) as ctx:
            with contextlib.redirect_stderr(io.StringIO()):
                main(["capacity"])
        self.assertEqual(ctx.exception.code, 2)


class ParamsTests(CliCase):
    def test_dmc_params(self):
        idc = self.write_json("idc.json", {"support": [[0, 0.125], [1, 0.75],
                                                       [2, 0.125]]})
        chan = self.write_json("one_bit.json", {
            "dmc": {"w": [[0.5, 0.5], [0.0, 1.0]], "cost": [0.0, 1.0]}})
        out_path = self.path("params.json")
        rc, out, _ = run_cli(["params", "--scheme", "dmc", "--M", "64",
                              "--epsilon", "0.25", "--delta", "0.5",
                              "--idc", idc, "--channel", chan,
                              "--out", out_path])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["N"], 2304)
        self.assertEqual(payload["B"], 15)
        self.assertEqual(payload["window_len"], 7)
        with open(out_path) as fh:
            self.assertEqual(json.load(fh), payload)

    def test_gauss_params(self):
        rc, out, _ = run_cli(["params", "--scheme", "gauss", "--M", "256",
                              "--epsilon", "0.2", "--delta", "0.5",
                              "--deletion", "0.1"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["N"], 5120)
        self.assertEqual(payload["B"], 381)
        self.assertEqual(payload["spacing"], 32)

    def test_compound_params(self):
        rc, out, _ = run_cli(["params", "--scheme", "compound", "--M", "16",
                              "--epsilon", "0.25", "--delta", "0",
                              "--mu1", "0.5", "--mu2", "2.0",
                              "--sigma2", "0.25", "--constant", "1"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["offsets"][:3], [0, 16, 160])
        self.assertEqual(payload["widths"][:3], [4, 24, 240])
        self.assertIn("block_len", payload)
        self.assertIn("schedule", payload)
        self.assertNotIn("regions", payload)   # summarized, not dumped

    def test_dmc_without_channel_is_invalid(self):
        rc, _, err = run_cli(["params", "--scheme", "dmc", "--M", "8",
                              "--epsilon", "0.25", "--delta", "0.5",
                              "--constant", "1"])
        self.assertEqual(rc, 1)
        self.assertTrue(err.strip())

    def test_compound_without_rates_is_invalid(self):
        rc, _, err = run_cli(["params", "--scheme", "compound", "--M", "8",
                              "--epsilon", "0.25", "--delta", "0",
                              "--constant", "1"])
        self.assertEqual(rc, 1)

    def test_two_idc_flags_rejected(self):
        rc, _, err = run_cli(["params", "--scheme", "gauss", "--M", "16",
                              "--epsilon", "0.25", "--delta", "0.5",
                              "--deletion", "0.1", "--constant", "1"])
        self.assertEqual(rc, 1)
        self.assertIn("exactly one", err)


class SimulateTests(CliCase):
    def experiment(self, **over):
        cfg = {"scheme": "dmc", "M": 64, "epsilon": 0.25, "delta": 0.5,
               "trials": 30, "base_seed": 7,
               "idc": {"constant": {"value": 1}},
               "dmc": {"w": [[0.99, 0.01], [0.01, 0.99]],
                       "cost": [0.0, 1.0]}}
        cfg.update(over)
        return self.write_json("exp.json", cfg)

    def test_simulate_report(self):
        out_path = self.path("report.json")
        rc, out, _ = run_cli(["simulate", self.experiment(),
                              "--out", out_path])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["trials"], 30)
        self.assertIn("error_rate", payload)
        self.assertIn("diagnostics", payload)
        self.assertEqual(payload["simulation"], "direct")
        with open(out_path) as fh:
            self.assertEqual(json.load(fh)["trials"], 30)

    def test_simulate_rejects_bad_config(self):
        rc, _, err = run_cli(["simulate", self.experiment(scheme="nope")])
        self.assertEqual(rc, 1)
        self.assertTrue(err.strip())

    def test_simulate_rejects_unknown_keys(self):
        rc, _, err = run_cli(["simulate", self.experiment(bogus=1)])
        self.assertEqual(rc, 1)

    def test_simulate_rejects_malformed_json(self):
        p = self.path("broken.json")
        with open(p, "w") as fh:
            fh.write("{not json")
        rc, _, err = run_cli(["simulate", p])
        self.assertEqual(rc, 1)


class SweepTests(CliCase):
    def test_sweep_csv(self):
        base = {"scheme": "gauss", "M": 16, "epsilon": 0.25, "delta": 0.5,
                "trials": 10, "base_seed": 3,
                "idc": {"deletion": {"d": 0.2}}}
        grid = self.write_json("grid.json",
                               {"base": base, "axes": {"M": [16, 1]}})
        out_path = self.path("grid.csv")
        rc, out, _ = run_cli(["sweep", grid, "--out", out_path])
        self.assertEqual(rc, 0)
        with open(out_path) as fh:
            lines = fh.read().splitlines()
        self.assertEqual(len(lines), 3)
        header = lines[0].split(",")
        self.assertEqual(header[0], "point")
        self.assertIn("error_rate", header)
        self.assertIn("True", lines[1])
        self.assertIn("False", lines[2])   # M=1 cannot derive

    def test_sweep_to_stdout(self):
        base = {"scheme": "gauss", "M": 16, "epsilon": 0.25, "delta": 0.5,
                "trials": 5, "base_seed": 3, "idc": {"deletion": {"d": 0.2}}}
        grid = self.write_json("grid.json", {"base": base, "axes": {}})
        rc, out, _ = run_cli(["sweep", grid])
        self.assertEqual(rc, 0)
        self.assertTrue(out.splitlines()[0].startswith("point"))


class VerifyCostTests(CliCase):
    def experiment(self, idc):
        return self.write_json("exp.json", {
            "scheme": "dmc", "M": 64, "epsilon": 0.25, "delta": 0.5,
            "trials": 2000, "base_seed": 7, "idc": idc,
            "dmc": {"w": [[0.8, 0.2], [0.2, 0.8]], "cost": [0.0, 1.0]}})

    def test_identity_holds(self):
        rc, out, _ = run_cli(["verify-cost",
                              self.experiment({"deletion": {"d": 0.1}})])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertTrue(payload["within_tolerance"])
        self.assertAlmostEqual(payload["mu"], 0.9, places=12)

    def test_constant_states_exact(self):
        rc, out, _ = run_cli(["verify-cost",
                              self.experiment({"constant": {"value": 2}}),
                              "--trials", "50"])
        self.assertEqual(rc, 0)
        payload = json.loads(out)
        self.assertEqual(payload["abs_difference"], 0.0)
        self.assertEqual(payload["trials"], 50)

    def test_wrong_scheme_is_invalid(self):
        p = self.write_json("exp.json", {
            "scheme": "gauss", "M": 16, "epsilon": 0.25, "delta": 0.5,
            "trials": 10, "base_seed": 3, "idc": {"deletion": {"d": 0.2}}})
        rc, _, err = run_cli(["verify-cost", p])
        self.assertEqual(rc, 1)


if __name__ == "__main__":
    unittest.main()
