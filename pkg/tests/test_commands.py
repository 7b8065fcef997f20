import json
import math
import os
import tempfile
import unittest

from stadium_entropy.commands import Command
from stadium_entropy.config import ExperimentConfig

from tests.utils import csv_rows, run_cli, write_config


class CommandTestCase(unittest.TestCase):
    def test_compositions_csv(self):
        code, out = run_cli("compositions", "--j-max", "3")
        self.assertEqual(code, 0)
        self.assertEqual(
            out, "j,k,Q_exact,Q_bound\n1,1,1,1.0\n2,1,4,12.0\n3,2,12,45.0\n"
        )

    def test_compositions_json(self):
        code, out = run_cli("compositions", "--j-max", "1", "--json")
        self.assertEqual(code, 0)
        document = json.loads(out)
        self.assertEqual(document["schema_version"], 1)
        self.assertEqual(len(document["compositions"]["rows"]), 1)
        self.assertTrue(document["compositions"]["passed"])

    def test_bounds(self):
        code, out = run_cli("bounds", "--j-max", "20")
        self.assertEqual(code, 0)
        values = {row[0]: row[1] for row in csv_rows(out)[1:]}
        self.assertAlmostEqual(float(values["a"]), 0.435624, delta=1e-6)
        self.assertLess(float(values["final_bound"]), 3.4908)
        self.assertTrue(all(value == "1" for key, value in values.items() if key.startswith("check")))

        code, out = run_cli("bounds", "--j-max", "10", "--json")
        self.assertEqual(code, 0)
        self.assertTrue(json.loads(out)["bounds"]["passed"])

    def test_axial_orbit(self):
        code, out = run_cli(
            "orbit", "--side", "L", "--coord", repr(math.pi), "--theta", "0", "--steps", "4"
        )
        self.assertEqual(code, 0)
        rows = csv_rows(out)
        self.assertEqual(rows[0], ["step", "side", "local_coord", "x", "y", "theta", "tau", "flags", "code"])
        self.assertEqual([row[1] for row in rows[1:]], ["L", "R", "L", "R", "L"])
        self.assertEqual(rows[1][8], "L+/L-")
        self.assertAlmostEqual(float(rows[2][6]), 4.0)

    def test_singular_orbit(self):
        theta = -math.asin(1.0 / math.sqrt(5.0))
        code, out = run_cli(
            "orbit", "--side", "B", "--coord", "1", "--theta", repr(theta), "--steps", "5"
        )
        self.assertEqual(code, 1)
        # The collisions up to the corner are still written
        rows = csv_rows(out)
        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[2][7], "junction")

    def test_invalid_phase_point(self):
        code, _ = run_cli("orbit", "--side", "T", "--coord", "5", "--theta", "0")
        self.assertEqual(code, 2)

    def test_complexity_is_deterministic(self):
        args = ("complexity", "--n-max", "3", "--samples", "3000", "--seed", "5")
        first = run_cli(*args)
        second = run_cli(*args)
        self.assertEqual(first[0], 0)
        self.assertEqual(first, second)
        rows = csv_rows(first[1])
        self.assertEqual(rows[0][:3], ["n", "p_hat", "s_hat"])
        self.assertEqual(rows[1][1], "6")
        self.assertEqual(rows[0][-2:], ["entropy_estimate", "analytic_bound"])
        # Too few levels for a slope; the bound is still reported
        self.assertEqual(rows[1][-2], "")
        self.assertAlmostEqual(float(rows[1][-1]), math.log(3.4908), places=9)

    def test_saddles(self):
        code, out = run_cli("saddles", "--max-len", "1", "--grid", "1000")
        self.assertEqual(code, 0)
        codes = {row[2] for row in csv_rows(out)[1:]}
        self.assertIn("cL::cR", codes)
        self.assertIn("b::p", codes)

    def test_output_file(self):
        handle, path = tempfile.mkstemp(suffix=".csv")
        os.close(handle)
        try:
            code, out = run_cli("compositions", "--j-max", "2", "--out", path)
            self.assertEqual(code, 0)
            self.assertEqual(out, "")
            with open(path, newline="") as f:
                self.assertEqual(f.read(), "j,k,Q_exact,Q_bound\n1,1,1,1.0\n2,1,4,12.0\n")
        finally:
            os.remove(path)

    def test_config_file(self):
        path = write_config("experiment:\n  j_max: 2\n")
        try:
            code, out = run_cli("compositions", "--config", path)
        finally:
            os.remove(path)
        self.assertEqual(code, 0)
        self.assertEqual(len(csv_rows(out)), 3)

    def test_usage_errors(self):
        self.assertEqual(run_cli()[0], 2)
        self.assertEqual(run_cli("dance")[0], 2)
        self.assertEqual(run_cli("bounds", "--samples", "lots")[0], 2)
        self.assertEqual(run_cli("bounds", "--tol", "0.1")[0], 2)
        self.assertEqual(run_cli("bounds", "--config", "/nonexistent.yaml")[0], 2)

    def test_unknown_command(self):
        self.assertEqual(Command(ExperimentConfig(), "dance").process(), 2)


if __name__ == "__main__":
    unittest.main()
