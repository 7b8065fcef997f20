import io
import json
import unittest

import numpy as np

from stadium_entropy.output import bundle, emit, format_csv, format_json
from stadium_entropy.utils import (
    chunk_bounds,
    chunk_rng,
    int_le_bound,
    merge_first_seen,
    visit_order,
)


class OutputTestCase(unittest.TestCase):
    def test_csv_cells(self):
        text = format_csv(
            [{"n": 1, "value": 0.1, "flag": True, "blank": ""}], ("n", "value", "flag", "blank")
        )
        self.assertEqual(text, "n,value,flag,blank\n1,0.1,1,\n")

    def test_json_non_finite(self):
        document = json.loads(format_json(bundle({"x": float("inf"), "y": [float("nan")]})))
        self.assertEqual(document, {"schema_version": 1, "x": "inf", "y": [None]})

    def test_json_numpy_values(self):
        document = json.loads(
            format_json(
                {
                    "grid": np.linspace(0.0, 1.0, 3),
                    "matrix": np.arange(4).reshape(2, 2),
                    "count": np.int64(7),
                    "edge": np.float32("inf"),
                }
            )
        )
        self.assertEqual(document["grid"], [0.0, 0.5, 1.0])
        self.assertEqual(document["matrix"], [[0, 1], [2, 3]])
        self.assertEqual(document["count"], 7)
        self.assertEqual(document["edge"], "inf")

    def test_emit_to_stream(self):
        stream = io.StringIO()
        emit("a,b\n", stream=stream)
        self.assertEqual(stream.getvalue(), "a,b\n")


class UtilsTestCase(unittest.TestCase):
    def test_chunk_bounds(self):
        self.assertEqual(chunk_bounds(10, 4), [(0, 0, 4), (1, 4, 8), (2, 8, 10)])
        self.assertEqual(chunk_bounds(0, 4), [])
        with self.assertRaises(ValueError):
            chunk_bounds(10, 0)

    def test_chunk_rng_is_reproducible(self):
        self.assertEqual(chunk_rng(7, 3).random(), chunk_rng(7, 3).random())
        self.assertNotEqual(chunk_rng(7, 3).random(), chunk_rng(7, 4).random())

    def test_visit_order(self):
        order = visit_order(11, 50)
        self.assertEqual(sorted(order.tolist()), list(range(50)))
        self.assertEqual(order.tolist(), visit_order(11, 50).tolist())
        self.assertNotEqual(order.tolist(), list(range(50)))

    def test_int_le_bound(self):
        self.assertTrue(int_le_bound(6, 6.0))
        self.assertTrue(int_le_bound(6, 5.9999999999))
        self.assertFalse(int_le_bound(7, 6.0))

    def test_merge_first_seen(self):
        target = {"a": 5}
        merge_first_seen(target, [("a", 2), ("b", 9), ("a", 4)])
        self.assertEqual(target, {"a": 2, "b": 9})


if __name__ == "__main__":
    unittest.main()
