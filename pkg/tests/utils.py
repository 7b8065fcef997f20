# Utility functions to make testing easier
import csv
import io
import math
import os
import tempfile
from typing import List, Tuple

from stadium_entropy import main

# The stadium most experiments run on
DEFAULT_L = 2.0

SQRT_HALF = math.sqrt(0.5)


def write_config(text: str) -> str:
    """Write a YAML config to a temporary file and return its path.

    The caller is responsible for removing the file.
    """
    handle, path = tempfile.mkstemp(suffix=".yaml")
    with os.fdopen(handle, "w") as f:
        f.write(text)
    return path


def run_cli(*args: str) -> Tuple[int, str]:
    """Run the command line front end and capture what it writes to stdout"""
    stream = io.StringIO()
    code = main.main(["stadium", *args], stream=stream)
    return code, stream.getvalue()


def csv_rows(text: str) -> List[List[str]]:
    """Split CSV output with LF line endings into cells, header included"""
    assert "\r" not in text
    return list(csv.reader(io.StringIO(text)))
