# Writers for the CSV and JSON result files.
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        # repr round-trips, so reruns give byte-identical files
        return repr(value)
    return value


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def format_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore"
    )
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})
    return buffer.getvalue()


def format_json(document: Any) -> str:
    return json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n"


def emit(text: str, path: Optional[str] = None, stream: Optional[TextIO] = None) -> None:
    """Write a finished document to `path`, or to `stream` (stdout by default)."""
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info("Wrote %s", path)
    else:
        (stream or sys.stdout).write(text)


def bundle(sections: Dict[str, Any]) -> Dict[str, Any]:
    """Wrap report sections in the versioned JSON envelope."""
    document: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    document.update(sections)
    return document


def rows_of(records: List[Any], columns: Sequence[str]) -> List[Dict[str, Any]]:
    """Dicts of the named attributes of dataclass records."""
    return [{column: getattr(record, column) for column in columns} for record in records]
