"""Reader for the sweep CSV emitted by the rtscts CLI.

This package deliberately never imports rtscts; the versioned CSV is the
only contract between the two. Column names and the schema comment are
restated here from that contract.
"""

from __future__ import annotations

import csv
from pathlib import Path

SCHEMA_LINE = "# schema=1"

COLUMNS = (
    "thinning", "lambda_p", "d", "r_cs", "r_tx", "alpha", "amplitude",
    "p_t", "v_o", "analytic_intensity", "emp_intensity_mean",
    "emp_intensity_ci95", "analytic_interference",
    "interference_tail_bound", "emp_interference_mean",
    "emp_interference_ci95", "palm_acceptance_rate", "n_replications",
    "seed", "r_max", "wall_time_analytic_s", "wall_time_sim_s",
)

_INT_COLUMNS = frozenset({"n_replications", "seed"})
_STR_COLUMNS = frozenset({"thinning"})


class SchemaError(ValueError):
    """The CSV does not satisfy the schema=1 contract."""


def _parse_cell(column: str, text: str):
    if column in _STR_COLUMNS:
        return text
    if text == "":
        return None
    try:
        return int(text) if column in _INT_COLUMNS else float(text)
    except ValueError:
        raise SchemaError(f"column {column}: cannot parse {text!r}") from None


def read_sweep_csv(path) -> list[dict]:
    """Parse a schema=1 sweep CSV into one dict per record.

    Numeric cells become float (or int for counters), empty cells None.
    Raises SchemaError naming the problem: bad schema comment, missing
    columns, or an empty sweep.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if first != SCHEMA_LINE:
            raise SchemaError(
                f"expected leading comment {SCHEMA_LINE!r}, got {first!r}")
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("no header row") from None
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing columns: {', '.join(missing)}")
        records = []
        for row in reader:
            if len(row) != len(header):
                raise SchemaError(
                    f"row {len(records) + 1} has {len(row)} cells, "
                    f"header has {len(header)}")
            cells = dict(zip(header, row))
            records.append({c: _parse_cell(c, cells[c]) for c in COLUMNS})
    if not records:
        raise SchemaError("no data rows")
    return records
