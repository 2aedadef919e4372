"""Deterministic CSV writing with JSON schema sidecars.

Floats are rendered with ``repr``, the shortest representation that parses
back to the identical double, so repeated runs produce byte-identical files.
Every table gets a ``<name>.schema.json`` sidecar describing its columns.
"""

from __future__ import annotations

import csv
import json
import os

from .errors import ParseError


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows, column_types=None, description=""):
    """Write rows (iterables of cells) plus a ``.schema.json`` sidecar."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    if column_types is None:
        column_types = ["string"] * len(header)
    schema = {
        "schema_version": 1,
        "description": description,
        "columns": [{"name": h, "type": t} for h, t in zip(header, column_types)],
    }
    schema_path = sidecar_path(path)
    with open(schema_path, "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=1, sort_keys=True)
        fh.write("\n")


def sidecar_path(csv_path) -> str:
    base, _ = os.path.splitext(str(csv_path))
    return base + ".schema.json"


def read_csv(path):
    """Read a CSV written by :func:`write_csv`; returns (header, rows of strings)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty table", row=1) from None
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, got {len(row)}", row=row_num
                )
            rows.append(row)
    return header, rows
