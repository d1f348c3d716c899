"""Scenario reports and their deterministic JSON / CSV serialization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

FORMATS = ("json", "csv")


@dataclass
class Report:
    """Outcome of one scenario.

    ``scalars`` holds named quantities and flags, ``tables`` holds lists of
    row dictionaries, and ``checks`` holds the asserted theorem checks.
    ``wall_time`` is serialized only when ``timing`` is set, so that the
    default output is reproducible byte for byte.
    """

    kind: str
    scenario: dict
    scalars: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    wall_time: float = 0.0
    timing: bool = False

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_document(self) -> dict:
        doc = {
            "kind": self.kind,
            "scenario": self.scenario,
            "scalars": self.scalars,
            "tables": self.tables,
            "checks": self.checks,
            "passed": self.passed,
        }
        if self.timing:
            doc["wall_time"] = self.wall_time
        return doc


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    return value


def to_json(value) -> str:
    """Compact JSON with sorted keys and floats printed to 17 significant digits."""
    value = _plain(value)
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} in report")
        text = format(value, ".17g")
        # keep floats recognizable as floats
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(to_json(v) for v in value) + "]"
    if isinstance(value, dict):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(f"{json.dumps(k)}:{to_json(v)}" for k, v in items) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def emit_report(r: Report, fmt: str = "json") -> bytes:
    """Serialize a report.

    ``json`` writes the full nested document. ``csv`` writes a ``path,value``
    header, one row per scalar and one row per table entry (the row encoded as
    JSON); per-check booleans are summarized by the ``pass`` scalar.
    """
    if fmt == "json":
        return (to_json(r.as_document()) + "\n").encode()
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}; choose json or csv")
    lines = ["path,value"]
    for key in sorted(r.scalars):
        v = _plain(r.scalars[key])
        text = v if isinstance(v, str) else to_json(v)
        lines.append(f"{_csv_field('scalars.' + key)},{_csv_field(text)}")
    for name in sorted(r.tables):
        for i, row in enumerate(r.tables[name]):
            lines.append(f"{_csv_field(f'tables.{name}[{i}]')},{_csv_field(to_json(row))}")
    return ("\n".join(lines) + "\n").encode()


def csv_row_count(r: Report) -> int:
    return len(r.scalars) + sum(len(rows) for rows in r.tables.values())
