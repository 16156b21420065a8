"""Report records and the JSON/CSV document the CLI emits."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

from .fields import ParabolicCylinder

REPORT_VERSION = "nsreg-report/1"


@dataclass(frozen=True)
class BoundReport:
    """One inequality evaluation: left side, named right-side terms, and the
    measured ratio lhs / sum(terms).

    `violation` flags the only situation a bound can fail structurally:
    a zero right side against a positive left side.
    """

    kind: str
    lhs: float
    rhs_terms: dict
    empirical_c: float
    violation: bool
    params: dict = field(default_factory=dict)

    @staticmethod
    def from_terms(kind: str, lhs: float, rhs_terms: dict, params: dict | None = None):
        total = sum(rhs_terms.values())
        if total > 0.0:
            ratio = lhs / total
            violation = False
        else:
            ratio = 0.0 if lhs == 0.0 else float("inf")
            violation = lhs > 0.0
        return BoundReport(kind, lhs, dict(rhs_terms), ratio, violation,
                           dict(params or {}))

    def to_row(self) -> dict:
        return {
            "row_type": "bound",
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs_terms": dict(self.rhs_terms),
            "empirical_c": self.empirical_c if self.empirical_c != float("inf") else "violation",
            "violation": self.violation,
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class CriterionReport:
    """One criterion evaluation on one cylinder."""

    tag: str
    params: dict
    cylinder: ParabolicCylinder
    statistic: float
    threshold: float
    satisfied: bool
    components: dict

    def to_row(self) -> dict:
        x, y, z = self.cylinder.center_space
        return {
            "row_type": "criterion",
            "criterion": self.tag,
            "params": dict(self.params),
            "point": [x, y, z],
            "t0": self.cylinder.center_time,
            "r": self.cylinder.radius,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "satisfied": self.satisfied,
            "components": dict(self.components),
        }


def quantity_row(q) -> dict:
    """Serialize a QuantityValue into the report row schema."""
    x, y, z = q.cylinder.center_space
    return {
        "row_type": "quantity",
        "kind": q.kind,
        "value": q.value,
        "point": [x, y, z],
        "t0": q.cylinder.center_time,
        "r": q.cylinder.radius,
        "params": list(q.params),
        "snapshots_used": q.snapshots_used,
    }


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def determinism_hash(document: dict) -> str:
    """SHA-256 of the document with volatile provenance (timestamp) removed."""
    stripped = dict(document)
    provenance = dict(stripped.get("provenance", {}))
    provenance.pop("timestamp", None)
    provenance.pop("determinism_hash", None)
    stripped["provenance"] = provenance
    return hashlib.sha256(_canonical_json(stripped).encode()).hexdigest()


def build_document(inputs: dict, rows: list, config: dict, timestamp: str) -> dict:
    doc = {
        "version": REPORT_VERSION,
        "inputs": inputs,
        "rows": rows,
        "provenance": {"timestamp": timestamp, "config": config},
    }
    doc["provenance"]["determinism_hash"] = determinism_hash(doc)
    return doc


def write_json(document: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


CSV_COLUMNS = ["point", "t0", "r", "criterion", "param", "statistic",
               "threshold", "satisfied", "components"]


def write_csv(document: dict, path) -> None:
    """Flat projection of the criterion rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in document["rows"]:
            if row.get("row_type") != "criterion":
                continue
            point = ",".join(repr(v) for v in row["point"])
            params = row.get("params", {})
            param = ";".join(f"{k}={v}" for k, v in sorted(params.items()))
            writer.writerow([
                point, row["t0"], row["r"], row["criterion"], param,
                row["statistic"], row["threshold"], row["satisfied"],
                json.dumps(row["components"], sort_keys=True),
            ])
