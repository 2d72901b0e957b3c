"""Per-k estimator tables with CSV / JSON emission.

Column order is fixed (k, n_points, <count column>, estimate, oracle,
abs_error, runtime_ms) so downstream plotting stays stable; the count
column is named n_repelling for periodic estimators and n_preimages for
preimage estimators.  Repeated runs with the same seed are byte-identical
except for the runtime_ms column.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


@dataclass
class EstimateRow:
    k: int
    n_points: int
    n_special: int
    estimate: float
    oracle: float | None = None
    abs_error: float | None = None
    runtime_ms: float = 0.0
    stderr: float | None = None
    failed: bool = False
    note: str = ""


@dataclass
class EstimateSeries:
    tag: str                      # rep | rep_strict | preimage | preimage_mc
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def count_column(self) -> str:
        return "n_preimages" if self.tag.startswith("preimage") else "n_repelling"

    def attach_oracle(self, value: float, method: str = "",
                      uncertainty: float = 0.0):
        self.metadata["oracle"] = {"value": value, "method": method,
                                   "uncertainty": uncertainty}
        for row in self.rows:
            if not row.failed and math.isfinite(row.estimate):
                row.oracle = value
                row.abs_error = abs(row.estimate - value)

    @property
    def has_failures(self) -> bool:
        return any(r.failed for r in self.rows)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        meta = dict(self.metadata)
        meta.pop("stderr", None)
        buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "n_points", self.count_column, "estimate",
                    "oracle", "abs_error", "runtime_ms"])
        for r in self.rows:
            w.writerow([r.k, r.n_points, r.n_special, _fmt(r.estimate),
                        _fmt(r.oracle), _fmt(r.abs_error),
                        _fmt(round(r.runtime_ms, 3))])
        return buf.getvalue()

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "metadata": self.metadata,
            "rows": [
                {"k": r.k, "n_points": r.n_points,
                 self.count_column: r.n_special,
                 "estimate": r.estimate, "oracle": r.oracle,
                 "abs_error": r.abs_error, "runtime_ms": r.runtime_ms,
                 "stderr": r.stderr, "failed": r.failed, "note": r.note}
                for r in self.rows
            ],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, default=str)
            fh.write("\n")
