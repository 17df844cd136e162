"""Experiment reports and the fixed CSV schema used by the harness."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

CSV_FIELDS = (
    "suite", "case", "algorithm", "k", "n", "T", "seed", "minmax_cost", "l1_cost",
    "offline_minmax", "ratio", "bound", "pass", "runtime_ms",
)


@dataclass
class CostSummary:
    faults: list[float]
    minmax: float
    l1: float
    model: str = "fetch"

    @classmethod
    def from_costs(cls, cv) -> "CostSummary":
        return cls(cv.to_list(), cv.minmax, cv.l1, cv.model)


@dataclass
class ExperimentReport:
    command: str
    config: dict = field(default_factory=dict)
    costs: dict[str, CostSummary] = field(default_factory=dict)
    offline: dict[str, CostSummary] = field(default_factory=dict)
    certificate: dict | None = None
    ratios: dict[str, float] = field(default_factory=dict)
    bounds: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    wall_time_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        d = dict(d)
        d["costs"] = {k: CostSummary(**v) for k, v in d.get("costs", {}).items()}
        d["offline"] = {k: CostSummary(**v) for k, v in d.get("offline", {}).items()}
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"[{self.command}] {'PASS' if self.passed else 'FAIL'}"]
        for key, val in self.config.items():
            lines.append(f"  config.{key} = {val}")
        for name, cs in self.costs.items():
            lines.append(f"  {name}: minmax={cs.minmax:g} l1={cs.l1:g} ({cs.model})")
        for name, cs in self.offline.items():
            lines.append(f"  offline {name}: minmax={cs.minmax:g} l1={cs.l1:g} ({cs.model})")
        if self.certificate:
            lines.append("  certificate: " + " ".join(f"{k}={v:.6g}" for k, v in self.certificate.items()))
        for name, v in self.ratios.items():
            lines.append(f"  ratio {name} = {v:.6g}")
        for name, v in self.bounds.items():
            lines.append(f"  bound {name} = {v:.6g}")
        for name, ok in self.checks.items():
            lines.append(f"  check {name}: {'ok' if ok else 'FAILED'}")
        for name, v in self.details.items():
            if not isinstance(v, (list, dict)):
                lines.append(f"  {name} = {v}")
        if self.seeds:
            lines.append(f"  seeds = {self.seeds[:10]}{' ...' if len(self.seeds) > 10 else ''}")
        lines.append(f"  wall_time = {self.wall_time_s:.3f}s")
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r.get(f)) for f in CSV_FIELDS])
    return buf.getvalue()


def read_csv_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        print(text)
