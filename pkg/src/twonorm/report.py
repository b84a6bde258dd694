"""JSON reports and CSV traces.

A report document is ``{tool_version, seed, config_digest, timestamp,
reports: [...]}``. Floats are written as shortest round-trip decimals;
non-finite values become the strings ``"nan"``, ``"inf"`` and ``"-inf"``
(JSON has no literal for them). Apart from ``timestamp`` the output is a pure
function of the configuration and seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from .probes import ProbeReport

SCHEMA_RESOURCE = "report.schema.json"


@dataclass
class Outcome:
    """A report paired with the statuses its producer expected."""
    report: ProbeReport
    expected: tuple[str, ...] | None = ("pass",)
    case: str | None = None
    subject: str | None = None

    @property
    def matched(self) -> bool:
        return self.expected is None or self.report.status in self.expected

    def to_dict(self) -> dict:
        out = {}
        if self.case is not None:
            out["case"] = self.case
        if self.subject is not None:
            out["subject"] = self.subject
        out.update(self.report.to_dict())
        out["expected"] = None if self.expected is None else list(self.expected)
        out["matched"] = self.matched
        return out


def expectation(value: Any, probe: str | None = None) -> tuple[str, ...] | None:
    """Normalise an ``expect`` field: a status, a list of statuses, or a per-probe table."""
    if isinstance(value, dict):
        if probe is None or probe not in value:
            return None
        value = value[probe]
    if value is None:
        return None
    if isinstance(value, str):
        return (value,)
    return tuple(value)


def _clean(value: Any) -> Any:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and callable(value.item):  # numpy scalar
        return _clean(value.item())
    return value


def build_document(outcomes: Iterable[Outcome], seed: int, config_digest: str,
                   timestamp: str | None = None) -> dict:
    from . import __version__

    return {
        "tool_version": __version__,
        "seed": seed,
        "config_digest": config_digest,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "reports": [_clean(o.to_dict()) for o in outcomes],
    }


def dumps(document: dict) -> str:
    return json.dumps(_clean(document), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_report(path: str | Path, document: dict) -> None:
    Path(path).write_text(dumps(document), encoding="utf-8")


def load_schema() -> dict:
    text = resources.files("twonorm").joinpath(SCHEMA_RESOURCE).read_text(encoding="utf-8")
    return json.loads(text)


def trace_rows(outcomes: Sequence[Outcome]) -> list[list]:
    """Flatten per-index traces into rows ``[report, sequence, n, value_1, ...]``."""
    rows = []
    for i, o in enumerate(outcomes):
        name = o.case or o.subject or o.report.probe
        for seq, table in o.report.details.get("image_traces", {}).items():
            for row in table:
                rows.append([f"{i}:{name}:{o.report.probe}", seq, *row])
        for seq, table in o.report.details.get("traces", {}).items():
            for row in table:
                rows.append([f"{i}:{name}:{o.report.probe}", seq, *row])
    return rows


def write_trace(path: str | Path, outcomes: Sequence[Outcome]) -> int:
    rows = trace_rows(outcomes)
    width = max((len(r) for r in rows), default=3)
    header = ["report", "sequence", "n"] + [f"value_{k}" for k in range(1, width - 2)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[repr(v) if isinstance(v, float) else v for v in r] for r in rows])
    return len(rows)
