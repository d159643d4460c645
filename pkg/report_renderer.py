# report_renderer.py - Builds verification reports and renders them as JSON or text
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from config import REPORT_SCHEMA, REPORT_VERSION
from logic_core import ModelSet

VERDICTS = ("pass", "fail", "error")


@dataclass
class Report:
    """Outcome of one workbench command."""
    command: List[str]
    verdict: str
    witness: Any = None
    seconds: float = 0.0
    parameters: Dict[str, Any] = field(default_factory=dict)
    result: Any = None
    finished: Optional[str] = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"Verdict must be one of {VERDICTS}, got {self.verdict!r}")
        if self.finished is None:
            self.finished = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "command": list(self.command),
            "verdict": self.verdict,
            "witness": jsonable(self.witness),
            "timing": {"seconds": round(self.seconds, 6), "finished": self.finished},
            "parameters": jsonable(self.parameters),
            "result": jsonable(self.result),
        }


def jsonable(value: Any) -> Any:
    """Plain JSON types for the values the workbench produces."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, ModelSet):
        return value.members()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return jsonable(value.to_dict(orient="records"))
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    return str(value)


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False)


def _format_value(value: Any) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "yes" if value else "no"
    return json.dumps(value)


def _is_table(value: Any) -> bool:
    return isinstance(value, list) and bool(value) and all(isinstance(row, dict) for row in value)


def generate_parameter_summary(parameters: Dict[str, Any]) -> str:
    """One line, e.g. "q=2, r=4, ell=1"."""
    if not parameters:
        return "none"
    return ", ".join(f"{k}={_format_value(v)}" for k, v in parameters.items())


def generate_witness_summary(witness: Any) -> str:
    if witness is None:
        return "none"
    if isinstance(witness, dict):
        return "; ".join(f"{k}: {_format_value(v)}" for k, v in witness.items())
    return _format_value(witness)


def generate_result_summary(result: Any) -> List[str]:
    """Result block lines; lists of records become a table."""
    if result is None:
        return []
    if isinstance(result, str):
        return result.splitlines()
    if _is_table(result):
        return pd.DataFrame(result).to_string(index=False).splitlines()
    if isinstance(result, dict):
        lines = []
        for key, value in result.items():
            if _is_table(value):
                lines.append(f"{key}:")
                lines += ["  " + line for line in pd.DataFrame(value).to_string(index=False).splitlines()]
            elif isinstance(value, str) and "\n" in value:
                lines.append(f"{key}:")
                lines += ["  " + line for line in value.splitlines()]
            else:
                lines.append(f"{key}: {_format_value(value)}")
        return lines
    return [_format_value(result)]


def render_text(report: Report) -> str:
    """Human-readable rendering of the same fields as render_json."""
    data = report.to_dict()
    lines = [
        f"command:    {' '.join(data['command'])}",
        f"verdict:    {data['verdict'].upper()}",
        f"parameters: {generate_parameter_summary(data['parameters'])}",
    ]
    if data["witness"] is not None:
        lines.append(f"witness:    {generate_witness_summary(data['witness'])}")
    body = generate_result_summary(data["result"])
    if body:
        lines.append("result:")
        lines += ["  " + line for line in body]
    lines.append(f"time:       {data['timing']['seconds']:.3f}s")
    return "\n".join(lines)


def render(report: Report, fmt: str = "text") -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "text":
        return render_text(report)
    raise ValueError(f"Unknown format {fmt!r}; use json or text")
