"""Rendering of report documents as JSON or plain text."""

from __future__ import annotations

import json
from typing import Any

TIMING_KEYS = {"seconds", "wall_time"}


def strip_timing(obj: Any) -> Any:
    """Drop wall-clock fields so equal inputs give byte-identical reports."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"


def to_text(report: dict) -> str:
    lines: list[str] = []

    def walk(obj, indent=0):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, dict) and v or isinstance(v, list) and not _flat(v):
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {_scalar(v)}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, dict) or isinstance(v, list) and not _flat(v):
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {_scalar(v)}")
        else:
            lines.append(pad + _scalar(obj))

    walk(report)
    return "\n".join(lines) + "\n"


def _flat(v) -> bool:
    """True for lists of scalars or of scalar lists (printed on one line)."""
    return all(not isinstance(x, dict) and (not isinstance(x, list) or _flat(x)) for x in v)


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def render(report: dict, fmt: str = "json", timing: bool = False) -> str:
    doc = report if timing else strip_timing(report)
    return to_text(doc) if fmt == "text" else to_json(doc)
