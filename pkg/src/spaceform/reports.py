"""Run configuration, report envelopes and rendering."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .groups import DEFAULT_ORDER_CAP
from .kernels import BACKEND

FORMATS = ("table", "json", "csv")
OUTPUT_DIR_ENV = "SPACEFORM_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    restarts: int = 12
    max_iters: int = 3000
    order_cap: int = 2000
    output_format: str = "table"
    output_path: str | None = None

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("restarts", "max_iters", "order_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.order_cap > DEFAULT_ORDER_CAP:
            raise ConfigError(f"order_cap must be <= {DEFAULT_ORDER_CAP}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        aliases = {"format": "output_format", "output": "output_path"}
        kwargs = {}
        for key, value in values.items():
            key = aliases.get(key, key.replace("-", "_"))
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            if key in ("output_format", "output_path"):
                kwargs[key] = str(value)
            else:
                try:
                    kwargs[key] = int(value)
                except (TypeError, ValueError):
                    raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        return cls(**kwargs)

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        base = asdict(self)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_mapping(base)

    def to_dict(self) -> dict:
        return asdict(self)


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """key=value lines; blank lines and # comments ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Report:
    command: str
    arguments: dict
    config: RunConfig
    payload: Any
    passed: bool | None
    timestamp: str
    backend: str = BACKEND

    @classmethod
    def create(cls, command: str, arguments: dict, config: RunConfig, payload: Any,
               passed: bool | None) -> "Report":
        return cls(command, json.loads(canonical_json(jsonable(arguments))), config,
                   json.loads(canonical_json(jsonable(payload))), passed,
                   datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def payload_json(self) -> str:
        return canonical_json(self.payload)

    def to_dict(self) -> dict:
        return {"command": self.command, "arguments": self.arguments,
                "config": self.config.to_dict(), "payload": self.payload,
                "passed": self.passed, "timestamp": self.timestamp, "backend": self.backend}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Report":
        return cls(d["command"], d["arguments"], RunConfig.from_mapping(d["config"]),
                   d["payload"], d["passed"], d["timestamp"], d.get("backend", BACKEND))

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))


def default_output_path(command: str) -> Path | None:
    root = os.environ.get(OUTPUT_DIR_ENV)
    if not root:
        return None
    return Path(root) / f"{command.replace('.', '-')}.json"


def save(report: Report, path: str | os.PathLike | None = None) -> Path | None:
    target = Path(path) if path else default_output_path(report.command)
    if target is None:
        return None
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(report.to_json() + "\n")
    return target


# -------------------------------------------------------------- rendering


def _rows(payload: Any) -> tuple[list[str], list[list[Any]]] | None:
    """Tabular view when the payload carries one."""
    if isinstance(payload, dict) and isinstance(payload.get("rows"), list) and payload["rows"]:
        rows = payload["rows"]
        if isinstance(rows[0], dict):
            header = payload.get("columns") or list(rows[0])
            return header, [[r.get(h) for h in header] for r in rows]
    return None


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and obj and all(isinstance(v, (dict, list)) for v in obj):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, json.dumps(obj) if isinstance(obj, list) else obj)]


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json()
    table = _rows(report.payload)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table:
            w.writerow(table[0])
            w.writerows(table[1])
        else:
            w.writerow(["key", "value"])
            w.writerows(_flatten(report.payload))
        return buf.getvalue().rstrip("\n")
    lines = [f"# {report.command}  " + " ".join(f"{k}={v}" for k, v in report.arguments.items())]
    if table:
        header, rows = table
        shown = rows if len(rows) <= 40 else rows[:10] + [["..."] * len(header)] + rows[-10:]
        widths = [max(len(str(x)) for x in col) for col in zip(header, *shown)]
        lines.append("  ".join(str(h).ljust(w) for h, w in zip(header, widths)))
        lines += ["  ".join(str(x).ljust(w) for x, w in zip(r, widths)) for r in shown]
        rest = {k: v for k, v in report.payload.items() if k not in ("rows", "columns")}
        lines += [f"{k}: {v}" for k, v in _flatten(rest)]
    else:
        lines += [f"{k}: {v}" for k, v in _flatten(report.payload)]
    if report.passed is not None:
        lines.append(f"result: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines)


__all__ = ["ConfigError", "FORMATS", "OUTPUT_DIR_ENV", "Report", "RunConfig", "canonical_json",
           "default_output_path", "jsonable", "read_config_file", "render", "save"]
