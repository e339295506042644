"""Report serialization: canonical JSON, CSV and a separate metadata file."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import platform
import time
from pathlib import Path

import numpy as np

from . import REPORT_SCHEMA, __version__


def to_jsonable(obj):
    """Convert numpy scalars/arrays and dataclasses into plain JSON values (NaN -> None)."""
    if hasattr(obj, "to_record"):
        return to_jsonable(obj.to_record())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def input_hash(resolved: dict) -> str:
    blob = json.dumps(to_jsonable(resolved), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def format_number(x: float) -> str:
    """At least 12 significant digits, shortest form that round-trips."""
    x = float(x)
    short = f"{x:.12g}"
    return short if float(short) == x else repr(x)


def build_report(command: str, resolved: dict, results, checks=None, status: str = "ok") -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "command": command,
        "config": resolved,
        "input_hash": input_hash(resolved),
        "status": status,
        "results": results,
        "checks": checks or [],
    }


def write_report(out_dir: Path, stem: str, report: dict, tables: dict | None = None,
                 started: float | None = None) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    main = out_dir / f"{stem}.json"
    main.write_text(canonical_json(report))
    paths.append(main)
    for name, (header, rows) in (tables or {}).items():
        p = out_dir / f"{stem}.{name}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
        paths.append(p)
    meta = {
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "elapsed_seconds": None if started is None else time.time() - started,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    mp = out_dir / f"{stem}.meta.json"
    mp.write_text(json.dumps(meta, indent=2) + "\n")
    paths.append(mp)
    return paths
