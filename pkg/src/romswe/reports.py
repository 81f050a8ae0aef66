"""Delimited report files: CSV tables with header rows plus sidecar JSON.

Every CSV is written with a fixed float format so reruns under the same
seed produce bitwise-identical files; timings and other machine-dependent
values go to the JSON summaries only.
"""

import csv
import json
from pathlib import Path

#: 17 significant digits round-trip any float64 exactly.
FLOAT_FORMAT = "{:.17e}"


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value)


def write_csv(path, header, rows) -> Path:
    """Write one table; floats use the fixed round-trip format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_json(path, payload) -> Path:
    """Write a run summary (timings, condition numbers, resolved config)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_encode)
        fh.write("\n")
    return path


def _encode(obj):
    import numpy as np

    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_config_sidecar(out_dir, config, extra=None) -> Path:
    """The resolved configuration next to the delimited outputs."""
    payload = dict(config.as_dict())
    if extra:
        payload.update(extra)
    return write_json(Path(out_dir) / "config.json", payload)
