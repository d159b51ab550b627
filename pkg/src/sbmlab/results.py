"""Tabular results with embedded metadata and deterministic CSV bodies."""
from __future__ import annotations

import hashlib
import json
import subprocess
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaMismatch


def git_describe():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def config_hash(obj) -> str:
    """Stable hash of any JSON-serializable configuration object."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


@dataclass
class ResultTable:
    columns: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {k: len(np.atleast_1d(v)) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise SchemaMismatch(f"unequal column lengths: {lengths}")
        self.columns = {k: np.atleast_1d(np.asarray(v))
                        for k, v in self.columns.items()}

    def __len__(self):
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    def write_csv(self, path, extra_meta=None):
        """Comment lines carry metadata (including a timestamp); the body
        below them is byte-identical across reruns of the same config."""
        meta = dict(self.meta)
        if extra_meta:
            meta.update(extra_meta)
        meta.setdefault("git", git_describe())
        lines = [f"# {k}={_fmt(v)}" for k, v in sorted(meta.items())]
        lines.append(f"# written={time.strftime('%Y-%m-%dT%H:%M:%S')}")
        names = list(self.columns)
        lines.append(",".join(names))
        cols = [self.columns[k] for k in names]
        for i in range(len(self)):
            lines.append(",".join(_fmt(c[i]) for c in cols))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return path


def read_csv_body(path):
    """Non-comment lines of a results CSV (for reproducibility checks)."""
    with open(path) as fh:
        return [ln for ln in fh if not ln.startswith("#")]


def write_json(path, payload, cfg_hash=None):
    data = dict(payload)
    if cfg_hash is not None:
        data["config_hash"] = cfg_hash
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return path
