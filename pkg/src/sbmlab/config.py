"""Experiment configuration: INI file with typed, validated sections.

Unknown sections or keys are rejected, values are coerced and range-checked
before any pipeline runs, so a bad config can never leave partial output.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError

_POS = ("positive", lambda v: v > 0)
_NONNEG = ("non-negative", lambda v: v >= 0)
_ANY = ("any", lambda v: True)
_PROB = ("in (0,1)", lambda v: 0 < v < 1)

SCHEMA = {
    "global": {
        "seed": (int, _NONNEG),
        "out": (str, _ANY),
        "threads": (int, _POS),
    },
    "profile": {
        "h": (float, _POS),
        "ymax": (float, _POS),
        "tol": (float, _POS),
    },
    "spectrum": {
        "phi": (str, ("one of zero|half-f|full-f",
                      lambda v: v in ("zero", "half-f", "full-f"))),
        "l": (float, _POS),
        "h": (float, _POS),
        "nmax": (int, _POS),
    },
    "pde-rate": {
        "t": (float, _POS),
        "lambdas": (str, _ANY),
        "eps": (float, _POS),
        "dx": (float, _POS),
        "dt": (float, _POS),
    },
    "simulate": {
        "x0": (str, _ANY),
        "t": (float, _POS),
        "n": (int, _POS),
        "reps": (int, _POS),
        "bandwidth": (float, _POS),
        "method": (str, ("one of direct|reduced",
                         lambda v: v in ("direct", "reduced"))),
    },
    "tail": {
        "x0": (str, _ANY),
        "t": (float, _POS),
        "n": (int, _POS),
        "reps": (int, _POS),
        "bandwidth": (float, _POS),
        "a_min": (float, _POS),
        "a_max": (float, _POS),
        "n_a": (int, _POS),
    },
    "dimension": {
        "input": (str, _ANY),
        "cantor": (int, _POS),
        "subordinator": (float, _PROB),
        "scales": (str, _ANY),
        "beta": (float, _PROB),
    },
    "tauberian": {
        "c1": (float, _POS),
        "c2": (float, _POS),
        "p": (float, _POS),
        "ulambda": (float, _NONNEG),
    },
    "full-pipeline": {
        "n": (int, _POS),
        "reps": (int, _POS),
        "tail_reps": (int, _POS),
        "field_reps": (int, _POS),
        "t": (float, _POS),
    },
}

EXPERIMENTS = ("profile", "spectrum", "pde-rate", "simulate", "tail",
               "dimension", "tauberian", "full-pipeline")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 12345
    out_dir: str = "."
    threads: int = 1

    def as_dict(self):
        return {"experiment": self.experiment, "params": self.params,
                "seed": self.seed, "out": self.out_dir,
                "threads": self.threads}

    def hash_payload(self):
        """What the config hash covers: the experiment identity, not the
        environment (output path, thread count)."""
        return {"experiment": self.experiment, "params": self.params,
                "seed": self.seed}


def _coerce(section, key, raw):
    spec = SCHEMA[section].get(key)
    if spec is None:
        raise ConfigError(f"unknown key '{key}' in section [{section}]")
    typ, (desc, check) = spec
    try:
        val = typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(
            f"[{section}] {key} = {raw!r}: expected {typ.__name__}") from None
    if not check(val):
        raise ConfigError(f"[{section}] {key} = {raw!r}: must be {desc}")
    return val


def load_config(path):
    """Parse and validate an INI config; returns {section: {key: value}}."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        out[section] = {}
        for key, raw in parser.items(section):
            out[section][key] = _coerce(section, key, raw)
    return out


def build(experiment, file_cfg=None, overrides=None, seed=None, out_dir=None,
          threads=None):
    """Merge builtin defaults < config file < CLI overrides."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{experiment}'")
    file_cfg = file_cfg or {}
    params = dict(file_cfg.get(experiment, {}))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        params[key] = _coerce(experiment, key, val)
    g = file_cfg.get("global", {})
    cfg = ExperimentConfig(
        experiment=experiment,
        params=params,
        seed=seed if seed is not None else g.get("seed", 12345),
        out_dir=out_dir if out_dir is not None else g.get("out", "."),
        threads=threads if threads is not None else g.get("threads", 1),
    )
    return cfg
