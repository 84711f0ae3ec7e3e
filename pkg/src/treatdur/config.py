"""Experiment configuration files.

INI layout, every key checked; unknown sections or keys are errors::

    [model]
    hW = {"family": "constant", "rate": 1.0}
    h0 = {"family": "constant", "rate": 0.5}
    h1 = {"family": "constant", "rate": 2.0}
    h1_alt = {"family": "constant", "rate": 5.0}   ; optional, invariance
    h0_alt = {"family": "constant", "rate": 1.0}   ; optional, contrast

    [run]
    n = 1000000
    seed = 42
    mode = both                      ; correct | flawed | both
    experiments = gof, invariance, dgp-compare, closed-form, regression-demo
    invariance_n = 100000            ; optional, defaults to n
    workers = 1                      ; optional

    [output]
    dir = out                        ; optional, relative to the working directory
    sample_rows = all                ; optional, cap on rows per samples_*.csv
"""

from __future__ import annotations

import configparser
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from treatdur.hazards import DomainError, HazardSpec, from_dict
from treatdur.model import TreatmentModel

EXPERIMENTS = ("gof", "invariance", "dgp-compare", "closed-form", "regression-demo")
MODES = {"correct": ("correct",), "flawed": ("flawed",), "both": ("correct", "flawed")}
MIN_N = 100

_SCHEMA = {
    "model": {"required": {"hW", "h0", "h1"}, "optional": {"h1_alt", "h0_alt"}},
    "run": {"required": {"n", "seed", "experiments"}, "optional": {"mode", "invariance_n", "workers"}},
    "output": {"required": set(), "optional": {"dir", "sample_rows"}},
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: TreatmentModel
    n: int
    seed: int
    modes: tuple[str, ...]
    experiments: tuple[str, ...]
    out_dir: Path
    h1_alt: HazardSpec | None = None
    h0_alt: HazardSpec | None = None
    invariance_n: int | None = None
    workers: int = 1
    sample_rows: int | None = None
    source: str = field(default="<config>", compare=False)

    def override(self, **changes) -> ExperimentConfig:
        changes = {k: v for k, v in changes.items() if v is not None}
        cfg = replace(self, **changes)
        _check_sizes(cfg, cfg.source)
        return cfg


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        head = re.match(r"\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _check_sizes(cfg: ExperimentConfig, source: str):
    if cfg.experiments and cfg.n < MIN_N:
        raise ConfigError(f"{source}: [run] n: statistical experiments need n >= {MIN_N}, got {cfg.n}")
    if cfg.invariance_n is not None and cfg.invariance_n < MIN_N:
        raise ConfigError(f"{source}: [run] invariance_n: need >= {MIN_N}, got {cfg.invariance_n}")
    if cfg.workers < 1:
        raise ConfigError(f"{source}: [run] workers: need >= 1, got {cfg.workers}")
    if cfg.seed < 0:
        raise ConfigError(f"{source}: [run] seed: need a nonnegative integer, got {cfg.seed}")


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    def where(section, key=None):
        line = _line_of(text, section, key)
        loc = f"{source}:{line}" if line else source
        return f"{loc}: [{section}]" + (f" {key}" if key else "")

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{where(section)}: unknown section")
        schema = _SCHEMA[section]
        keys = set(parser[section])
        for key in sorted(keys - schema["required"] - schema["optional"]):
            raise ConfigError(f"{where(section, key)}: unknown key")
        for key in sorted(schema["required"] - keys):
            raise ConfigError(f"{where(section)}: missing required key {key!r}")
    for section in ("model", "run"):
        if not parser.has_section(section):
            raise ConfigError(f"{source}: missing section [{section}]")

    def hazard(key):
        raw = parser["model"][key]
        try:
            return from_dict(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{where('model', key)}: not valid JSON: {exc}") from None
        except DomainError as exc:
            raise ConfigError(f"{where('model', key)}: {exc}") from None

    def integer(section, key, default=None):
        if not parser.has_option(section, key):
            return default
        raw = parser[section][key]
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where(section, key)}: expected an integer, got {raw!r}") from None

    model = TreatmentModel(hazard("hW"), hazard("h0"), hazard("h1"))
    h1_alt = hazard("h1_alt") if parser.has_option("model", "h1_alt") else None
    h0_alt = hazard("h0_alt") if parser.has_option("model", "h0_alt") else None

    raw_modes = parser["run"].get("mode", "both").strip()
    if raw_modes not in MODES:
        raise ConfigError(f"{where('run', 'mode')}: expected one of {sorted(MODES)}, got {raw_modes!r}")
    raw_exps = parser["run"]["experiments"].strip().strip("[]")
    experiments = tuple(e.strip().strip("'\"") for e in raw_exps.split(",") if e.strip())
    for e in experiments:
        if e not in EXPERIMENTS:
            raise ConfigError(f"{where('run', 'experiments')}: unknown experiment {e!r}")
    if len(set(experiments)) != len(experiments):
        raise ConfigError(f"{where('run', 'experiments')}: duplicate experiment")
    if "invariance" in experiments and h1_alt is None:
        raise ConfigError(f"{where('model')}: experiment 'invariance' needs h1_alt")
    if "closed-form" in experiments and not model.all_constant:
        raise ConfigError(f"{where('run', 'experiments')}: 'closed-form' needs constant hazards")

    base = Path(".") if base_dir is None else base_dir
    out = base / parser.get("output", "dir", fallback="out").strip()
    sample_rows = None
    if parser.get("output", "sample_rows", fallback="all").strip() != "all":
        sample_rows = integer("output", "sample_rows")
        if sample_rows < 0:
            raise ConfigError(f"{where('output', 'sample_rows')}: must be 'all' or >= 0")

    cfg = ExperimentConfig(
        model=model,
        n=integer("run", "n"),
        seed=integer("run", "seed"),
        modes=MODES[raw_modes],
        experiments=experiments,
        out_dir=out,
        h1_alt=h1_alt,
        h0_alt=h0_alt,
        invariance_n=integer("run", "invariance_n"),
        workers=integer("run", "workers", 1),
        sample_rows=sample_rows,
        source=source,
    )
    _check_sizes(cfg, source)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))
