"""Run configuration: defaults, file loading, validation."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields

from .bench import DEFAULT_BUDGETS, DEFAULT_DEPTHS, DEFAULT_E_P
from .errors import ConfigError, StorageError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

OUT_DIR_ENV = "QAOA_BENCH_OUT_DIR"


@dataclass
class RunConfig:
    manifest: str = "runs/manifest.json"
    journal: str = "runs/journal.jsonl"
    out_dir: str = "runs/analysis"
    n: int = 10
    e_p_values: list = field(default_factory=lambda: list(DEFAULT_E_P))
    per_class: int = 10
    depths: list = field(default_factory=lambda: list(DEFAULT_DEPTHS))
    budgets: dict = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    ftol: float = 1e-3
    xtol: float = 1e-2
    master_seed: int = 2020
    workers: int = 1
    padded_starts: bool = True
    threshold: float = 0.01
    step: int | None = None  # None: last step of each depth

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"config field {name!r}: {why}")

        if not isinstance(self.n, int) or self.n < 2:
            bad("n", "must be an integer >= 2")
        if not self.e_p_values:
            bad("e_p_values", "must be non-empty")
        for e in self.e_p_values:
            if not isinstance(e, (int, float)) or not 0.0 < e <= 1.0:
                bad("e_p_values", f"{e!r} is not a probability in (0, 1]")
        if not isinstance(self.per_class, int) or self.per_class < 1:
            bad("per_class", "must be a positive integer")
        if not self.depths or any(not isinstance(p, int) or p < 1 for p in self.depths):
            bad("depths", "must be a non-empty list of positive integers")
        if list(self.depths) != sorted(set(self.depths)):
            bad("depths", "must be sorted ascending without repeats")
        try:
            self.budgets = {int(k): int(v) for k, v in self.budgets.items()}
        except (AttributeError, TypeError, ValueError):
            bad("budgets", "must map depth -> evaluation budget")
        for p in self.depths:
            if self.budgets.get(p, 0) < 1:
                bad("budgets", f"depth {p} needs a positive budget")
        if not self.ftol > 0:
            bad("ftol", "must be positive")
        if not self.xtol > 0:
            bad("xtol", "must be positive")
        if not isinstance(self.master_seed, int):
            bad("master_seed", "must be an integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            bad("workers", "must be a positive integer")
        if not 0.0 < self.threshold < 0.5:
            bad("threshold", "must lie in (0, 0.5)")
        if self.step is not None and (not isinstance(self.step, int) or self.step < 1):
            bad("step", "must be a positive integer or null")

    def to_dict(self):
        d = asdict(self)
        d["budgets"] = {str(k): v for k, v in self.budgets.items()}
        return d


def load_config(path=None, **overrides) -> RunConfig:
    """Defaults, then the file at ``path`` (``.toml`` or ``.json``), then
    ``overrides`` (``None`` values ignored), then ``$QAOA_BENCH_OUT_DIR``."""
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise StorageError(f"cannot read config {path}: {exc}") from exc
        try:
            if str(path).endswith(".toml"):
                data = tomllib.loads(raw.decode())
            else:
                data = json.loads(raw)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a table/object")
        if isinstance(data.get("budgets"), list):
            depths = data.get("depths", list(DEFAULT_DEPTHS))
            if len(data["budgets"]) != len(depths):
                raise ConfigError("config field 'budgets': list length must match depths")
            data["budgets"] = dict(zip(depths, data["budgets"]))
    data.update({k: v for k, v in overrides.items() if v is not None})
    if os.environ.get(OUT_DIR_ENV):
        data["out_dir"] = os.environ[OUT_DIR_ENV]
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
