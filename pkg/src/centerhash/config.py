"""Experiment configuration: flat key=value files plus CLI overrides.

Precedence is flag > file > default. Unknown keys are rejected so typos
fail loudly instead of silently using a default.
"""

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class RunConfig:
    # inputs; db_* default to the train files when left empty
    train_features: str = ""
    train_labels: str = ""
    db_features: str = ""
    db_labels: str = ""
    query_features: str = ""
    query_labels: str = ""
    # outputs, resolved against out_dir when relative
    out_dir: str = "."
    centers_out: str = "centers.csqh"
    assignments_out: str = "assignments.csqc"
    model_out: str = "model.csqm"
    db_codes_out: str = "db_codes.csqc"
    query_codes_out: str = "query_codes.csqc"
    report_out: str = "report.csv"
    # centers
    k: int = 16
    m: int = 0  # 0: one center per category found in the training labels
    method: str = "hadamard"  # hadamard | balanced | bernoulli
    # training
    lambda1: float = 1e-4
    lr: float = 0.01
    momentum: float = 0.9
    batch: int = 16
    epochs: int = 100
    use_lc: bool = True
    use_lq: bool = True
    # evaluation
    map_n: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if self.map_n < 1:
            raise ValueError(f"map_n must be at least 1, got {self.map_n}")
        if self.method not in ("hadamard", "balanced", "bernoulli"):
            raise ValueError(f"unknown center method {self.method!r}")
        if not self.db_features:
            self.db_features = self.train_features
        if not self.db_labels:
            self.db_labels = self.train_labels

    def resolve_out(self, name: str) -> str:
        path = Path(name)
        return str(path if path.is_absolute() else Path(self.out_dir) / path)


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _coerce(name: str, kind, raw):
    if isinstance(raw, kind):
        return raw
    text = str(raw).strip()
    if kind is bool:
        if text.lower() not in _BOOL_WORDS:
            raise ValueError(f"config key {name!r}: expected a boolean, got {raw!r}")
        return _BOOL_WORDS[text.lower()]
    try:
        return kind(text)
    except ValueError as exc:
        raise ValueError(f"config key {name!r}: {exc}") from exc


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; `#` starts a comment, blanks are skipped."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


_KINDS = {"str": str, "int": int, "float": float, "bool": bool}


def build_run_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, file values, and CLI overrides into a RunConfig."""
    known = {
        f.name: _KINDS[f.type] if isinstance(f.type, str) else f.type
        for f in fields(RunConfig)
    }
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, known[key], value)
    return RunConfig(**merged)


def load_run_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional file and flag overrides.

    Relative paths, whether from the file or from flags, are taken
    relative to the working directory.
    """
    file_values = parse_config_text(Path(path).read_text()) if path else None
    return build_run_config(file_values, overrides)
