from __future__ import annotations

import json
import operator
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

try:
    import tomllib as tomli
except ModuleNotFoundError:
    import tomli

from qpurify.errors import ConfigError
from qpurify.harness import DEFAULT_SEED, ScenarioConfig
from qpurify.quantum_core import MAX_QUBITS
from qpurify.sphere import DEFAULT_GRID_SIZE

CONFIG_FILENAME = ".qpurify.toml"
SECTION = "qpurify"


def _as_bool(x: Any) -> bool:
    """
    TOML/JSON give real booleans, but hand-written files sometimes carry
    strings like "yes" or "false"; accept those too.
    """
    if isinstance(x, bool):
        return x
    s = str(x).strip().lower()
    if s in {"1", "true", "yes", "on"}:
        return True
    if s in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"expected a boolean, got {x!r}")


def _as_int(x: Any) -> int:
    if isinstance(x, bool):
        raise ConfigError(f"expected an integer, got {x!r}")
    if isinstance(x, float):
        if not x.is_integer():
            raise ConfigError(f"expected an integer, got {x!r}")
        return int(x)
    if isinstance(x, str):
        return int(x.strip())
    return operator.index(x)


def _as_optional_int(x: Any) -> int | None:
    if x is None or (isinstance(x, str) and not x.strip()):
        return None
    return _as_int(x)


@dataclass
class QPurifyConfig:
    n: int = 6
    c1: float = 0.75
    trials: int = 40000
    strategy: str = "adaptive"
    purify: bool = True
    weighting: str = "exact"
    grid_size: int = DEFAULT_GRID_SIZE
    seed: int = DEFAULT_SEED
    workers: int | None = None

    # sweep settings
    compare: str = "purify"
    c1_min: float = 0.5
    c1_max: float = 1.0
    c1_steps: int = 11

    max_qubits: int = MAX_QUBITS


DEFAULT_CONFIG = QPurifyConfig()

_COERCE = {
    "n": _as_int,
    "c1": float,
    "trials": _as_int,
    "strategy": lambda x: str(x).strip().lower(),
    "purify": _as_bool,
    "weighting": lambda x: str(x).strip().lower(),
    "grid_size": _as_int,
    "seed": _as_int,
    "workers": _as_optional_int,
    "compare": lambda x: str(x).strip().lower(),
    "c1_min": float,
    "c1_max": float,
    "c1_steps": _as_int,
    "max_qubits": _as_int,
}


def _read_file(path: Path) -> dict:
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(path.read_text(encoding="utf-8"))
        else:
            with path.open("rb") as f:
                raw = tomli.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None

    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold an object/table")
    section = raw.get(SECTION, raw)
    if not isinstance(section, dict):
        raise ConfigError(f"[{SECTION}] in {path} must be a table")
    return section


def _apply(cfg: QPurifyConfig, values: dict) -> QPurifyConfig:
    known = {f.name for f in fields(QPurifyConfig)}
    updates = {}
    for key, value in values.items():
        key = key.replace("-", "_")
        if key not in known:
            continue
        try:
            updates[key] = _COERCE[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {key}: {value!r}") from exc
    return replace(cfg, **updates)


def load_config(config_path: str | None = None, cwd: str = ".") -> QPurifyConfig:
    """Defaults, then ./.qpurify.toml, then an explicit --config file."""
    cfg = replace(DEFAULT_CONFIG)

    local = Path(cwd).resolve() / CONFIG_FILENAME
    if local.exists():
        cfg = _apply(cfg, _read_file(local))

    if config_path:
        cfg = _apply(cfg, _read_file(Path(config_path)))

    return cfg


def apply_flags(cfg: QPurifyConfig, flags: dict) -> QPurifyConfig:
    """Command-line flags win over file values; None means 'not given'."""
    return _apply(cfg, {k: v for k, v in flags.items() if v is not None})


def to_scenario(cfg: QPurifyConfig) -> ScenarioConfig:
    return ScenarioConfig(
        n_qubits=cfg.n,
        c1=cfg.c1,
        trials=cfg.trials,
        strategy=cfg.strategy,
        purify=cfg.purify,
        grid_size=cfg.grid_size,
        master_seed=cfg.seed,
        weighting=cfg.weighting,
        max_qubits=cfg.max_qubits,
    )


def config_to_dict(cfg: QPurifyConfig) -> dict:
    return asdict(cfg)
