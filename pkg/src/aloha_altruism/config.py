"""Run configuration files.

Two formats are accepted. The plain one is ``key = value`` per line with
dotted keys for sections, ``#`` comments and comma-separated lists::

    variant = ThroughputLog
    N = 3
    c = 0.5
    a = 50
    r = 10, 1, 1
    basins.grid = 21

A JSON object works too, either flat with dotted keys or nested by section.
Players are described either by normalized ``c``/``a`` (with optional ``M``)
or by raw ``C``/``A``/``M``, never both. Scalars are broadcast to all players.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .game_model import AltruismMode, GameSpec, PlayerParams, UtilityVariant, Variant


class ConfigError(ValueError):
    pass


KNOWN_KEYS = {
    "variant", "altruism", "N", "c", "a", "C", "A", "M", "r", "q", "seed",
    "solver.scan_points", "solver.damping", "solver.max_iters", "solver.starts",
    "flow.h", "flow.max_time", "flow.tol",
    "basins.grid", "basins.workers",
    "sim.slots", "sim.workers",
    "stability.convention",
    "output.path", "output.format",
}


def _flatten(obj: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        items = [_parse_scalar(v) for v in value.split(",")] if "," in value else _parse_scalar(value)
        values[key] = items
    return values


def load_raw(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return _flatten(data)
    return parse_text(text)


@dataclass
class RunConfig:
    spec: GameSpec
    q: Optional[list] = None
    seed: int = 0
    options: dict = field(default_factory=dict)

    def get(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


def _as_list(value, n: Optional[int], name: str) -> list:
    if isinstance(value, list):
        if n is not None and len(value) != n:
            raise ConfigError(f"{name} has {len(value)} entries, expected {n}")
        return [float(v) for v in value]
    if n is None:
        raise ConfigError(f"cannot broadcast scalar {name} without N")
    return [float(value)] * n


def build(values: dict) -> RunConfig:
    unknown = set(values) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    normalized = {"c", "a"} & set(values)
    raw = {"C", "A"} & set(values)
    if normalized and raw:
        raise ConfigError("use either normalized c/a or raw C/A, not both")
    if not normalized and not raw:
        raise ConfigError("player parameters missing: give c (and a) or C (and A)")

    lengths = {len(v) for k, v in values.items() if k in {"c", "a", "C", "A", "M", "r"} and isinstance(v, list)}
    N = values.get("N")
    if N is not None:
        if not isinstance(N, int) or N < 2:
            raise ConfigError("N must be an integer >= 2")
        lengths.add(N)
    if len(lengths) > 1:
        raise ConfigError(f"inconsistent player counts: {sorted(lengths)}")
    N = lengths.pop() if lengths else None

    try:
        variant = UtilityVariant(Variant(values.get("variant", "PowerLog")),
                                 AltruismMode(values.get("altruism", "Dynamic")))
        M = _as_list(values.get("M", 1.0), N, "M")
        r = _as_list(values.get("r", 1.0), N, "r")
        if normalized:
            c = _as_list(values["c"], N, "c")
            a = _as_list(values.get("a", 0.0), N, "a")
            players = [PlayerParams.from_normalized(ci, ai, Mi, ri) for ci, ai, Mi, ri in zip(c, a, M, r)]
        else:
            C = _as_list(values["C"], N, "C")
            A = _as_list(values.get("A", 0.0), N, "A")
            players = [PlayerParams(Ci, Ai, Mi, ri) for Ci, Ai, Mi, ri in zip(C, A, M, r)]
        spec = GameSpec(tuple(players), variant)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc

    q = values.get("q")
    if q is not None:
        q = _as_list(q, spec.N, "q")
    seed = values.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    options = {k: v for k, v in values.items() if "." in k}
    return RunConfig(spec=spec, q=q, seed=seed, options=options)


def load(path) -> RunConfig:
    return build(load_raw(path))
