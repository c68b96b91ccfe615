"""Run configuration: parsing, validation and field-path diagnostics.

A config is a JSON object::

    {
      "version": 1,
      "symbols": {"psi": <tree>, "phi": [<tree>, ...]},
      "params": {"n": 1, "p": "2", "q": "0", "s": "1", "alpha": "1"},
      "bloch": {"p_src": "1", "q_dst": "1"},
      "grid": {"p": ["2"], "q": ["0"], "s": ["1"], "alpha": ["1/2", "1", "3/2"]},
      "sampler": {"seed": 0, "levels": 10, "per_shell": 256, "self_map_samples": 4096},
      "policy": {"delta0": 0.05},
      "outputs": {"stem": "report", "formats": ["json", "csv"]},
      "workers": 1
    }

``params`` is needed by ``analyze``, ``bloch`` by ``bloch`` and ``grid`` by
``sweep``.  Numbers in ``params``, ``bloch`` and ``grid`` should be exact
decimal or fraction strings so that ``k = 1`` is recognised exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .criteria import ProfileConfig, SymbolPair, VerdictPolicy
from .spaces import ParamError, SpaceParams, exact
from .symbols import Const, SelfMapSymbol, SymbolError, from_dict

CONFIG_VERSION = 1
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    levels: int = 10
    per_shell: int = 256
    self_map_samples: int = 4096


@dataclass(frozen=True)
class RunConfig:
    pair: SymbolPair
    symbols_raw: dict
    sampler: SamplerConfig
    policy: VerdictPolicy = VerdictPolicy()
    params: SpaceParams | None = None
    bloch: tuple[Any, Any] | None = None
    grid: dict[str, list] | None = None
    stem: str = "report"
    formats: tuple[str, ...] = FORMATS
    workers: int | None = None
    source: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    def profile_config(self) -> ProfileConfig:
        return ProfileConfig(self.sampler.levels, self.sampler.per_shell, self.sampler.seed,
                             self.workers)


def _get(d: dict, key: str, path: str, kind=None, required=True):
    if key not in d:
        if required:
            raise ConfigError(f"missing field {key!r}", path)
        return None
    v = d[key]
    if kind is not None and (not isinstance(v, kind) or (isinstance(v, bool) and kind is int)):
        raise ConfigError(f"expected {kind.__name__}, got {type(v).__name__}", f"{path}.{key}")
    return v


def _int(d: dict, key: str, path: str, default: int | None, lo: int = 1) -> int | None:
    v = _get(d, key, path, int, required=default is None)
    if v is None:
        return default
    if v < lo:
        raise ConfigError(f"must be >= {lo}", f"{path}.{key}")
    return v


def _number(v, path: str):
    if not isinstance(v, (str, int, float)) or isinstance(v, bool):
        raise ConfigError(f"expected an exact number string, got {v!r}", path)
    try:
        return exact(v)
    except ParamError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], path) from None


def parse_symbols(d: dict, path: str = "$.symbols") -> SymbolPair:
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    phi_raw = _get(d, "phi", path, list)
    if not phi_raw:
        raise ConfigError("phi needs at least one component", f"{path}.phi")
    try:
        comps = tuple(from_dict(c, f"{path}.phi[{i}]") for i, c in enumerate(phi_raw))
        psi = from_dict(d["psi"], f"{path}.psi") if "psi" in d else Const(1.0)
        phi = SelfMapSymbol(comps)
        return SymbolPair(psi, phi)
    except SymbolError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1] if exc.path else str(exc),
                          exc.path or path) from None
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def parse_params(d: dict, n: int, path: str = "$.params") -> SpaceParams:
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    dim = _get(d, "n", path, int, required=False)
    if dim is not None and dim != n:
        raise ConfigError(f"n={dim} does not match the {n} components of phi", f"{path}.n")
    vals = {k: _number(_get(d, k, path), f"{path}.{k}") for k in ("p", "q", "s", "alpha")}
    try:
        return SpaceParams(n, **vals)
    except ParamError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], f"{path}.{exc.field}") from None


def parse_policy(d: dict, path: str = "$.policy") -> VerdictPolicy:
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    known = {f.name: f.type for f in fields(VerdictPolicy)}
    kw = {}
    for key, v in d.items():
        if key not in known:
            raise ConfigError(f"unknown policy field {key!r}", f"{path}.{key}")
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError("expected a number", f"{path}.{key}")
        kw[key] = int(v) if known[key] in ("int", int) else float(v)
    return VerdictPolicy(**kw)


def parse_config(data: dict, seed: int | None = None, source: str = "") -> RunConfig:
    """Validate a decoded JSON config; ``seed`` (from the command line) overrides the file."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version!r}", "$.version")
    pair = parse_symbols(_get(data, "symbols", "$", dict))
    sd = _get(data, "sampler", "$", dict, required=False) or {}
    if seed is None:
        if "seed" not in sd:
            raise ConfigError("a seed is required (config or --seed)", "$.sampler.seed")
        seed = _int(sd, "seed", "$.sampler", None, lo=0)
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer", "--seed")
    sampler = SamplerConfig(
        seed=int(seed),
        levels=_int(sd, "levels", "$.sampler", 10, lo=3),
        per_shell=_int(sd, "per_shell", "$.sampler", 256),
        self_map_samples=_int(sd, "self_map_samples", "$.sampler", 4096),
    )
    policy = parse_policy(data.get("policy", {}))
    params = parse_params(data["params"], pair.n) if "params" in data else None
    bloch = None
    if "bloch" in data:
        b = _get(data, "bloch", "$", dict)
        bloch = tuple(_number(_get(b, key, "$.bloch"), f"$.bloch.{key}") for key in ("p_src", "q_dst"))
        for key, v in zip(("p_src", "q_dst"), bloch):
            if not v > 0:
                raise ConfigError("must be positive", f"$.bloch.{key}")
    grid = None
    if "grid" in data:
        g = _get(data, "grid", "$", dict)
        grid = {}
        for key in ("p", "q", "s", "alpha"):
            vals = _get(g, key, "$.grid", list)
            grid[key] = [_number(v, f"$.grid.{key}[{i}]") for i, v in enumerate(vals)]
    out = _get(data, "outputs", "$", dict, required=False) or {}
    stem = _get(out, "stem", "$.outputs", str, required=False) or "report"
    formats = tuple(_get(out, "formats", "$.outputs", list, required=False) or FORMATS)
    for i, fmt in enumerate(formats):
        if fmt not in FORMATS:
            raise ConfigError(f"unknown format {fmt!r}", f"$.outputs.formats[{i}]")
    workers = data.get("workers")
    if workers is not None and (not isinstance(workers, int) or isinstance(workers, bool) or workers < 1):
        raise ConfigError("workers must be a positive integer", "$.workers")
    return RunConfig(pair, data["symbols"], sampler, policy, params, bloch, grid, stem, formats,
                     workers, source, data)


def load_config(path: str | Path, seed: int | None = None) -> RunConfig:
    """Read and validate a JSON config file; syntax errors report line and column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          str(path)) from None
    return parse_config(data, seed, str(path))
