"""TOML run configurations.

Example::

    surface = "torus"
    n = 2
    sigma = ["(1 2)", "()"]
    task = "nielsen"

    [payload]
    M = [[0, 0], [0, 0]]
    c = ["0", "0"]

Sphere instances list their coordinates by catalog id (``maps = ["f2",
"A*f2"]``) or give one lift (``lift = "f1"`` for the 2-valued map
{f1, A o f1}); RP^2 instances name a homotopy class (``class =
"nontrivial"``) or list coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .descriptor import Surface, SurfaceDescriptor
from .errors import ConfigError, DegreeMismatch, InconsistentPayload, PermutationSyntaxError
from .geometry import NONTRIVIAL, TRIVIAL, parse_catalog_map
from .group import parse_permutation
from .numerics.grid import GridSpec
from .torus import TorusLinearPayload

TASKS = ("classify", "nielsen", "scan", "verify")
SUITES = ("group", "torus", "sphere", "rp2", "all")
KNOWN_KEYS = {"surface", "n", "sigma", "payload", "task", "grid", "seed", "maps", "lift",
              "class", "suite", "per_pair", "cap"}
GRID_KEYS = {"resolution": "resolution", "refinement_depth": "refinement_depth",
             "refine": "refinement_depth", "cluster_radius": "cluster_radius"}


@dataclass(frozen=True)
class RunConfig:
    task: str
    surface: Optional[Surface] = None
    n: Optional[int] = None
    sigma: tuple = ()
    payload: Optional[TorusLinearPayload] = None
    maps: tuple = ()
    lift: Optional[str] = None
    rp2_class: Optional[str] = None
    per_pair: dict = field(default_factory=dict)
    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 0
    suite: Optional[str] = None
    cap: int = 8

    def with_overrides(self, task=None, suite=None, seed=None, **grid_kw) -> RunConfig:
        out = self
        if task is not None:
            out = replace(out, task=_check_task(task))
        if suite is not None:
            out = replace(out, suite=_check_suite(suite))
        if seed is not None:
            out = replace(out, seed=int(seed))
        try:
            out = replace(out, grid=out.grid.with_overrides(**grid_kw))
        except ValueError as exc:
            raise ConfigError(str(exc), field="grid") from exc
        if out.task == "verify" and out.suite is None:
            raise ConfigError("task 'verify' needs a suite", field="suite")
        return out

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"task": self.task, "seed": self.seed, "grid": self.grid.to_dict()}
        if self.surface is not None:
            out["surface"] = self.surface.value
        if self.n is not None:
            out["n"] = self.n
        if self.sigma:
            out["sigma"] = list(self.sigma)
        if self.payload is not None:
            out["payload"] = self.payload.to_dict()
        if self.maps:
            out["maps"] = list(self.maps)
        if self.lift:
            out["lift"] = self.lift
        if self.rp2_class:
            out["class"] = self.rp2_class
        if self.per_pair:
            out["per_pair"] = {str(k): v for k, v in sorted(self.per_pair.items())}
        if self.suite:
            out["suite"] = self.suite
        return out


def _check_task(task: str) -> str:
    t = str(task).strip().lower()
    if t not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}", field="task")
    return t


def _check_suite(suite: str) -> str:
    s = str(suite).strip().lower()
    if s not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}", field="suite")
    return s


def _line_of(text: str, key: str) -> Optional[int]:
    """Line of the first ``key = ...`` (or ``[key]``) in the TOML source."""
    pat = re.compile(rf"^\s*(\[\s*{re.escape(key)}\s*\]|{re.escape(key)}\s*=)")
    for no, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return no
    return None


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def parse_config_text(text: str) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", line=getattr(exc, "lineno", None)) from exc
    return config_from_mapping(data, text)


def config_from_mapping(data: dict, text: str = "") -> RunConfig:
    def err(msg, key, sub=None):
        return ConfigError(msg, field=sub or key, line=_line_of(text, key))

    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise err(f"unknown key(s) {unknown}", unknown[0])

    suite = _wrap(lambda: _check_suite(data["suite"]), err, "suite") if "suite" in data else None
    task = data.get("task", "verify" if suite else None)
    if task is None:
        raise ConfigError("missing required field", field="task")
    task = _wrap(lambda: _check_task(task), err, "task")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise err("seed must be an integer", "seed")

    grid = GridSpec()
    if "grid" in data:
        g = data["grid"]
        if not isinstance(g, dict):
            raise err("grid must be a table", "grid")
        kw = {}
        for k, v in g.items():
            if k not in GRID_KEYS:
                raise err(f"unknown grid key {k!r}", "grid", f"grid.{k}")
            kw[GRID_KEYS[k]] = v
        try:
            grid = grid.with_overrides(**kw)
        except (ValueError, TypeError) as exc:
            raise err(str(exc), "grid") from exc

    cap = data.get("cap", 8)
    if not isinstance(cap, int) or cap < 1:
        raise err("cap must be a positive integer", "cap")

    if task == "verify":
        if suite is None:
            raise ConfigError("task 'verify' needs a suite", field="suite")
        return RunConfig(task=task, suite=suite, seed=seed, grid=grid, cap=cap)

    if "surface" not in data:
        raise ConfigError("missing required field", field="surface")
    try:
        surface = Surface.parse(str(data["surface"]))
    except ValueError as exc:
        raise err(str(exc), "surface") from exc

    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise err("n must be a positive integer", "n")

    # omitted sigma means every pi_1 generator acts trivially
    default_sigma = ["()"] * SurfaceDescriptor(surface).n_generators
    sigma_raw = data.get("sigma", default_sigma)
    if not isinstance(sigma_raw, list) or not all(isinstance(s, str) for s in sigma_raw):
        raise err("sigma must be a list of permutation strings", "sigma")
    for k, s in enumerate(sigma_raw):
        try:
            parse_permutation(s, n)
        except (PermutationSyntaxError, DegreeMismatch) as exc:
            raise err(f"bad permutation {s!r}: {exc}", "sigma", f"sigma[{k}]") from exc

    payload = None
    if "payload" in data:
        p = data["payload"]
        if not isinstance(p, dict) or "M" not in p:
            raise err("payload must be a table with M (and optionally c, Q)", "payload")
        try:
            payload = TorusLinearPayload.build(p["M"], p.get("c"), p.get("Q"))
        except (InconsistentPayload, ValueError, TypeError) as exc:
            raise err(str(exc), "payload") from exc

    maps = data.get("maps", [])
    if not isinstance(maps, list) or not all(isinstance(m, str) for m in maps):
        raise err("maps must be a list of catalog map ids", "maps")
    for k, m in enumerate(maps):
        try:
            parse_catalog_map(m)
        except Exception as exc:  # any parse or construction failure is a config problem
            raise err(f"bad map id {m!r}: {exc}", "maps", f"maps[{k}]") from exc
    if maps and len(maps) != n:
        raise err(f"{len(maps)} maps given for n={n}", "maps")

    lift = data.get("lift")
    if lift is not None:
        try:
            parse_catalog_map(str(lift))
        except Exception as exc:
            raise err(f"bad map id {lift!r}: {exc}", "lift") from exc
        if n != 2:
            raise err("lift describes a 2-valued map {f, A o f}; n must be 2", "lift")

    cls = data.get("class")
    if cls is not None:
        cls = str(cls).strip().lower().replace("-", "").replace("_", "")
        if cls not in (TRIVIAL, NONTRIVIAL):
            raise err(f"class must be {TRIVIAL!r} or {NONTRIVIAL!r}", "class")

    per_pair = data.get("per_pair", {})
    if not isinstance(per_pair, dict):
        raise err("per_pair must be a table index -> N(q, f_i)", "per_pair")
    try:
        per_pair = {int(k): int(v) for k, v in per_pair.items()}
    except (TypeError, ValueError) as exc:
        raise err("per_pair keys and values must be integers", "per_pair") from exc

    return RunConfig(task=task, surface=surface, n=n, sigma=tuple(sigma_raw), payload=payload,
                     maps=tuple(maps), lift=lift, rp2_class=cls, per_pair=per_pair, grid=grid,
                     seed=seed, suite=suite, cap=cap)


def _wrap(fn, err, key):
    try:
        return fn()
    except ConfigError as exc:
        raise err(str(exc).split(": ", 1)[-1], key) from exc
