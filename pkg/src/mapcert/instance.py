"""Instance files: named spaces, maps, constants, anchors, configs and
an ordered task list, loaded from JSON with full cross-reference
validation and an enumeration cap checked before any sweep runs.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .composition import RateConstants
from .formula import bind_point, compile_formula, scalar_names
from .maps import (BiMultiMap, MultiMap, ParamMultiMap, bimultimap, from_linear,
                   multimap, param_multimap)
from .metric import GridSpace, grid_1d, grid_space, product_space
from .moduli import NeighborhoodConfig

DEFAULT_CAP = 10_000_000

AnyMap = MultiMap | ParamMultiMap | BiMultiMap


class InstanceError(ValueError):
    """The instance file is malformed or a cross-reference dangles."""


class CapExceeded(InstanceError):
    """A declaration or task would enumerate more tuples than allowed."""

    def __init__(self, what: str, count: int, cap: int):
        super().__init__(f"{what} needs {count} tuples, over the cap of "
                         f"{cap}")
        self.what = what
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class Task:
    name: str
    kind: str
    args: dict


@dataclass(frozen=True)
class InstanceFile:
    path: Path
    digest: str
    spaces: dict[str, GridSpace]
    maps: dict[str, AnyMap]
    constants: dict[str, RateConstants]
    anchors: dict[str, tuple]
    configs: dict[str, NeighborhoodConfig]
    tasks: tuple[Task, ...] = field(default_factory=tuple)

    def task(self, name: str) -> Task:
        for t in self.tasks:
            if t.name == name:
                return t
        raise InstanceError(f"no task named {name!r}")


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceError(f"{where}: missing required key {key!r}")
    return obj[key]


def _build_space(name: str, decl: dict, done: dict[str, GridSpace]
                 ) -> GridSpace:
    where = f"space {name!r}"
    if "product" in decl:
        parts = []
        for ref in decl["product"]:
            if ref not in done:
                raise InstanceError(f"{where}: unknown factor {ref!r} "
                                    f"(declare factors first)")
            parts.append(done[ref])
        return product_space(*parts, label=name)
    if "points" in decl:
        return grid_space(name, decl["points"], decl.get("norm", "l1"))
    for key in ("start", "stop", "step"):
        _need(decl, key, where)
    return grid_1d(name, decl["start"], decl["stop"], decl["step"],
                   decl.get("norm", "l1"))


def _space_of(name, spaces: dict[str, GridSpace], where: str) -> GridSpace:
    if name not in spaces:
        raise InstanceError(f"{where}: unknown space {name!r}")
    return spaces[name]


def _formula_graph(decl: dict, blocks: tuple[tuple[str, GridSpace], ...],
                   target: GridSpace, where: str, cap: int):
    count = math.prod(len(s.points) for _, s in blocks)
    if count > cap:
        raise CapExceeded(where, count, cap)
    names = list(itertools.chain.from_iterable(
        scalar_names(prefix, s.dim) for prefix, s in blocks))
    fn = compile_formula(decl["formula"], names)
    rows = []
    for combo in itertools.product(*(s.points for _, s in blocks)):
        binding = {}
        for (prefix, _), pt in zip(blocks, combo):
            binding.update(bind_point(prefix, pt))
        value = target.require(fn(binding), context=where)
        rows.append((*combo, value))
    return rows


def _build_map(name: str, decl: dict, spaces: dict[str, GridSpace],
               cap: int) -> AnyMap:
    where = f"map {name!r}"
    kind = decl.get("kind", "multi")
    target = _space_of(_need(decl, "target", where), spaces, where)

    if kind == "multi":
        source = _space_of(_need(decl, "source", where), spaces, where)
        if "matrix" in decl:
            count = len(source.points)
            if count > cap:
                raise CapExceeded(where, count, cap)
            return from_linear(decl["matrix"], source, target, label=name)
        if "formula" in decl:
            rows = _formula_graph(decl, (("x", source),), target, where, cap)
            return multimap(source, target, rows, label=name)
        return multimap(source, target, _need(decl, "graph", where),
                        label=name)

    if kind == "param":
        source = _space_of(_need(decl, "source", where), spaces, where)
        params = _space_of(_need(decl, "params", where), spaces, where)
        if "formula" in decl:
            rows = _formula_graph(decl, (("x", source), ("p", params)),
                                  target, where, cap)
            return param_multimap(source, params, target, rows, label=name)
        return param_multimap(source, params, target,
                              _need(decl, "graph", where), label=name)

    if kind == "bi":
        left = _space_of(_need(decl, "left", where), spaces, where)
        right = _space_of(_need(decl, "right", where), spaces, where)
        if "formula" in decl:
            rows = _formula_graph(decl, (("y", left), ("z", right)),
                                  target, where, cap)
            return bimultimap(left, right, target, rows, label=name)
        return bimultimap(left, right, target, _need(decl, "graph", where),
                          label=name)

    raise InstanceError(f"{where}: unknown kind {kind!r}")


def _build_config(name: str, decl: dict) -> NeighborhoodConfig:
    where = f"config {name!r}"
    kwargs = {
        "radius_u": _need(decl, "radius_u", where),
        "radius_v": _need(decl, "radius_v", where),
        "epsilon": _need(decl, "epsilon", where),
        "rho_grid": tuple(_need(decl, "rho_grid", where)),
    }
    if "radius_w" in decl:
        kwargs["radius_w"] = decl["radius_w"]
    if "resolution" in decl:
        kwargs["resolution"] = decl["resolution"]
    return NeighborhoodConfig(**kwargs)


_TASK_MAP_KEYS = ("map", "f", "g", "f1", "f2")
_TASK_KINDS = ("estimate", "verify-equiv", "certify", "implicit", "solve",
               "verify-fixpoint")


def _validate_task(task: Task, inst: "InstanceFile") -> None:
    where = f"task {task.name!r}"
    if task.kind not in _TASK_KINDS:
        raise InstanceError(f"{where}: unknown kind {task.kind!r}")
    for key in _TASK_MAP_KEYS:
        ref = task.args.get(key)
        if ref is not None and ref not in inst.maps:
            raise InstanceError(f"{where}: unknown map {ref!r}")
    ref = task.args.get("config")
    if ref is not None and ref not in inst.configs:
        raise InstanceError(f"{where}: unknown config {ref!r}")
    ref = task.args.get("constants")
    if ref is not None and ref not in inst.constants:
        raise InstanceError(f"{where}: unknown constants {ref!r}")
    ref = task.args.get("anchor")
    if ref is not None and ref not in inst.anchors:
        raise InstanceError(f"{where}: unknown anchor {ref!r}")
    ref = task.args.get("target")
    if isinstance(ref, str) and ref not in inst.spaces:
        raise InstanceError(f"{where}: unknown space {ref!r}")


def task_cost(task: Task, inst: InstanceFile) -> int:
    """Product of the grid sizes of every space the task touches."""
    seen: dict[str, int] = {}
    for key in _TASK_MAP_KEYS:
        ref = task.args.get(key)
        if ref is None:
            continue
        mapping = inst.maps[ref]
        if isinstance(mapping, MultiMap):
            parts = (mapping.source, mapping.target)
        elif isinstance(mapping, ParamMultiMap):
            parts = (mapping.source, mapping.params, mapping.target)
        else:
            parts = (mapping.left, mapping.right, mapping.target)
        for s in parts:
            seen[s.label] = len(s.points)
    return math.prod(seen.values()) if seen else 1


def load_instance(path, *, cap: int = DEFAULT_CAP) -> InstanceFile:
    """Parse, build and cross-validate an instance file."""
    p = Path(path)
    raw = p.read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceError(
            f"{p}: parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InstanceError(f"{p}: top level must be an object")

    spaces: dict[str, GridSpace] = {}
    for name, decl in doc.get("spaces", {}).items():
        spaces[name] = _build_space(name, decl, spaces)

    maps: dict[str, AnyMap] = {}
    for name, decl in doc.get("maps", {}).items():
        maps[name] = _build_map(name, decl, spaces, cap)

    constants = {name: RateConstants(**decl)
                 for name, decl in doc.get("constants", {}).items()}
    anchors = {name: tuple(tuple(c) for c in decl)
               for name, decl in doc.get("anchors", {}).items()}
    configs = {name: _build_config(name, decl)
               for name, decl in doc.get("configs", {}).items()}

    tasks = []
    names = set()
    for idx, decl in enumerate(doc.get("tasks", [])):
        name = decl.get("name", f"task{idx}")
        if name in names:
            raise InstanceError(f"duplicate task name {name!r}")
        names.add(name)
        kind = _need(decl, "kind", f"task {name!r}")
        args = {k: v for k, v in decl.items() if k not in ("name", "kind")}
        tasks.append(Task(name, kind, args))

    inst = InstanceFile(p, hashlib.sha256(raw).hexdigest(), spaces, maps,
                        constants, anchors, configs, tuple(tasks))
    for task in inst.tasks:
        _validate_task(task, inst)
        cost = task_cost(task, inst)
        if cost > cap:
            raise CapExceeded(f"task {task.name!r}", cost, cap)
    return inst
