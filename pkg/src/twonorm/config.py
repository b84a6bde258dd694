"""Run configuration: TOML files with [space], [sequence.*], [function.*],
[family.*], [schedule], [probes] and [axioms] sections.

Validation collects every problem before failing, so a bad file is reported
in one go with the dotted path of each offending field.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, DslError, TwoNormError
from .norms import TwoNormSpace, Vector
from .probes import FuncFamilySpec, FuncSpec
from .sequences import DEFAULT_EPSILON, DEFAULT_WINDOW, SeqSpec, ToleranceSchedule

TAGS = ("PAPER", "TRIVIAL", "DERIVED")
STATUSES = ("pass", "fail", "inconclusive")


@dataclass(frozen=True)
class SeqEntry:
    seq: SeqSpec
    limit: Vector | None = None
    tag: str | None = None
    expect: Any = "pass"
    bound: float | None = None
    schedule: ToleranceSchedule | None = None  # per-sequence override of [schedule]


@dataclass(frozen=True)
class FuncEntry:
    func: FuncSpec
    tag: str | None = None


@dataclass(frozen=True)
class FamilyEntry:
    family: FuncFamilySpec
    limit: str
    tag: str | None = None


@dataclass
class RunConfig:
    space: TwoNormSpace
    schedule: ToleranceSchedule
    image_epsilon: float
    sequences: dict[str, SeqEntry] = field(default_factory=dict)
    functions: dict[str, FuncEntry] = field(default_factory=dict)
    families: dict[str, FamilyEntry] = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    axioms: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    meta: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return config_digest(self.raw)


def config_digest(data: Any) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


class _Checker:
    def __init__(self):
        self.problems: list[tuple[str, str]] = []

    def add(self, path: str, msg: str) -> None:
        self.problems.append((path, msg))

    def number(self, table: dict, key: str, path: str, default=None, positive=False):
        value = table.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.add(f"{path}.{key}", f"expected a finite number, got {value!r}")
            return None
        if positive and value <= 0:
            self.add(f"{path}.{key}", f"must be positive, got {value!r}")
            return None
        return float(value)

    def vector(self, value, path: str, dim: int | None) -> Vector | None:
        if (not isinstance(value, list) or not value
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)):
            self.add(path, f"expected a list of numbers, got {value!r}")
            return None
        if dim is not None and len(value) != dim:
            self.add(path, f"expected {dim} components, got {len(value)}")
            return None
        return tuple(float(c) for c in value)

    def tag(self, table: dict, path: str, required: bool) -> str | None:
        tag = table.get("tag")
        if tag is None:
            if required:
                self.add(f"{path}.tag", f"provenance tag required (one of {', '.join(TAGS)})")
            return None
        if tag not in TAGS:
            self.add(f"{path}.tag", f"unknown provenance tag {tag!r}; use one of {', '.join(TAGS)}")
        return tag


def _parse_space(chk: _Checker, table) -> TwoNormSpace | None:
    if not isinstance(table, dict):
        chk.add("space", "missing [space] section")
        return None
    kind = table.get("kind", "det2")
    dim = table.get("dim", 2)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
        chk.add("space.dim", f"expected an integer >= 2, got {dim!r}")
        return None
    basis = table.get("basis", [])
    if not isinstance(basis, list):
        chk.add("space.basis", "expected a list of vectors")
        return None
    vecs = []
    for i, b in enumerate(basis):
        v = chk.vector(b, f"space.basis[{i}]", dim)
        if v is None:
            return None
        vecs.append(v)
    try:
        if kind == "det2":
            if dim != 2:
                chk.add("space.dim", "det2 requires dim = 2")
                return None
            return TwoNormSpace.det2(vecs)
        if kind == "gram":
            return TwoNormSpace.gram(dim, vecs)
        if kind == "dsl":
            expr = table.get("expr")
            if not isinstance(expr, str):
                chk.add("space.expr", "dsl norm needs an expression string")
                return None
            return TwoNormSpace.from_dsl(dim, expr, vecs)
        chk.add("space.kind", f"unknown kind {kind!r}; use det2, gram or dsl")
    except (TwoNormError, ValueError) as exc:
        chk.add("space", str(exc))
    return None


def _parse_schedule(chk: _Checker, table: dict, overrides: dict,
                    path: str = "schedule") -> tuple[ToleranceSchedule | None, float | None]:
    if not isinstance(table, dict):
        chk.add(path, "expected a table")
        return None, None
    window = overrides.get("window") or table.get("window", list(DEFAULT_WINDOW))
    eps = overrides.get("epsilon") or chk.number(table, "epsilon", path, DEFAULT_EPSILON, positive=True)
    if (not isinstance(window, (list, tuple)) or len(window) != 2
            or not all(isinstance(w, int) and not isinstance(w, bool) for w in window)):
        chk.add(f"{path}.window", f"expected [N, M] integers, got {window!r}")
        return None, None
    img = chk.number(table, "image_epsilon", path, None, positive=True)
    try:
        # validate the window even when eps is bad, so both problems are reported
        sched = ToleranceSchedule(window[0], window[1], eps if eps is not None else DEFAULT_EPSILON)
    except TwoNormError as exc:
        chk.add(f"{path}.window", str(exc))
        return None, None
    if eps is None:
        return None, None
    return sched, img if img is not None else eps


def _expr_text(chk: _Checker, table: dict, path: str):
    if "expr" in table:
        if not isinstance(table["expr"], str):
            chk.add(f"{path}.expr", "expected a string")
            return None
        return table["expr"]
    comps = table.get("components")
    if isinstance(comps, list) and comps and all(isinstance(c, str) for c in comps):
        return comps
    chk.add(path, "needs 'expr' (tuple expression) or 'components' (list of strings)")
    return None


def parse_config(data: dict, overrides: dict | None = None, require_tags: bool = False) -> RunConfig:
    """Validate a decoded TOML document. Raises :class:`ConfigError`."""
    overrides = overrides or {}
    chk = _Checker()
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "configuration must be a table")])
    space = _parse_space(chk, data.get("space"))
    dim = space.dim if space is not None else None
    sched, image_eps = _parse_schedule(chk, data.get("schedule", {}), overrides)

    sequences: dict[str, SeqEntry] = {}
    for name, entry in (data.get("sequence") or {}).items():
        path = f"sequence.{name}"
        if not isinstance(entry, dict):
            chk.add(path, "expected a table")
            continue
        tag = chk.tag(entry, path, require_tags)
        try:
            if "terms" in entry:
                terms = [chk.vector(t, f"{path}.terms[{i}]", dim) for i, t in enumerate(entry["terms"])]
                if any(t is None for t in terms):
                    continue
                seq = SeqSpec.from_terms(terms, label=name)
            else:
                text = entry.get("expr")
                if not isinstance(text, str):
                    chk.add(path, "needs 'expr' or 'terms'")
                    continue
                seq = SeqSpec.from_text(text, entry.get("index_map"), label=name)
        except DslError as exc:
            chk.add(f"{path}.expr", str(exc))
            continue
        except (TwoNormError, ValueError) as exc:
            chk.add(path, str(exc))
            continue
        if dim is not None and seq.dim != dim:
            chk.add(path, f"sequence dimension {seq.dim} does not match space dimension {dim}")
            continue
        limit = None
        if "limit" in entry:
            limit = chk.vector(entry["limit"], f"{path}.limit", dim)
        expect = entry.get("expect", "pass")
        if isinstance(expect, str) and expect not in STATUSES:
            chk.add(f"{path}.expect", f"expected one of {', '.join(STATUSES)}")
        bound = chk.number(entry, "bound", path, None, positive=True)
        own = None
        if ("window" in entry or "epsilon" in entry) and sched is not None:
            own, _ = _parse_schedule(chk, {"window": entry.get("window", list(sched.window)),
                                           "epsilon": entry.get("epsilon", sched.epsilon)}, {}, path)
        sequences[name] = SeqEntry(seq, limit, tag, expect, bound, own)

    functions: dict[str, FuncEntry] = {}
    for name, entry in (data.get("function") or {}).items():
        path = f"function.{name}"
        if not isinstance(entry, dict):
            chk.add(path, "expected a table")
            continue
        tag = chk.tag(entry, path, require_tags)
        text = _expr_text(chk, entry, path)
        if text is None:
            continue
        try:
            func = FuncSpec.from_text(text, dim, label=name)
        except DslError as exc:
            chk.add(f"{path}.expr", str(exc))
            continue
        except ValueError as exc:
            chk.add(path, str(exc))
            continue
        if dim is not None and func.dim_out != dim:
            chk.add(path, f"function has {func.dim_out} components, space dimension is {dim}")
            continue
        functions[name] = FuncEntry(func, tag)

    families: dict[str, FamilyEntry] = {}
    for name, entry in (data.get("family") or {}).items():
        path = f"family.{name}"
        if not isinstance(entry, dict):
            chk.add(path, "expected a table")
            continue
        tag = chk.tag(entry, path, require_tags)
        text = _expr_text(chk, entry, path)
        limit = entry.get("limit")
        if not isinstance(limit, str):
            chk.add(f"{path}.limit", "name of the limit function required")
        elif limit not in (data.get("function") or {}):
            chk.add(f"{path}.limit", f"unknown function {limit!r}")
        if text is None or not isinstance(limit, str):
            continue
        try:
            fam = FuncFamilySpec.from_text(text, dim, label=name)
        except DslError as exc:
            chk.add(f"{path}.expr", str(exc))
            continue
        except ValueError as exc:
            chk.add(path, str(exc))
            continue
        if dim is not None and fam.base.dim_out != dim:
            chk.add(path, f"family has {fam.base.dim_out} components, space dimension is {dim}")
            continue
        families[name] = FamilyEntry(fam, limit, tag)

    seed = overrides.get("seed", data.get("seed", 0))
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        chk.add("seed", f"expected an unsigned 64-bit integer, got {seed!r}")
        seed = 0
    for section in ("probes", "axioms", "params"):
        if not isinstance(data.get(section, {}), dict):
            chk.add(section, "expected a table")

    if chk.problems:
        raise ConfigError(chk.problems)
    meta = {k: data[k] for k in ("id", "kind", "description", "expected") if k in data}
    raw = dict(data)
    if overrides:
        raw["__overrides__"] = {k: v for k, v in overrides.items() if v is not None}
    return RunConfig(
        space=space, schedule=sched, image_epsilon=image_eps, sequences=sequences,
        functions=functions, families=families, probes=dict(data.get("probes", {})),
        axioms=dict(data.get("axioms", {})), params=dict(data.get("params", {})),
        seed=seed, output=overrides.get("output") or data.get("output"), meta=meta, raw=raw,
    )


def load_config(path: str | Path, overrides: dict | None = None, require_tags: bool = False) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError([(str(path), "file not found")]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([(str(path), f"TOML syntax error: {exc}")]) from None
    return parse_config(data, overrides, require_tags)
