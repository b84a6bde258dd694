"""Config-driven runs: axioms, sequence classification and continuity probes.

Each runner turns a validated :class:`RunConfig` into a list of
:class:`Outcome` objects. Missing or malformed probe parameters raise
:class:`ConfigError` before anything is measured.
"""

from __future__ import annotations

import math
from typing import Any

from .config import RunConfig, SeqEntry
from .errors import ConfigError
from .norms import check_axioms
from .probes import (ProbeReport, Witness, probe_sequential, probe_u_continuity, probe_uniform_continuity,
                     probe_ward, probe_ward_compact_image)
from .report import Outcome, expectation
from .sequences import FAIL, PASS, ToleranceSchedule, classify_cauchy, classify_convergent, classify_quasi_cauchy

CLASSIFIERS = ("quasi_cauchy", "cauchy", "convergent")
PROBES = ("ward", "sequential", "compact_image", "u", "uniform")


class Params:
    """Typed access to a parameter table with field-path diagnostics."""

    def __init__(self, table: Any, path: str):
        self.table = table if isinstance(table, dict) else {}
        self.path = path
        self.problems: list[tuple[str, str]] = []
        if not isinstance(table, dict):
            self.problems.append((path, "expected a table"))

    def _bad(self, key: str, msg: str):
        self.problems.append((f"{self.path}.{key}", msg))

    def get(self, key: str, default=None):
        return self.table.get(key, default)

    def number(self, key: str, default=None, positive: bool = True):
        v = self.table.get(key, default)
        if v is None:
            self._bad(key, "required")
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or (positive and v <= 0):
            self._bad(key, f"expected a {'positive ' if positive else ''}finite number, got {v!r}")
            return None
        return float(v)

    def integer(self, key: str, default=None):
        v = self.table.get(key, default)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            self._bad(key, f"expected a positive integer, got {v!r}")
            return None
        return v

    def vector(self, key: str, dim: int, default=None):
        v = self.table.get(key, default)
        if (not isinstance(v, list) or len(v) != dim
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
            self._bad(key, f"expected {dim} numbers, got {v!r}")
            return None
        return tuple(float(c) for c in v)

    def box(self, key: str, dim: int):
        v = self.table.get(key)
        ok = (isinstance(v, list) and len(v) == 2 and all(isinstance(c, list) and len(c) == dim for c in v)
              and all(isinstance(x, (int, float)) for c in v for x in c))
        if not ok:
            self._bad(key, f"expected [[lo...], [hi...]] with {dim} coordinates each, got {v!r}")
            return None
        lo, hi = v
        if any(b <= a for a, b in zip(lo, hi)):
            self._bad(key, "box needs hi > lo in every coordinate")
            return None
        return [list(map(float, lo)), list(map(float, hi))]

    def floats(self, key: str, default=None):
        v = self.table.get(key, default)
        if not isinstance(v, list) or not v or not all(isinstance(x, (int, float)) and x > 0 for x in v):
            self._bad(key, f"expected a non-empty list of positive numbers, got {v!r}")
            return None
        return [float(x) for x in v]

    def certificate(self, key: str, dim: int):
        v = self.table.get(key)
        try:
            cert = [(tuple(float(c) for c in z), float(d)) for z, d in v]
        except (TypeError, ValueError):
            self._bad(key, "expected a list of [[z...], delta] pairs")
            return None
        if not cert or any(len(z) != dim or d <= 0 for z, d in cert):
            self._bad(key, f"expected non-empty [[z...], delta] pairs with {dim}-vectors and delta > 0")
            return None
        return cert

    def raise_if_problems(self, extra: list[tuple[str, str]] = ()):
        problems = self.problems + list(extra)
        if problems:
            raise ConfigError(problems)


def schedule_for(cfg: RunConfig, entry: SeqEntry) -> ToleranceSchedule:
    return entry.schedule or cfg.schedule


def image_epsilon_for(cfg: RunConfig, entry: SeqEntry) -> float:
    explicit = cfg.raw.get("schedule", {}).get("image_epsilon")
    return float(explicit) if explicit is not None else schedule_for(cfg, entry).epsilon


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

def run_axioms(cfg: RunConfig) -> list[Outcome]:
    p = Params(cfg.axioms, "axioms")
    samples = p.integer("samples", 10_000)
    tol = p.number("tol", 1e-9)
    extra = []
    for i, item in enumerate(p.get("extra", [])):
        try:
            x, y, z, alpha = item
            extra.append((tuple(map(float, x)), tuple(map(float, y)), tuple(map(float, z)), float(alpha)))
        except (TypeError, ValueError):
            p.problems.append((f"axioms.extra[{i}]", "expected [x, y, z, alpha]"))
    p.raise_if_problems()
    rep = check_axioms(cfg.space, samples, cfg.seed, tol, extra)
    witnesses = [
        Witness({"x": list(c.witness[0]), "y": list(c.witness[1]), "alpha": c.witness[3]},
                c.witness[2], c.worst_violation, None,
                f"axiom {c.name}; norm value {c.witness_value!r}")
        for c in rep.checks if not c.passed
    ]
    report = ProbeReport("axioms", PASS if rep.passed else FAIL, witnesses,
                         {"space": cfg.space.describe(), "samples": samples, "tol": tol, "seed": cfg.seed},
                         rep.to_dict())
    return [Outcome(report, expectation(p.get("expect", "pass")), subject=f"{cfg.space.kind}/R^{cfg.space.dim}")]


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def _verdict_report(kind: str, name: str, verdict, limit=None) -> ProbeReport:
    witnesses = []
    if verdict.status == FAIL:
        note = None if verdict.witness_partner is None else f"partner index {verdict.witness_partner}"
        witnesses.append(Witness(verdict.witness_index, verdict.witness_direction, verdict.worst_value, name, note))
    params = {"window": list(verdict.window), "epsilon": verdict.epsilon, "sequence": name}
    if limit is not None:
        params["limit"] = list(limit)
    details = {"worst_value": verdict.worst_value}
    if verdict.trace is not None:
        details["traces"] = {name: [[n, *vals] for n, vals in verdict.trace]}
    return ProbeReport(f"classify:{kind}", verdict.status, witnesses, params, details)


def run_classify(cfg: RunConfig, trace: bool = False) -> list[Outcome]:
    p = Params(cfg.raw.get("classify", {}), "classify")
    kinds = p.get("kinds", ["quasi_cauchy"])
    if not isinstance(kinds, list) or not kinds or any(k not in CLASSIFIERS for k in kinds):
        p.problems.append(("classify.kinds", f"expected a list drawn from {', '.join(CLASSIFIERS)}"))
    extra = [] if cfg.sequences else [("sequence", "no sequences to classify")]
    p.raise_if_problems(extra)
    outcomes = []
    for name, entry in cfg.sequences.items():
        sched = schedule_for(cfg, entry)
        for kind in kinds:
            if kind == "convergent":
                if entry.limit is None:
                    continue
                v = classify_convergent(cfg.space, entry.seq, entry.limit, sched, trace=trace)
            elif kind == "cauchy":
                v = classify_cauchy(cfg.space, entry.seq, sched, trace=trace)
            else:
                v = classify_quasi_cauchy(cfg.space, entry.seq, sched, trace=trace)
            outcomes.append(Outcome(_verdict_report(kind, name, v, entry.limit if kind == "convergent" else None),
                                    expectation(entry.expect, kind), subject=name))
    return outcomes


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------

def run_probes(cfg: RunConfig, trace: bool = False) -> list[Outcome]:
    p = Params(cfg.probes, "probes")
    fname = p.get("function")
    if fname is None and len(cfg.functions) == 1:
        fname = next(iter(cfg.functions))
    if fname not in cfg.functions:
        p.problems.append(("probes.function", f"unknown or missing function {fname!r}"))
    select = p.get("select", ["ward", "sequential"])
    if not isinstance(select, list) or not select or any(s not in PROBES for s in select):
        p.problems.append(("probes.select", f"expected a list drawn from {', '.join(PROBES)}"))
        select = []
    dim = cfg.space.dim
    extra_dirs = []
    for i, d in enumerate(p.get("extra_directions", [])):
        if not isinstance(d, list) or len(d) != dim:
            p.problems.append((f"probes.extra_directions[{i}]", f"expected {dim} numbers"))
        else:
            extra_dirs.append(tuple(map(float, d)))
    sub = {key: Params(p.get(key, {}), f"probes.{key}") for key in ("u", "uniform", "compact_image")}
    settings = {}
    if "u" in select:
        u = sub["u"]
        settings["u"] = dict(domain_box=u.box("box", dim), epsilon=u.number("epsilon"),
                             delta_grid=u.floats("delta_grid"), pair_samples=u.integer("pair_samples", 2000))
    if "uniform" in select:
        un = sub["uniform"]
        settings["uniform"] = dict(domain_box=un.box("box", dim), epsilon=un.number("epsilon"),
                                   w=un.vector("w", dim), delta_list=un.certificate("certificate", dim),
                                   pair_samples=un.integer("pair_samples", 2000))
    if "compact_image" in select:
        settings["compact_image"] = dict(bound=sub["compact_image"].number("bound"))
    if any(k in select for k in ("ward", "sequential", "compact_image")) and not cfg.sequences:
        p.problems.append(("sequence", "sequence probes selected but no sequences defined"))
    p.raise_if_problems([prob for s in sub.values() for prob in s.problems])

    f = cfg.functions[fname].func
    space = cfg.space
    outcomes = []
    for name, entry in cfg.sequences.items():
        sched = schedule_for(cfg, entry)
        img = image_epsilon_for(cfg, entry)
        if "ward" in select:
            rep = probe_ward(space, f, [entry.seq], sched, img, extra_dirs, trace=trace)
            outcomes.append(Outcome(rep, expectation(entry.expect, "ward"), subject=name))
        if "sequential" in select and entry.limit is not None:
            rep = probe_sequential(space, f, [(entry.seq, entry.limit)], sched, img)
            outcomes.append(Outcome(rep, expectation(entry.expect, "sequential"), subject=name))
        if "compact_image" in select:
            rep = probe_ward_compact_image(space, f, [entry.seq], sched.with_epsilon(img),
                                           settings["compact_image"]["bound"])
            outcomes.append(Outcome(rep, expectation(entry.expect, "compact_image"), subject=name))
    if "u" in select:
        rep = probe_u_continuity(space, f, seed=cfg.seed, **settings["u"])
        outcomes.append(Outcome(rep, expectation(sub["u"].get("expect", "pass")), subject=fname))
    if "uniform" in select:
        rep = probe_uniform_continuity(space, f, seed=cfg.seed, **settings["uniform"])
        outcomes.append(Outcome(rep, expectation(sub["uniform"].get("expect", "pass")), subject=fname))
    return outcomes
