"""Named, replayable verification cases backed by TOML fixtures.

A case file is a run configuration plus ``id``, ``kind``, ``description`` and
an optional ``expected`` status. Every sequence, function and family in a case
carries a provenance ``tag``: ``PAPER`` (value stated in the source
mathematics), ``TRIVIAL`` (immediate) or ``DERIVED`` (computed here and
checked by an independent oracle in the tests).
"""

from __future__ import annotations

import fnmatch
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .config import RunConfig, load_config
from .errors import ConfigError
from .probes import ProbeReport, Witness, combine_status
from .report import Outcome, expectation
from .runner import Params, run_classify, run_probes
from .sequences import FAIL, INCONCLUSIVE, PASS, ToleranceSchedule
from .theorems import (Battery, check_u_implies_ward, check_uniform_implies_ward, check_ward_compact_image,
                       check_ward_implies_sequential, run_implication_matrix, verify_uniform_limit_u,
                       verify_uniform_limit_ward)

FIXTURE_ENV = "TWONORM_FIXTURES"
PAPER_EXAMPLES = ("example-3-2", "example-square-map")
QUARANTINE_OK = (PASS, INCONCLUSIVE)


@dataclass
class TheoremCase:
    id: str
    kind: str
    description: str
    expected: str
    config: RunConfig
    path: Path

    @property
    def tags(self) -> dict[str, str]:
        out = {}
        for group in ("sequences", "functions", "families"):
            for name, entry in getattr(self.config, group).items():
                out[f"{group[:-1] if group != 'families' else 'family'}.{name}"] = entry.tag
        return out


def fixture_dir() -> Path:
    env = os.environ.get(FIXTURE_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("twonorm").joinpath("fixtures")))


def load_case(path: str | Path, overrides: dict | None = None) -> TheoremCase:
    cfg = load_config(path, overrides, require_tags=True)
    problems = []
    for key in ("id", "kind"):
        if not isinstance(cfg.meta.get(key), str):
            problems.append((key, "required string"))
    kind = cfg.meta.get("kind")
    if isinstance(kind, str) and kind not in RUNNERS:
        problems.append(("kind", f"unknown case kind {kind!r}"))
    if problems:
        raise ConfigError(problems)
    return TheoremCase(cfg.meta["id"], kind, cfg.meta.get("description", ""),
                       cfg.meta.get("expected", PASS), cfg, Path(path))


def load_cases(directory: str | Path | None = None, overrides: dict | None = None) -> list[TheoremCase]:
    directory = Path(directory) if directory is not None else fixture_dir()
    if not directory.is_dir():
        raise ConfigError([(str(directory), "fixture directory not found")])
    cases = [load_case(p, overrides) for p in sorted(directory.glob("*.toml"))]
    ids = [c.id for c in cases]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ConfigError([("id", f"duplicate case ids {dupes}")])
    return sorted(cases, key=lambda c: c.id)


def select_cases(cases: Sequence[TheoremCase], selector: str) -> list[TheoremCase]:
    chosen = [c for c in cases if fnmatch.fnmatchcase(c.id, selector)]
    if not chosen:
        raise ConfigError([("selector", f"no case matches {selector!r}")])
    return chosen


# ---------------------------------------------------------------------------
# Per-kind runners
# ---------------------------------------------------------------------------

def _function_params(cfg: RunConfig, name: str) -> Params:
    base = {k: v for k, v in cfg.params.items() if k != "per_function"}
    own = cfg.params.get("per_function", {}).get(name, {})
    return Params({**base, **own}, f"params.per_function.{name}" if own else "params")


def _subjects(cfg: RunConfig) -> list[str]:
    names = cfg.params.get("functions")
    return list(cfg.functions) if names is None else list(names)


def _battery(cfg: RunConfig):
    qc = [e.seq for e in cfg.sequences.values() if e.limit is None]
    conv = [(e.seq, e.limit) for e in cfg.sequences.values() if e.limit is not None]
    return qc, conv


def _per_function(case: TheoremCase, check: Callable[[str, Params], ProbeReport]) -> list[Outcome]:
    cfg = case.config
    outcomes = []
    for name in _subjects(cfg):
        if name not in cfg.functions and name not in cfg.families:
            raise ConfigError([("params.functions", f"unknown function {name!r}")])
        p = _function_params(cfg, name)
        report = check(name, p)
        expected = expectation(p.get("expect")) or QUARANTINE_OK
        outcomes.append(Outcome(report, expected, case.id, name))
    return outcomes


def _summary(case: TheoremCase, outcomes: list[Outcome]) -> Outcome:
    alarms = [o for o in outcomes if o.report.status == FAIL]
    statuses = [o.report.status for o in outcomes]
    if alarms:
        status = FAIL
    elif PASS in statuses:
        status = PASS
    else:
        status = INCONCLUSIVE
    witnesses = [w for o in alarms for w in o.report.witnesses] or (
        [Witness(None, (), float("nan"), None, "alarm without witness")] if alarms else [])
    report = ProbeReport(f"case:{case.kind}", status, witnesses, {"kind": case.kind},
                         {"description": case.description, "alarms": len(alarms),
                          "subjects": {o.subject: o.report.status for o in outcomes}})
    return Outcome(report, expectation(case.expected), case.id, None)


def _run_ward_implies_sequential(case: TheoremCase) -> list[Outcome]:
    cfg = case.config
    qc, conv = _battery(cfg)

    def check(name, p):
        return check_ward_implies_sequential(cfg.space, cfg.functions[name].func, qc, conv, cfg.schedule,
                                             cfg.image_epsilon)
    return _per_function(case, check)


def _run_u_implies_ward(case: TheoremCase) -> list[Outcome]:
    cfg = case.config
    seqs = [e.seq for e in cfg.sequences.values()]

    def check(name, p):
        args = dict(domain_box=p.box("box", cfg.space.dim), epsilon=p.number("epsilon"),
                    delta_grid=p.floats("delta_grid"), pair_samples=p.integer("pair_samples", 2000))
        p.raise_if_problems()
        return check_u_implies_ward(cfg.space, cfg.functions[name].func, seqs, cfg.schedule, seed=cfg.seed, **args)
    return _per_function(case, check)


def _run_uniform_implies_ward(case: TheoremCase) -> list[Outcome]:
    cfg = case.config
    seqs = [e.seq for e in cfg.sequences.values()]
    dim = cfg.space.dim

    def check(name, p):
        args = dict(domain_box=p.box("box", dim), epsilon=p.number("epsilon"), w=p.vector("w", dim),
                    certificate=p.certificate("certificate", dim), pair_samples=p.integer("pair_samples", 2000))
        p.raise_if_problems()
        return check_uniform_implies_ward(cfg.space, cfg.functions[name].func, seqs, cfg.schedule,
                                          seed=cfg.seed, **args)
    return _per_function(case, check)


def _run_ward_compact_image(case: TheoremCase) -> list[Outcome]:
    cfg = case.config
    seqs = [e.seq for e in cfg.sequences.values()]

    def check(name, p):
        bound, image_bound = p.number("bound"), p.number("image_bound")
        p.raise_if_problems()
        return check_ward_compact_image(cfg.space, cfg.functions[name].func, seqs, cfg.schedule, bound,
                                        image_bound, cfg.image_epsilon)
    return _per_function(case, check)


def _family_schedule(p: Params) -> ToleranceSchedule | None:
    window = p.get("family_window")
    if window is None:
        return None
    if not (isinstance(window, list) and len(window) == 2 and all(isinstance(w, int) for w in window)):
        p.problems.append((f"{p.path}.family_window", "expected [N, M] integers"))
        return None
    # epsilon is replaced by the caller's eps/3
    return ToleranceSchedule(window[0], window[1], 1.0)


def _run_uniform_limit(case: TheoremCase, which: str) -> list[Outcome]:
    cfg = case.config
    seqs = [e.seq for e in cfg.sequences.values()]
    dim = cfg.space.dim
    outcomes = []
    for name, fam in cfg.families.items():
        p = _function_params(cfg, name)
        fam_sched = _family_schedule(p)
        members = p.get("members")
        limit = cfg.functions[fam.limit].func
        if which == "ward":
            p.raise_if_problems()
            report = verify_uniform_limit_ward(cfg.space, fam.family, limit, seqs, cfg.schedule, fam_sched,
                                               members, cfg.image_epsilon)
        else:
            args = dict(domain_box=p.box("box", dim), epsilon=p.number("epsilon"),
                        delta_grid=p.floats("delta_grid"), pair_samples=p.integer("pair_samples", 2000),
                        domain_samples=p.integer("domain_samples", 500))
            p.raise_if_problems()
            report = verify_uniform_limit_u(cfg.space, fam.family, limit, seed=cfg.seed, family_sched=fam_sched,
                                            members=members, **args)
        outcomes.append(Outcome(report, expectation(p.get("expect")) or QUARANTINE_OK, case.id, name))
    if not outcomes:
        raise ConfigError([("family", "uniform-limit cases need at least one [family.*] table")])
    return outcomes


def _run_lattice(case: TheoremCase) -> list[Outcome]:
    cfg = case.config
    qc, conv = _battery(cfg)
    battery = Battery(tuple(qc), tuple(conv))
    outcomes = []
    for name in _subjects(cfg):
        p = _function_params(cfg, name)
        verdict = run_implication_matrix(cfg.space, cfg.functions[name].func, battery, cfg.schedule,
                                         cfg.image_epsilon)
        report = verdict.report()
        pattern = p.get("verdicts")
        if pattern is not None:
            matched = list(verdict.vector) == list(pattern)
            report.details["expected_verdicts"] = list(pattern)
            report.details["pattern_matched"] = matched
            if not matched and report.status == PASS:
                report = ProbeReport(report.probe, FAIL,
                                     [Witness(None, (), float("nan"), None,
                                              f"verdicts {list(verdict.vector)} differ from {list(pattern)}")],
                                     report.params, report.details)
        outcomes.append(Outcome(report, (PASS,), case.id, name))
    return outcomes


def _with_case(case: TheoremCase, outcomes: list[Outcome]) -> list[Outcome]:
    for o in outcomes:
        o.case = case.id
    return outcomes


RUNNERS: dict[str, Callable[[TheoremCase], list[Outcome]]] = {
    "classify": lambda c: _with_case(c, run_classify(c.config)),
    "probe": lambda c: _with_case(c, run_probes(c.config, trace=bool(c.config.probes.get("trace", False)))),
    "ward-implies-sequential": _run_ward_implies_sequential,
    "u-implies-ward": _run_u_implies_ward,
    "uniform-implies-ward": _run_uniform_implies_ward,
    "ward-compact-image": _run_ward_compact_image,
    "uniform-limit-ward": lambda c: _run_uniform_limit(c, "ward"),
    "uniform-limit-u": lambda c: _run_uniform_limit(c, "u"),
    "implication-lattice": _run_lattice,
}
SUMMARISED = {"ward-implies-sequential", "u-implies-ward", "uniform-implies-ward", "ward-compact-image",
              "uniform-limit-ward", "uniform-limit-u", "implication-lattice"}


def run_case(case: TheoremCase) -> list[Outcome]:
    outcomes = RUNNERS[case.kind](case)
    if case.kind in SUMMARISED:
        outcomes = outcomes + [_summary(case, outcomes)]
    return outcomes


def run_cases(cases: Sequence[TheoremCase]) -> list[Outcome]:
    """Run cases one after another; outcomes come back grouped by case id."""
    out: list[Outcome] = []
    for case in sorted(cases, key=lambda c: c.id):
        out.extend(run_case(case))
    return out


def run_paper_examples(seed: int = 42, directory: str | Path | None = None) -> list[Outcome]:
    """The golden cases: the square-root sequence and its (n, n) subsequence,
    and the square map that is continuous but not ward continuous."""
    cases = {c.id: c for c in load_cases(directory, {"seed": seed})}
    missing = [i for i in PAPER_EXAMPLES if i not in cases]
    if missing:
        raise ConfigError([("fixtures", f"golden cases missing: {missing}")])
    return run_cases([cases[i] for i in PAPER_EXAMPLES])


def status_of(outcomes: Sequence[Outcome]) -> str:
    return combine_status([o.report.status for o in outcomes])
