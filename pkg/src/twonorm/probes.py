"""Sampling probes for ward, sequential, u- and uniform continuity.

Every probe returns a :class:`ProbeReport`. A ``pass`` is evidence gathered on
a finite window or sample, never a proof; reports echo the window, tolerances
and seed so a run can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import dsl
from .errors import DimensionError, InvalidToleranceError
from .norms import TwoNormSpace, Vector, eval_against
from .sequences import (FAIL, INCONCLUSIVE, PASS, SeqSpec, ToleranceSchedule, classify_convergent,
                        classify_quasi_cauchy, extract_quasi_cauchy_subsequence, map_sequence)


# ---------------------------------------------------------------------------
# Functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FuncSpec:
    """A map R^m -> R^k given by one scalar expression per output component.

    Inputs are bound to ``x1..xm``. When ``parametric`` is set the expressions
    may also use ``n`` and the object describes a family ``(f_n)``.
    """
    dim_in: int
    components: tuple[dsl.Ast, ...]
    label: str = "f"
    parametric: bool = False

    @classmethod
    def from_text(cls, text: str | Sequence[str], dim_in: int | None = None, label: str = "f",
                  parametric: bool = False) -> "FuncSpec":
        if isinstance(text, str):
            ast = dsl.parse_text(text)
            comps = ast.items if isinstance(ast, dsl.TupleExpr) else (ast,)
        else:
            comps = tuple(dsl.parse_text(t) for t in text)
            if any(isinstance(c, dsl.TupleExpr) for c in comps):
                raise ValueError("function components must be scalar expressions")
        if dim_in is None:
            dim_in = len(comps)
        allowed = {f"x{i}" for i in range(1, dim_in + 1)} | ({"n"} if parametric else set())
        used = set().union(*(dsl.free_variables(c) for c in comps))
        if used - allowed:
            raise ValueError(f"function {label!r} uses unknown variables {sorted(used - allowed)}")
        return cls(dim_in, tuple(comps), label, parametric)

    @property
    def dim_out(self) -> int:
        return len(self.components)

    def __call__(self, x: Sequence[float], n: int | None = None) -> Vector:
        if len(x) != self.dim_in:
            raise DimensionError(f"{self.label} expects {self.dim_in} inputs, got {len(x)}")
        env = {f"x{i + 1}": float(v) for i, v in enumerate(x)}
        if n is not None:
            env["n"] = float(n)
        return tuple(dsl.evaluate(c, env) for c in self.components)

    def many(self, xs: np.ndarray, n: int | None = None) -> np.ndarray:
        """Evaluate at every row of ``xs``; returns a ``(K, dim_out)`` array."""
        xs = np.asarray(xs, dtype=float).reshape(-1, self.dim_in)
        env = {f"x{i + 1}": xs[:, i] for i in range(self.dim_in)}
        if n is not None:
            env["n"] = float(n)
        return dsl.evaluate_array(dsl.TupleExpr(self.components), env)

    def text(self) -> str:
        return dsl.to_text(dsl.TupleExpr(self.components))


@dataclass(frozen=True)
class FamilyMember:
    """``f_n`` for a fixed ``n``; callable like a plain function."""
    family: FuncSpec
    n: int

    def __call__(self, x: Sequence[float]) -> Vector:
        return self.family(x, self.n)

    def many(self, xs: np.ndarray) -> np.ndarray:
        return self.family.many(xs, self.n)

    @property
    def dim_in(self) -> int:
        return self.family.dim_in

    @property
    def dim_out(self) -> int:
        return self.family.dim_out

    @property
    def label(self) -> str:
        return f"{self.family.label}[{self.n}]"


@dataclass(frozen=True)
class FuncFamilySpec:
    base: FuncSpec

    @classmethod
    def from_text(cls, text: str | Sequence[str], dim_in: int | None = None, label: str = "f_n") -> "FuncFamilySpec":
        return cls(FuncSpec.from_text(text, dim_in, label, parametric=True))

    def member(self, n: int) -> FamilyMember:
        return FamilyMember(self.base, n)

    @property
    def label(self) -> str:
        return self.base.label


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    location: Any  # sequence index, or input vector for pair probes
    direction: Vector
    value: float
    sequence: str | None = None
    note: str | None = None

    def to_dict(self) -> dict:
        out = {
            "location": list(self.location) if isinstance(self.location, tuple) else self.location,
            "direction": list(self.direction),
            "value": self.value,
        }
        if self.sequence is not None:
            out["sequence"] = self.sequence
        if self.note is not None:
            out["note"] = self.note
        return out


@dataclass
class ProbeReport:
    probe: str
    status: str
    witnesses: list[Witness] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == FAIL and not self.witnesses:
            raise ValueError(f"failing report {self.probe!r} must carry a witness")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "probe": self.probe,
            "status": self.status,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "params": self.params,
            "details": self.details,
        }


def combine_status(statuses: Sequence[str]) -> str:
    """fail beats inconclusive beats pass; an empty list is inconclusive."""
    if not statuses:
        return INCONCLUSIVE
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS


def _sched_params(sched: ToleranceSchedule) -> dict:
    return {"window": list(sched.window), "epsilon": sched.epsilon}


def _check_map(space: TwoNormSpace, f) -> None:
    if f.dim_in != space.dim or f.dim_out != space.dim:
        raise DimensionError(f"{f.label} must map R^{space.dim} to itself")


def image_sequence(f, seq: SeqSpec) -> SeqSpec:
    return map_sequence(seq, f, f.dim_out, f.label)


# ---------------------------------------------------------------------------
# Sequence probes
# ---------------------------------------------------------------------------

def probe_ward(space: TwoNormSpace, f, seqs: Sequence[SeqSpec], sched: ToleranceSchedule,
               image_epsilon: float | None = None, extra_directions: Sequence[Vector] = (),
               trace: bool = False) -> ProbeReport:
    """Does ``f`` map the quasi-Cauchy sequences of ``seqs`` to quasi-Cauchy sequences?

    Inputs that are not eps-quasi-Cauchy on the window are skipped and listed.
    Images are checked on the same window at ``image_epsilon`` against the
    basis plus ``extra_directions``.
    """
    _check_map(space, f)
    img_sched = sched.with_epsilon(image_epsilon if image_epsilon is not None else sched.epsilon)
    directions = tuple(space.basis) + tuple(tuple(map(float, d)) for d in extra_directions)
    statuses, witnesses, skipped, checked, traces = [], [], [], {}, {}
    for seq in seqs:
        pre = classify_quasi_cauchy(space, seq, sched)
        if pre.status != PASS:
            skipped.append({"sequence": seq.name, "status": pre.status, "worst_value": pre.worst_value})
            continue
        v = classify_quasi_cauchy(space, image_sequence(f, seq), img_sched, directions, trace=trace)
        statuses.append(v.status)
        checked[seq.name] = {"status": v.status, "worst_value": v.worst_value}
        if trace:
            traces[seq.name] = [[n, *vals] for n, vals in v.trace]
        if v.status != PASS:
            witnesses.append(Witness(v.witness_index, v.witness_direction, v.worst_value, seq.name,
                                     "image difference" if v.status == FAIL else "non-finite image"))
    details = {"checked": checked, "skipped": skipped, "directions": [list(d) for d in directions]}
    if trace:
        details["image_traces"] = traces
    return ProbeReport("ward", combine_status(statuses), witnesses,
                       {**_sched_params(sched), "image_epsilon": img_sched.epsilon, "function": f.label},
                       details)


def probe_sequential(space: TwoNormSpace, f, seqs: Sequence[tuple[SeqSpec, Vector]], sched: ToleranceSchedule,
                     image_epsilon: float | None = None) -> ProbeReport:
    """Do sequences converging to ``limit`` have images converging to ``f(limit)``?"""
    _check_map(space, f)
    img_sched = sched.with_epsilon(image_epsilon if image_epsilon is not None else sched.epsilon)
    statuses, witnesses, skipped, checked = [], [], [], {}
    for seq, limit in seqs:
        pre = classify_convergent(space, seq, limit, sched)
        if pre.status != PASS:
            skipped.append({"sequence": seq.name, "status": pre.status, "worst_value": pre.worst_value})
            continue
        target = f(tuple(limit))
        if not all(math.isfinite(c) for c in target):
            statuses.append(INCONCLUSIVE)
            continue
        v = classify_convergent(space, image_sequence(f, seq), target, img_sched)
        statuses.append(v.status)
        checked[seq.name] = {"status": v.status, "worst_value": v.worst_value, "image_limit": list(target)}
        if v.status != PASS:
            witnesses.append(Witness(v.witness_index, v.witness_direction, v.worst_value, seq.name,
                                     "distance to f(limit)"))
    return ProbeReport("sequential", combine_status(statuses), witnesses,
                       {**_sched_params(sched), "image_epsilon": img_sched.epsilon, "function": f.label},
                       {"checked": checked, "skipped": skipped})


# ---------------------------------------------------------------------------
# Pair probes
# ---------------------------------------------------------------------------

def _box(space: TwoNormSpace, box) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    if lo.shape != (space.dim,) or hi.shape != (space.dim,):
        raise DimensionError("domain box corners have the wrong dimension")
    if np.any(hi <= lo):
        raise ValueError("domain box must have hi > lo in every coordinate")
    return lo, hi


def _anchor_points(rng: np.random.Generator, lo: np.ndarray, hi: np.ndarray, count: int) -> np.ndarray:
    """Uniform points in the box; one in eight is snapped to a random vertex."""
    pts = lo + (hi - lo) * rng.random((count, len(lo)))
    corner = rng.random(count) < 0.125
    bits = rng.random((count, len(lo))) < 0.5
    pts[corner] = np.where(bits, hi, lo)[corner]
    return pts


def _sample_pairs(space: TwoNormSpace, lo, hi, constraints: Sequence[tuple[Vector, float]],
                  count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (x, y) in the box with ``||y - x, z_k|| < delta_k`` for every constraint.

    A random direction u is scaled so that the tightest constraint is met at
    |t| = 1, then y = x + t*u for t uniform in (-1, 1). Pairs leaving the box
    or (after rounding) breaking a constraint are dropped.
    """
    d = len(lo)
    xs = _anchor_points(rng, lo, hi, count)
    us = rng.standard_normal((count, d))
    ratio = np.zeros(count)
    for z, delta in constraints:
        ratio = np.maximum(ratio, eval_against(space, us, z) / delta)
    diam = float(np.linalg.norm(hi - lo))
    free = ratio == 0
    ratio[free] = np.linalg.norm(us[free], axis=1) / diam
    ts = rng.uniform(-1.0, 1.0, count)
    ys = xs + (ts / ratio)[:, None] * us
    keep = np.all((ys >= lo) & (ys <= hi), axis=1)
    hs = ys - xs
    for z, delta in constraints:
        keep &= eval_against(space, hs, z) < delta
    return xs[keep], ys[keep]


def _apply(f, xs: np.ndarray) -> np.ndarray:
    if hasattr(f, "many"):
        return f.many(xs)
    return np.array([f(tuple(p)) for p in xs.tolist()], dtype=float).reshape(len(xs), -1)


def _image_gaps(space: TwoNormSpace, f, xs: np.ndarray, ys: np.ndarray,
                directions: Sequence[Vector]) -> np.ndarray:
    fx, fy = _apply(f, xs), _apply(f, ys)
    with np.errstate(over="ignore", invalid="ignore"):
        diff = fx - fy
        return np.column_stack([eval_against(space, diff, w) for w in directions]) if len(xs) else np.zeros((0, len(directions)))


def probe_u_continuity(space: TwoNormSpace, f, domain_box, epsilon: float, delta_grid: Sequence[float],
                       pair_samples: int, seed: int) -> ProbeReport:
    """Find the largest delta in ``delta_grid`` at which ``f`` looks u-continuous.

    For each delta, sampled pairs with ``||x - y, e_i|| < delta`` for every
    basis vector must satisfy ``||f(x) - f(y), e_i|| < epsilon`` for every
    basis vector. Each delta uses a fresh generator seeded with ``seed`` so
    results are independent of the grid composition.
    """
    _check_map(space, f)
    if pair_samples < 1:
        raise ValueError("pair_samples must be >= 1")
    if not epsilon > 0:
        raise InvalidToleranceError("epsilon must be positive")
    grid = [float(d) for d in delta_grid]
    if not grid or any(d <= 0 for d in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("delta_grid must be non-empty, positive and strictly descending")
    lo, hi = _box(space, domain_box)
    basis = tuple(space.basis)
    results, witnesses = [], []
    for delta in grid:
        rng = np.random.default_rng(seed)
        xs, ys = _sample_pairs(space, lo, hi, [(e, delta) for e in basis], pair_samples, rng)
        if len(xs) == 0:
            results.append({"delta": delta, "status": INCONCLUSIVE, "pairs": 0, "worst_value": None})
            continue
        gaps = _image_gaps(space, f, xs, ys, basis)
        if not np.isfinite(gaps).all():
            results.append({"delta": delta, "status": INCONCLUSIVE, "pairs": len(xs), "worst_value": None})
            continue
        k, j = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
        worst = float(gaps[k, j])
        status = PASS if worst < epsilon else FAIL
        results.append({"delta": delta, "status": status, "pairs": len(xs), "worst_value": worst})
        if status == FAIL:
            witnesses.append(Witness(tuple(xs[k].tolist()), basis[j], worst, None,
                                     f"delta={delta!r}, y={ys[k].tolist()!r}"))
    passing = [r["delta"] for r in results if r["status"] == PASS]
    status = PASS if passing else combine_status([r["status"] for r in results])
    return ProbeReport(
        "u_continuity", status, witnesses,
        {"epsilon": epsilon, "delta_grid": grid, "pair_samples": pair_samples, "seed": seed,
         "box": [lo.tolist(), hi.tolist()], "function": f.label},
        {"delta_results": results, "largest_passing_delta": max(passing) if passing else None},
    )


def probe_uniform_continuity(space: TwoNormSpace, f, domain_box, epsilon: float, w: Vector,
                             delta_list: Sequence[tuple[Vector, float]], pair_samples: int,
                             seed: int) -> ProbeReport:
    """Check a supplied certificate ``{(z_k, delta_k)}`` for uniform continuity at ``(epsilon, w)``.

    Sampled pairs meeting every ``||x - y, z_k|| < delta_k`` must satisfy
    ``||f(x) - f(y), w|| < epsilon``.
    """
    _check_map(space, f)
    if not delta_list:
        raise ValueError("certificate must hold at least one (z, delta) pair")
    constraints = [(tuple(map(float, z)), float(d)) for z, d in delta_list]
    if any(d <= 0 for _, d in constraints):
        raise InvalidToleranceError("certificate deltas must be positive")
    w = tuple(map(float, w))
    lo, hi = _box(space, domain_box)
    rng = np.random.default_rng(seed)
    xs, ys = _sample_pairs(space, lo, hi, constraints, pair_samples, rng)
    params = {"epsilon": epsilon, "w": list(w), "certificate": [[list(z), d] for z, d in constraints],
              "pair_samples": pair_samples, "seed": seed, "box": [lo.tolist(), hi.tolist()],
              "function": f.label}
    if len(xs) == 0:
        return ProbeReport("uniform_continuity", INCONCLUSIVE, [], params, {"pairs": 0})
    gaps = _image_gaps(space, f, xs, ys, [w])[:, 0]
    if not np.isfinite(gaps).all():
        return ProbeReport("uniform_continuity", INCONCLUSIVE, [], params, {"pairs": len(xs)})
    k = int(np.argmax(gaps))
    worst = float(gaps[k])
    status = PASS if worst < epsilon else FAIL
    witnesses = [] if status == PASS else [Witness(tuple(xs[k].tolist()), w, worst, None,
                                                   f"y={ys[k].tolist()!r}")]
    return ProbeReport("uniform_continuity", status, witnesses, params,
                       {"pairs": len(xs), "worst_value": worst})


def probe_ward_compact_image(space: TwoNormSpace, f, seqs_from_E: Sequence[SeqSpec], sched: ToleranceSchedule,
                             bound: float) -> ProbeReport:
    """Does every image sequence ``f(x_n)`` admit an eps-quasi-Cauchy subsequence?

    Raises :class:`BoundViolationError` when an image term exceeds ``bound``.
    """
    _check_map(space, f)
    statuses, witnesses, found = [], [], {}
    for seq in seqs_from_E:
        image = image_sequence(f, seq)
        idx = extract_quasi_cauchy_subsequence(space, image, sched, bound)
        if idx is None:
            statuses.append(FAIL)
            witnesses.append(Witness(sched.start, space.basis[0], math.nan, seq.name,
                                     "no quasi-Cauchy subsequence found in window"))
        else:
            statuses.append(PASS)
            found[seq.name] = {"length": len(idx), "first": idx[0], "last": idx[-1]}
    return ProbeReport("ward_compact_image", combine_status(statuses), witnesses,
                       {**_sched_params(sched), "bound": bound, "function": f.label},
                       {"subsequences": found})
