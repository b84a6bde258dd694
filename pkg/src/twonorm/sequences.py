"""Sequences of vectors and finite-window convergence classifiers.

Limits are replaced by window verdicts: a sequence is *epsilon-quasi-Cauchy on
[N, M]* when ``||x_{n+1} - x_n, e_i|| < epsilon`` for every n in the window and
every basis vector e_i. Checking the basis suffices because for
``z = sum(c_i e_i)`` the axioms give ``||x, z|| <= sum(|c_i| ||x, e_i||)``.

All window scans go through :func:`_direction_values`, so the same difference
vector always produces the same float whichever classifier computed it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import dsl
from .errors import BoundViolationError, DimensionError, InvalidToleranceError
from .norms import TwoNormSpace, Vector, eval_against, eval_max_basis_norm, sub, vector

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

DEFAULT_WINDOW = (1000, 2000)
DEFAULT_EPSILON = 1e-2

# bisection depth cap of the subsequence extractor
MAX_SPLITS = 64

# pair differences evaluated per block in the Cauchy scan
_CAUCHY_BLOCK = 1 << 16


# ---------------------------------------------------------------------------
# Schedules and verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToleranceSchedule:
    start: int = DEFAULT_WINDOW[0]
    end: int = DEFAULT_WINDOW[1]
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.start < 1:
            raise InvalidToleranceError(f"window must start at n >= 1, got {self.start}")
        if self.end - self.start < 10:
            raise InvalidToleranceError(
                f"window [{self.start}, {self.end}] is too short (need end - start >= 10)")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidToleranceError(f"epsilon must be positive, got {self.epsilon!r}")

    def with_epsilon(self, epsilon: float) -> "ToleranceSchedule":
        return ToleranceSchedule(self.start, self.end, epsilon)

    def doubled(self) -> "ToleranceSchedule":
        """Window of an interleaved sequence: odd indices 2k-1 for k in [N, M]."""
        return ToleranceSchedule(2 * self.start - 1, 2 * self.end, self.epsilon)

    @property
    def window(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class SeqVerdict:
    kind: str  # quasi_cauchy | cauchy | convergent
    status: str
    worst_value: float
    witness_index: int
    witness_direction: Vector
    epsilon: float
    window: tuple[int, int]
    witness_partner: int | None = None
    trace: tuple[tuple[int, tuple[float, ...]], ...] | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "status": self.status,
            "worst_value": self.worst_value,
            "witness_index": self.witness_index,
            "witness_direction": list(self.witness_direction),
            "epsilon": self.epsilon,
            "window": list(self.window),
        }
        if self.witness_partner is not None:
            out["witness_partner"] = self.witness_partner
        return out


# ---------------------------------------------------------------------------
# Sequence definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DslSource:
    expr: dsl.Ast

    def at(self, n: int) -> Vector:
        value = dsl.evaluate(self.expr, {"n": float(n)})
        return value

    def describe(self) -> str:
        return dsl.to_text(self.expr)


@dataclass(frozen=True)
class ListSource:
    items: tuple[Vector, ...]

    def at(self, n: int) -> Vector:
        if not 1 <= n <= len(self.items):
            raise ValueError(f"explicit sequence has {len(self.items)} terms, index {n} requested")
        return self.items[n - 1]

    def describe(self) -> str:
        return "[" + ", ".join("(" + ", ".join(repr(c) for c in v) + ")" for v in self.items) + "]"


@dataclass(frozen=True)
class Interleave:
    """``xi_{2k-1} = x_k``, ``xi_{2k} = x0``."""
    base: "SeqSpec"
    x0: Vector

    def at(self, n: int) -> Vector:
        if n % 2 == 0:
            return self.x0
        return self.base.term((n + 1) // 2)

    def describe(self) -> str:
        return f"interleave({self.base.describe()}, {self.x0!r})"


@dataclass(frozen=True)
class Mapped:
    """Image sequence ``n -> fn(base_n)``."""
    base: "SeqSpec"
    fn: Callable[[Vector], Vector]
    label: str = "f"

    def at(self, n: int) -> Vector:
        return tuple(self.fn(self.base.term(n)))

    def describe(self) -> str:
        return f"{self.label}({self.base.describe()})"


@dataclass(frozen=True)
class SeqSpec:
    source: DslSource | ListSource | Interleave | Mapped
    dim: int
    index_map: dsl.Ast | None = None
    label: str = ""

    @classmethod
    def from_text(cls, text: str, index_map: str | None = None, label: str = "") -> "SeqSpec":
        ast = dsl.parse_text(text)
        if not isinstance(ast, dsl.TupleExpr):
            raise DimensionError(f"sequence expression must be a tuple, got {text!r}")
        unknown = dsl.free_variables(ast) - {"n"}
        if unknown:
            raise ValueError(f"sequence expression may only use n, found {sorted(unknown)}")
        imap = dsl.parse_text(index_map) if index_map is not None else None
        if imap is not None and isinstance(imap, dsl.TupleExpr):
            raise ValueError("index map must be scalar")
        return cls(DslSource(ast), len(ast.items), imap, label)

    @classmethod
    def from_terms(cls, terms: Sequence[Sequence[float]], label: str = "") -> "SeqSpec":
        items = tuple(vector(t) for t in terms)
        if not items:
            raise ValueError("explicit sequence needs at least one term")
        dims = {len(t) for t in items}
        if len(dims) != 1:
            raise DimensionError("explicit sequence terms differ in dimension")
        return cls(ListSource(items), dims.pop(), None, label)

    def subsequence(self, index_map: str) -> "SeqSpec":
        return SeqSpec(self.source, self.dim, dsl.parse_text(index_map), self.label)

    def index(self, n: int) -> int:
        if self.index_map is None:
            return n
        k = dsl.evaluate(self.index_map, {"n": float(n)})
        if not (math.isfinite(k) and float(k).is_integer() and k >= 1):
            raise ValueError(f"index map gives {k!r} at n={n}; need a positive integer")
        return int(k)

    def term(self, n: int) -> Vector:
        value = self.source.at(self.index(n))
        if len(value) != self.dim:
            raise DimensionError(f"term {n} has dimension {len(value)}, expected {self.dim}")
        return value

    def terms(self, lo: int, hi: int) -> np.ndarray:
        """Terms ``x_lo .. x_hi`` (inclusive) as a read-only ``(hi-lo+1, dim)`` array."""
        return _terms(self, lo, hi)

    def describe(self) -> str:
        text = self.source.describe()
        if self.index_map is not None:
            text += f" @ n -> {dsl.to_text(self.index_map)}"
        return text

    @property
    def name(self) -> str:
        return self.label or self.describe()


@lru_cache(maxsize=512)
def _terms(seq: SeqSpec, lo: int, hi: int) -> np.ndarray:
    idx = list(range(lo, hi + 1))
    if seq.index_map is not None:
        idx = [seq.index(n) for n in idx]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"index map of {seq.name!r} is not strictly increasing on [{lo}, {hi}]")
    src = seq.source
    with np.errstate(over="ignore", invalid="ignore"):
        if isinstance(src, DslSource):
            arr = dsl.evaluate_array(src.expr, {"n": np.array(idx, dtype=float)})
        elif isinstance(src, Mapped) and hasattr(src.fn, "many") and seq.index_map is None:
            arr = np.asarray(src.fn.many(src.base.terms(lo, hi)), dtype=float)
        else:
            arr = np.array([seq.term(n) for n in range(lo, hi + 1)], dtype=float)
        arr = arr.reshape(len(idx), seq.dim)
    arr.setflags(write=False)
    return arr


def delta(seq: SeqSpec, n: int) -> Vector:
    """Forward difference ``x_{n+1} - x_n``."""
    if n < 1:
        raise ValueError("delta is defined for n >= 1")
    return sub(seq.term(n + 1), seq.term(n))


def interleave(seq: SeqSpec, x0: Sequence[float]) -> SeqSpec:
    x0 = tuple(float(c) for c in x0)
    if len(x0) != seq.dim:
        raise DimensionError("interleave point has the wrong dimension")
    return SeqSpec(Interleave(seq, x0), seq.dim, None, f"interleave({seq.name})")


def map_sequence(seq: SeqSpec, fn: Callable[[Vector], Vector], dim: int, label: str = "f") -> SeqSpec:
    return SeqSpec(Mapped(seq, fn, label), dim, None, f"{label}({seq.name})")


# ---------------------------------------------------------------------------
# Window classifiers
# ---------------------------------------------------------------------------

def _direction_values(space: TwoNormSpace, diffs: np.ndarray, directions: Sequence[Vector]) -> np.ndarray:
    """``values[k, j] = ||diffs[k], directions[j]||``."""
    with np.errstate(over="ignore", invalid="ignore"):
        return np.column_stack([eval_against(space, diffs, d) for d in directions])


def _resolve_directions(space: TwoNormSpace, seq: SeqSpec, directions) -> tuple[Vector, ...]:
    if seq.dim != space.dim:
        raise DimensionError(f"sequence dimension {seq.dim} does not match space dimension {space.dim}")
    return tuple(space.basis) if directions is None else tuple(tuple(map(float, d)) for d in directions)


def _verdict(kind: str, values: np.ndarray, indices: np.ndarray, directions, sched,
             trace: bool, partners: np.ndarray | None = None) -> SeqVerdict:
    finite = np.isfinite(values)
    if not finite.all():
        k, j = np.argwhere(~finite)[0]
        status, worst, k, j = INCONCLUSIVE, math.inf, int(k), int(j)
    else:
        k, j = np.unravel_index(int(np.argmax(values)), values.shape)
        worst = float(values[k, j])
        status = PASS if worst < sched.epsilon else FAIL
    rows = None
    if trace:
        rows = tuple((int(n), tuple(float(v) for v in row)) for n, row in zip(indices, values))
    return SeqVerdict(
        kind=kind, status=status, worst_value=worst, witness_index=int(indices[k]),
        witness_direction=tuple(directions[j]), epsilon=sched.epsilon, window=sched.window,
        witness_partner=None if partners is None else int(partners[k, j]), trace=rows,
    )


def classify_quasi_cauchy(space: TwoNormSpace, seq: SeqSpec, sched: ToleranceSchedule,
                          directions: Sequence[Vector] | None = None, trace: bool = False) -> SeqVerdict:
    """Pass iff ``||x_{n+1} - x_n, d|| < eps`` for n in [N, M] and every direction d."""
    dirs = _resolve_directions(space, seq, directions)
    xs = seq.terms(sched.start, sched.end + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        diffs = xs[1:] - xs[:-1]
    values = _direction_values(space, diffs, dirs)
    return _verdict("quasi_cauchy", values, np.arange(sched.start, sched.end + 1), dirs, sched, trace)


def classify_convergent(space: TwoNormSpace, seq: SeqSpec, limit: Sequence[float], sched: ToleranceSchedule,
                        directions: Sequence[Vector] | None = None, trace: bool = False) -> SeqVerdict:
    """Pass iff ``||x_n - limit, d|| < eps`` for n in [N, M] and every direction d."""
    dirs = _resolve_directions(space, seq, directions)
    limit = np.asarray(limit, dtype=float)
    if limit.shape != (space.dim,):
        raise DimensionError("limit has the wrong dimension")
    xs = seq.terms(sched.start, sched.end)
    with np.errstate(over="ignore", invalid="ignore"):
        diffs = xs - limit
    values = _direction_values(space, diffs, dirs)
    return _verdict("convergent", values, np.arange(sched.start, sched.end + 1), dirs, sched, trace)


def classify_cauchy(space: TwoNormSpace, seq: SeqSpec, sched: ToleranceSchedule,
                    directions: Sequence[Vector] | None = None, trace: bool = False) -> SeqVerdict:
    """Pass iff ``||x_m - x_n, d|| < eps`` for all N <= n < m <= M and every direction d.

    Quadratic in the window length. Row n of the result holds the maximum over
    m > n; the witness partner is the maximising m.
    """
    dirs = _resolve_directions(space, seq, directions)
    xs = seq.terms(sched.start, sched.end)
    count, dim = xs.shape
    best = np.zeros((count - 1, len(dirs)))
    partner = np.zeros((count - 1, len(dirs)), dtype=np.int64)
    block = max(1, _CAUCHY_BLOCK // count)
    cols = np.arange(count)
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, count - 1, block):
            hi = min(lo + block, count - 1)
            rest = xs[lo + 1:]
            diffs = rest[None, :, :] - xs[lo:hi, None, :]
            vals = _direction_values(space, diffs.reshape(-1, dim), dirs).reshape(hi - lo, len(rest), len(dirs))
            vals[~np.isfinite(vals)] = np.inf
            # only partners m > n count
            earlier = cols[lo + 1:][None, :] <= np.arange(lo, hi)[:, None]
            vals[earlier] = -np.inf
            arg = np.argmax(vals, axis=1)
            best[lo:hi] = np.take_along_axis(vals, arg[:, None, :], axis=1)[:, 0, :]
            partner[lo:hi] = arg + lo + 1 + sched.start
    return _verdict("cauchy", best, np.arange(sched.start, sched.end), dirs, sched, trace, partner)


# ---------------------------------------------------------------------------
# Subsequence extraction
# ---------------------------------------------------------------------------

def _consecutive_ok(space: TwoNormSpace, pts: np.ndarray, epsilon: float) -> bool:
    if len(pts) < 2:
        return True
    values = _direction_values(space, pts[1:] - pts[:-1], space.basis)
    return bool(np.all(values < epsilon))


def extract_quasi_cauchy_subsequence(space: TwoNormSpace, seq: SeqSpec, sched: ToleranceSchedule,
                                     bound: float) -> list[int] | None:
    """Find indices in the window whose terms form an eps-quasi-Cauchy run.

    Bolzano-Weierstrass by bisection: the bounding box of the remaining terms
    is halved along its widest coordinate and the half holding more terms is
    kept (the lower half on ties), until consecutive kept terms are within
    eps in every basis direction. Returns ``None`` when fewer than two terms
    remain or the split budget runs out.
    """
    if seq.dim != space.dim:
        raise DimensionError("sequence and space dimensions differ")
    xs = seq.terms(sched.start, sched.end)
    if not np.isfinite(xs).all():
        raise BoundViolationError(f"{seq.name!r} has non-finite terms in the window")
    for n, row in zip(range(sched.start, sched.end + 1), xs.tolist()):
        size = eval_max_basis_norm(space, tuple(row))
        if size > bound:
            raise BoundViolationError(f"term {n} of {seq.name!r} has max-basis norm {size!r} > bound {bound!r}")

    idx = np.arange(sched.start, sched.end + 1)
    lo = xs.min(axis=0)
    hi = xs.max(axis=0)
    for _ in range(MAX_SPLITS + 1):
        if len(idx) < 2:
            return None
        pts = xs[idx - sched.start]
        if _consecutive_ok(space, pts, sched.epsilon):
            return idx.tolist()
        axis = int(np.argmax(hi - lo))
        mid = 0.5 * (lo[axis] + hi[axis])
        lower = pts[:, axis] <= mid
        if lower.sum() >= (~lower).sum():
            idx, hi = idx[lower], hi.copy()
            hi[axis] = mid
        else:
            idx, lo = idx[~lower], lo.copy()
            lo[axis] = mid
    return None
