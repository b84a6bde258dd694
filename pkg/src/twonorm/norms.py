"""2-normed spaces: norm evaluation, derived norms, axiom checks, semi-norms.

Vectors are plain tuples of floats. Three kinds of 2-norm are supported:

* ``det2``  -- ``|x1*y2 - x2*y1|`` on R^2, the parallelogram area. Evaluated
  with an error-free product expansion so the result is correctly rounded.
* ``gram``  -- ``sqrt(<x,x><y,y> - <x,y>^2)`` on R^m. Computed through the
  Lagrange identity as the Euclidean length of all 2x2 minors, which avoids
  the cancellation of the textbook formula and agrees with ``det2`` on R^2.
* ``dsl``   -- any scalar expression over ``x1..xm, y1..ym``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import dsl
from .errors import (DimensionError, InvalidAnchorError, InvalidNormError,
                     InvalidToleranceError)

Vector = tuple[float, ...]

KINDS = ("det2", "gram", "dsl")

# pair (x, y) counts as dependent when s_min < DEPENDENCE_RTOL * (s_max + 1)
DEPENDENCE_RTOL = 1e-9


# ---------------------------------------------------------------------------
# Vector helpers
# ---------------------------------------------------------------------------

def vector(components: Sequence[float]) -> Vector:
    v = tuple(float(c) for c in components)
    if len(v) < 2:
        raise DimensionError(f"vectors need at least 2 components, got {len(v)}")
    if not all(math.isfinite(c) for c in v):
        raise ValueError(f"non-finite vector component in {v!r}")
    return v


def zero(dim: int) -> Vector:
    return (0.0,) * dim


def add(x: Vector, y: Vector) -> Vector:
    return tuple(a + b for a, b in zip(x, y))


def sub(x: Vector, y: Vector) -> Vector:
    return tuple(a - b for a, b in zip(x, y))


def scale(alpha: float, x: Vector) -> Vector:
    return tuple(alpha * a for a in x)


def euclid(x: Vector) -> float:
    return math.hypot(*x)


def standard_basis(dim: int) -> tuple[Vector, ...]:
    return tuple(tuple(1.0 if i == j else 0.0 for j in range(dim)) for i in range(dim))


def are_dependent(x: Vector, y: Vector) -> bool:
    """Numerical linear dependence of a pair.

    Uses the singular values of the column-normalised matrix ``[x/|x|, y/|y|]``
    (closed form from the sine of the angle), so a tiny vector next to a huge
    one is judged by direction, not by scale. A zero vector is dependent with
    everything.
    """
    return _dependent(euclid(x), euclid(y), wedge(x, y))


def _dependent(nx: float, ny: float, area: float) -> bool:
    if nx == 0.0 or ny == 0.0:
        return True
    s = min(1.0, area / (nx * ny))
    c = math.sqrt((1.0 - s) * (1.0 + s))
    s_max = math.sqrt(1.0 + c)
    s_min = s / s_max
    return s_min < DEPENDENCE_RTOL * (s_max + 1.0)


# ---------------------------------------------------------------------------
# Exact 2x2 minors
# ---------------------------------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1


def minor(a1: float, a2: float, b1: float, b2: float) -> float:
    """``a1*b2 - a2*b1`` correctly rounded (barring over/underflow).

    Both products are expanded exactly with Dekker's split and the four
    resulting terms are summed by ``math.fsum``, which rounds once.
    """
    p = a1 * b2
    q = a2 * b1
    c = _SPLITTER * a1
    a1h = c - (c - a1)
    a1l = a1 - a1h
    c = _SPLITTER * b2
    b2h = c - (c - b2)
    b2l = b2 - b2h
    c = _SPLITTER * a2
    a2h = c - (c - a2)
    a2l = a2 - a2h
    c = _SPLITTER * b1
    b1h = c - (c - b1)
    b1l = b1 - b1h
    e = ((a1h * b2h - p) + a1h * b2l + a1l * b2h) + a1l * b2l
    f = ((a2h * b1h - q) + a2h * b1l + a2l * b1h) + a2l * b1l
    return math.fsum((p, -q, e, -f))


def wedge(x: Vector, y: Vector) -> float:
    """Euclidean length of all 2x2 minors of ``[x y]`` (area of the parallelogram)."""
    d = len(x)
    if d == 2:
        return abs(minor(x[0], x[1], y[0], y[1]))
    return math.hypot(*[_accurate_minor(x[i], x[j], y[i], y[j])
                        for i in range(d) for j in range(i + 1, d)])


def _accurate_minor(a1: float, a2: float, b1: float, b2: float) -> float:
    # plain formula when cancellation is mild (relative error below ~2**-42),
    # exact expansion otherwise
    p = a1 * b2
    q = a2 * b1
    m = p - q
    if abs(p) + abs(q) <= 1024.0 * abs(m):
        return m
    return minor(a1, a2, b1, b2)


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoNormSpace:
    dim: int
    kind: str
    basis: tuple[Vector, ...] = ()
    expr: dsl.Ast | None = field(default=None, compare=False)
    expr_text: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown 2-norm kind {self.kind!r}")
        if self.dim < 2:
            raise DimensionError("a 2-normed space needs dimension >= 2")
        if self.kind == "det2" and self.dim != 2:
            raise DimensionError("det2 is only defined on R^2")
        if self.kind == "dsl":
            if self.expr is None:
                if self.expr_text is None:
                    raise ValueError("dsl kind needs an expression")
                object.__setattr__(self, "expr", dsl.parse_text(self.expr_text))
            allowed = {f"x{i}" for i in range(1, self.dim + 1)} | {f"y{i}" for i in range(1, self.dim + 1)}
            unknown = dsl.free_variables(self.expr) - allowed
            if unknown:
                raise ValueError(f"norm expression uses unknown variables {sorted(unknown)}")
            if isinstance(self.expr, dsl.TupleExpr):
                raise ValueError("norm expression must be scalar")
        basis = self.basis or standard_basis(self.dim)
        basis = tuple(vector(b) for b in basis)
        if len(basis) != self.dim or any(len(b) != self.dim for b in basis):
            raise DimensionError(f"basis must hold {self.dim} vectors of dimension {self.dim}")
        s = np.linalg.svd(np.array(basis), compute_uv=False)
        if s[-1] < DEPENDENCE_RTOL * (s[0] + 1.0):
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def det2(cls, basis: Sequence[Sequence[float]] = ()) -> "TwoNormSpace":
        return cls(2, "det2", tuple(map(tuple, basis)))

    @classmethod
    def gram(cls, dim: int, basis: Sequence[Sequence[float]] = ()) -> "TwoNormSpace":
        return cls(dim, "gram", tuple(map(tuple, basis)))

    @classmethod
    def from_dsl(cls, dim: int, text: str, basis: Sequence[Sequence[float]] = ()) -> "TwoNormSpace":
        return cls(dim, "dsl", tuple(map(tuple, basis)), expr_text=text)

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "basis": [list(b) for b in self.basis]}
        if self.expr_text is not None:
            out["expr"] = self.expr_text
        elif self.expr is not None:
            out["expr"] = dsl.to_text(self.expr)
        return out


def _check_dims(space: TwoNormSpace, *vs: Vector) -> None:
    for v in vs:
        if len(v) != space.dim:
            raise DimensionError(f"expected a vector of dimension {space.dim}, got {len(v)}")


def eval_two_norm(space: TwoNormSpace, x: Vector, y: Vector) -> float:
    _check_dims(space, x, y)
    if space.kind == "det2":
        return abs(minor(x[0], x[1], y[0], y[1]))
    if space.kind == "gram":
        return wedge(x, y)
    env = {f"x{i + 1}": v for i, v in enumerate(x)}
    env.update({f"y{i + 1}": v for i, v in enumerate(y)})
    value = dsl.evaluate(space.expr, env)
    if not math.isfinite(value) or value < 0:
        raise InvalidNormError(f"norm expression returned {value!r} for x={x}, y={y}")
    return value


def eval_against(space: TwoNormSpace, xs: np.ndarray, y: Vector) -> np.ndarray:
    """Vectorised ``eval_two_norm(space, row, y)`` for every row of ``xs``.

    Built-in kinds use the plain floating formula (not the correctly rounded
    one); results are symmetric under ``row -> -row`` bit for bit.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != space.dim:
        raise DimensionError(f"expected an (n, {space.dim}) array")
    _check_dims(space, y)
    if space.kind == "det2":
        return np.abs(xs[:, 0] * y[1] - xs[:, 1] * y[0])
    if space.kind == "gram":
        d = space.dim
        total = np.zeros(len(xs))
        for i in range(d):
            for j in range(i + 1, d):
                m = xs[:, i] * y[j] - xs[:, j] * y[i]
                total += m * m
        return np.sqrt(total)
    return np.array([eval_two_norm(space, tuple(row), y) for row in xs.tolist()])


# ---------------------------------------------------------------------------
# Derived norms and semi-norms
# ---------------------------------------------------------------------------

def eval_sum_norm(space: TwoNormSpace, y0: Vector, z0: Vector, x: Vector) -> float:
    """The norm ``||x, y0|| + ||x, z0||`` for an independent anchor pair."""
    anchor = eval_two_norm(space, y0, z0)
    if anchor <= DEPENDENCE_RTOL * (1.0 + euclid(y0) * euclid(z0)):
        raise InvalidAnchorError(f"anchors {y0} and {z0} are linearly dependent")
    return eval_two_norm(space, x, y0) + eval_two_norm(space, x, z0)


def eval_max_basis_norm(space: TwoNormSpace, x: Vector) -> float:
    return max(eval_two_norm(space, x, e) for e in space.basis)


def eval_seminorm(space: TwoNormSpace, z: Vector, x: Vector) -> float:
    return eval_two_norm(space, x, z)


def in_neighborhood(space: TwoNormSpace, x: Vector, center: Vector,
                    constraints: Sequence[tuple[Vector, float]]) -> bool:
    """Membership of ``x`` in ``center + (U_{z1,e1} ∩ ... ∩ U_{zk,ek})``."""
    if not constraints:
        raise ValueError("a basic neighbourhood needs at least one (z, eps) constraint")
    for _, eps in constraints:
        if not eps > 0:
            raise InvalidToleranceError(f"neighbourhood radius must be positive, got {eps!r}")
    offset = sub(x, center)
    return all(eval_seminorm(space, z, offset) < eps for z, eps in constraints)


def coordinates(space: TwoNormSpace, z: Vector) -> Vector:
    """Coefficients ``c`` with ``z = sum(c_i * basis_i)``."""
    _check_dims(space, z)
    return tuple(np.linalg.solve(np.array(space.basis).T, np.array(z)).tolist())


# ---------------------------------------------------------------------------
# Axiom checking
# ---------------------------------------------------------------------------

AXIOMS = ("dependence", "symmetry", "homogeneity", "triangle")

_SPECIAL = (0.0, 1.0, -1.0)


def _sample_scalars(rng: np.random.Generator, size) -> np.ndarray:
    mags = 10.0 ** rng.uniform(-3.0, 3.0, size)
    vals = mags * rng.choice((-1.0, 1.0), size)
    special = rng.random(size) < 0.15
    vals[special] = rng.choice(_SPECIAL, int(special.sum()))
    return vals


def axiom_samples(dim: int, num_samples: int, seed: int) -> Iterator[tuple[Vector, Vector, Vector, float]]:
    """Reproducible stream of ``(x, y, z, alpha)`` test inputs.

    Components are log-uniform in [1e-3, 1e3] with random sign; about 15% are
    replaced by one of 0, 1, -1 so that zero vectors and exactly dependent
    pairs occur.
    """
    rng = np.random.default_rng(seed)
    vecs = _sample_scalars(rng, (num_samples, 3, dim)).tolist()
    alphas = _sample_scalars(rng, num_samples).tolist()
    for (x, y, z), alpha in zip(vecs, alphas):
        yield tuple(x), tuple(y), tuple(z), alpha


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    worst_violation: float
    witness: tuple[Vector, Vector, Vector, float] | None = None
    witness_value: float | None = None


@dataclass(frozen=True)
class AxiomReport:
    checks: tuple[AxiomCheck, ...]
    samples_tested: int
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_violation(self) -> float:
        return max(c.worst_violation for c in self.checks)

    def __getitem__(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "samples_tested": self.samples_tested,
            "tol": self.tol,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "axioms": [
                {
                    "name": c.name,
                    "status": "pass" if c.passed else "fail",
                    "worst_violation": c.worst_violation,
                    "witness": None if c.witness is None else {
                        "x": list(c.witness[0]), "y": list(c.witness[1]),
                        "z": list(c.witness[2]), "alpha": c.witness[3],
                    },
                    "witness_value": c.witness_value,
                }
                for c in self.checks
            ],
        }


def axiom_violations(space: TwoNormSpace, x: Vector, y: Vector, z: Vector, alpha: float,
                     tol: float) -> dict[str, tuple[float, float]]:
    """Relative violation of each axiom on one input, with the offending norm value and pair.

    Dependence is checked on ``(x, y)``, on the planted dependent pair
    ``(x, alpha*x)`` and on ``(x, 0)``, with norm values measured relative to
    ``|x||y|`` (the largest area the pair can span). A dependent pair violates
    by its relative norm; an independent pair whose relative norm is within
    ``tol`` of zero violates by 1.
    """
    n = lambda a, b: eval_two_norm(space, a, b)  # noqa: E731
    builtin = space.kind in ("det2", "gram")
    worst_dep = (0.0, 0.0, (x, y))
    for a, b in ((x, y), (x, scale(alpha, x)), (x, zero(space.dim))):
        value = n(a, b)
        na, nb = euclid(a), euclid(b)
        size = na * nb
        area = value if builtin else wedge(a, b)
        if _dependent(na, nb, area):
            v = value / size if size > 0 else value
        else:
            v = 1.0 if value <= tol * size else 0.0
        if v > worst_dep[0]:
            worst_dep = (v, value, (a, b))

    nxy, nyx = n(x, y), n(y, x)
    sym = abs(nxy - nyx) / (1.0 + max(nxy, nyx))

    lhs, rhs = n(scale(alpha, x), y), abs(alpha) * nxy
    hom = abs(lhs - rhs) / (1.0 + max(lhs, rhs))

    nyz, nxz = n(x, add(y, z)), n(x, z)
    tri = max(0.0, nyz - (nxy + nxz)) / (1.0 + max(nyz, nxy + nxz))

    return {
        "dependence": worst_dep,
        "symmetry": (sym, nxy, (x, y)),
        "homogeneity": (hom, lhs, (x, y)),
        "triangle": (tri, nyz, (x, y)),
    }


def check_axioms(space: TwoNormSpace, num_samples: int, seed: int, tol: float = 1e-9,
                 extra_samples: Sequence[tuple[Vector, Vector, Vector, float]] = ()) -> AxiomReport:
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if not tol > 0:
        raise InvalidToleranceError(f"tol must be positive, got {tol!r}")
    worst = {name: (0.0, None, None) for name in AXIOMS}
    count = 0
    samples = list(extra_samples) + list(axiom_samples(space.dim, num_samples, seed))
    for x, y, z, alpha in samples:
        _check_dims(space, x, y, z)
        count += 1
        for name, (v, value, (a, b)) in axiom_violations(space, x, y, z, alpha, tol).items():
            if v > worst[name][0]:
                worst[name] = (v, (a, b, z, alpha), value)
    checks = tuple(
        AxiomCheck(name, worst[name][0] <= tol, worst[name][0], worst[name][1], worst[name][2])
        for name in AXIOMS
    )
    return AxiomReport(checks, count, tol)
