import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from twonorm import norms
from twonorm.errors import DimensionError, InvalidAnchorError, InvalidNormError, InvalidToleranceError
from twonorm.norms import TwoNormSpace, eval_two_norm

DET2 = TwoNormSpace.det2()


def det_oracle(x, y) -> float:
    """|x1*y2 - x2*y1| in exact rational arithmetic, rounded once."""
    return float(abs(Fraction(x[0]) * Fraction(y[1]) - Fraction(x[1]) * Fraction(y[0])))


def gram_oracle(x, y) -> float:
    """sqrt(det([[<x,x>, <x,y>], [<y,x>, <y,y>]])) via numpy in extended precision."""
    m = np.array([x, y], dtype=np.longdouble)
    g = m @ m.T
    return float(np.sqrt(max(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0], 0)))


reals = st.floats(-1e6, 1e6, allow_nan=False)


def vecs(dim):
    return st.lists(reals, min_size=dim, max_size=dim).map(tuple)


# -- evaluators against oracles -----------------------------------------------

def test_det2_matches_rational_oracle_on_hard_cancellation():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        x = tuple(rng.uniform(-1, 1, 2))
        y = tuple(np.array(x) * (1 + rng.uniform(-1e-12, 1e-12)))
        assert eval_two_norm(DET2, x, y) == det_oracle(x, y)


@given(vecs(2), vecs(2))
def test_det2_property_matches_oracle(x, y):
    assert eval_two_norm(DET2, x, y) == det_oracle(x, y)


@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_gram_matches_determinant_oracle(dim):
    space = TwoNormSpace.gram(dim)
    rng = np.random.default_rng(dim)
    for _ in range(500):
        x, y = rng.normal(size=(2, dim)) * 10.0 ** rng.uniform(-3, 3)
        got = eval_two_norm(space, tuple(x), tuple(y))
        want = gram_oracle(x, y)
        scale = np.linalg.norm(x) * np.linalg.norm(y)
        assert abs(got - want) <= 1e-6 * scale + 1e-300


def test_gram_in_dim_two_equals_det2():
    g = TwoNormSpace.gram(2)
    rng = np.random.default_rng(3)
    for x, y in rng.normal(size=(200, 2, 2)):
        assert eval_two_norm(g, tuple(x), tuple(y)) == eval_two_norm(DET2, tuple(x), tuple(y))


def test_dsl_norm_evaluates_expression():
    space = TwoNormSpace.from_dsl(2, "abs(x1*y2 - x2*y1)")
    assert eval_two_norm(space, (1.0, 1.0), (1.0, 2.0)) == 1.0


def test_dsl_norm_rejects_negative_values():
    space = TwoNormSpace.from_dsl(2, "x1*y2 - x2*y1")
    with pytest.raises(InvalidNormError):
        eval_two_norm(space, (0.0, 1.0), (1.0, 0.0))


def test_eval_against_matches_scalar():
    rng = np.random.default_rng(1)
    xs = rng.normal(size=(100, 3))
    space = TwoNormSpace.gram(3)
    y = (0.5, -2.0, 1.0)
    got = norms.eval_against(space, xs, y)
    want = [eval_two_norm(space, tuple(r), y) for r in xs]
    assert np.allclose(got, want, rtol=1e-12, atol=0)
    assert np.array_equal(norms.eval_against(space, -xs, y), got)


# -- construction errors ------------------------------------------------------

def test_space_validation():
    with pytest.raises(DimensionError):
        TwoNormSpace.gram(1)
    with pytest.raises(DimensionError):
        TwoNormSpace(3, "det2")
    with pytest.raises(ValueError):
        TwoNormSpace.det2(basis=[(1, 2), (2, 4)])
    with pytest.raises(ValueError):
        TwoNormSpace.from_dsl(2, "abs(x1*z2)")
    with pytest.raises(DimensionError):
        eval_two_norm(DET2, (1.0, 2.0, 3.0), (1.0, 0.0))


# -- axioms -------------------------------------------------------------------

@pytest.mark.parametrize("space", [DET2] + [TwoNormSpace.gram(d) for d in (2, 3, 4, 5)],
                         ids=lambda s: f"{s.kind}{s.dim}")
def test_builtin_norms_pass_axioms(space):
    report = norms.check_axioms(space, 2000, seed=11)
    assert report.passed, report.to_dict()
    assert report.worst_violation < 1e-9


def test_planted_bad_norm_fails_dependence_with_witness():
    bad = TwoNormSpace.from_dsl(2, "abs(x1*y2 + x2*y1)")
    report = norms.check_axioms(bad, 1000, seed=11)
    dep = report["dependence"]
    assert not dep.passed
    x, y = dep.witness[0], dep.witness[1]
    assert norms.are_dependent(x, y)
    assert eval_two_norm(bad, x, y) == dep.witness_value > 0


def test_axiom_report_is_seed_reproducible():
    a = norms.check_axioms(TwoNormSpace.gram(3), 500, seed=5).to_dict()
    b = norms.check_axioms(TwoNormSpace.gram(3), 500, seed=5).to_dict()
    assert a == b


def test_bad_tolerance_rejected():
    with pytest.raises(InvalidToleranceError):
        norms.check_axioms(DET2, 10, seed=0, tol=0.0)


@given(vecs(3), vecs(3), st.floats(-1e3, 1e3, allow_nan=False))
def test_gram_axioms_property(x, y, alpha):
    space = TwoNormSpace.gram(3)
    nxy = eval_two_norm(space, x, y)
    assert nxy >= 0
    assert nxy == eval_two_norm(space, y, x)
    ax = norms.scale(alpha, x)
    lhs = eval_two_norm(space, ax, y)
    # rounding in alpha*x tilts it by ~1 ulp, so compare at the |alpha x||y| scale;
    # the absolute floor covers subnormal products where the relative bound underflows
    floor = 4 * math.ulp(0.0)
    assert abs(lhs - abs(alpha) * nxy) <= 1e-12 * norms.euclid(ax) * norms.euclid(y) + floor
    assert eval_two_norm(space, x, norms.scale(alpha, x)) <= 1e-12 * abs(alpha) * norms.euclid(x) ** 2 + floor


@given(vecs(3), vecs(3), vecs(3))
def test_gram_triangle_property(x, y, z):
    space = TwoNormSpace.gram(3)
    lhs = eval_two_norm(space, x, norms.add(y, z))
    rhs = eval_two_norm(space, x, y) + eval_two_norm(space, x, z)
    scale = norms.euclid(x) * (norms.euclid(y) + norms.euclid(z))
    assert lhs <= rhs + 1e-12 * scale + 4 * math.ulp(0.0)


@given(vecs(2), vecs(2), st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=2))
def test_basis_domination_property(x, b, coeffs):
    # ||x, sum c_i e_i|| <= sum |c_i| ||x, e_i|| for a non-standard basis
    assume(abs(b[1]) > 1e-3 * (1 + norms.euclid(b)))
    space = TwoNormSpace.det2(basis=[(1.0, 0.0), b])
    z = norms.add(norms.scale(coeffs[0], space.basis[0]), norms.scale(coeffs[1], space.basis[1]))
    lhs = eval_two_norm(space, x, z)
    rhs = sum(abs(c) * eval_two_norm(space, x, e) for c, e in zip(coeffs, space.basis))
    assert lhs <= rhs + 1e-9 * (1 + rhs + norms.euclid(x) * norms.euclid(z))


# -- derived norms ------------------------------------------------------------

def test_seminorm_vanishes_on_multiples():
    z = (2.0, -3.0)
    assert norms.eval_seminorm(DET2, z, norms.scale(7.5, z)) == 0.0
    assert norms.eval_seminorm(DET2, z, (1.0, 0.0)) == 3.0


def test_sum_norm_needs_independent_anchors():
    assert norms.eval_sum_norm(DET2, (1.0, 0.0), (0.0, 1.0), (3.0, -4.0)) == 7.0
    with pytest.raises(InvalidAnchorError):
        norms.eval_sum_norm(DET2, (1.0, 2.0), (2.0, 4.0), (1.0, 1.0))


def test_max_basis_norm():
    assert norms.eval_max_basis_norm(DET2, (3.0, -4.0)) == 4.0


def test_neighborhood_membership():
    constraints = [((1.0, 0.0), 0.5), ((0.0, 1.0), 0.5)]
    assert norms.in_neighborhood(DET2, (1.2, 0.9), (1.0, 1.0), constraints)
    assert not norms.in_neighborhood(DET2, (1.0, 2.0), (1.0, 1.0), constraints)
    with pytest.raises(ValueError):
        norms.in_neighborhood(DET2, (0.0, 0.0), (0.0, 0.0), [])
    with pytest.raises(InvalidToleranceError):
        norms.in_neighborhood(DET2, (0.0, 0.0), (0.0, 0.0), [((1.0, 0.0), 0.0)])


def test_coordinates_recover_combination():
    space = TwoNormSpace.gram(3, basis=[(1, 1, 0), (0, 1, 1), (1, 0, 1)])
    c = norms.coordinates(space, (2.0, 3.0, 1.0))
    z = [sum(ci * b[k] for ci, b in zip(c, space.basis)) for k in range(3)]
    assert np.allclose(z, (2.0, 3.0, 1.0))
