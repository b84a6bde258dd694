import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twonorm import norms
from twonorm.errors import BoundViolationError, DimensionError, InvalidToleranceError
from twonorm.norms import TwoNormSpace
from twonorm.sequences import (FAIL, PASS, SeqSpec, ToleranceSchedule, classify_cauchy, classify_convergent,
                               classify_quasi_cauchy, delta, extract_quasi_cauchy_subsequence, interleave)

DET2 = TwoNormSpace.det2()
BASIS = ((1.0, 0.0), (0.0, 1.0))


def area(u, v):
    return abs(u[0] * v[1] - u[1] * v[0])


def brute_qc_worst(terms):
    """max over consecutive pairs and basis directions, by plain loops."""
    worst = 0.0
    for a, b in zip(terms, terms[1:]):
        d = (b[0] - a[0], b[1] - a[1])
        worst = max(worst, *(area(d, e) for e in BASIS))
    return worst


def brute_cauchy_worst(terms):
    worst = 0.0
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            d = (terms[j][0] - terms[i][0], terms[j][1] - terms[i][1])
            worst = max(worst, *(area(d, e) for e in BASIS))
    return worst


# -- golden windows -----------------------------------------------------------

def test_sqrt_sequence_quasi_cauchy_on_late_window():
    seq = SeqSpec.from_text("(sqrt(n), sqrt(n))")
    v = classify_quasi_cauchy(DET2, seq, ToleranceSchedule(2501, 5000, 0.01))
    assert v.status == PASS
    # sqrt(n+1) - sqrt(n) < 1/(2 sqrt(n)) = 0.01 at n = 2500
    assert v.worst_value == pytest.approx(math.sqrt(2502) - math.sqrt(2501), rel=1e-12)


def test_sqrt_sequence_is_not_cauchy():
    seq = SeqSpec.from_text("(sqrt(n), sqrt(n))")
    v = classify_cauchy(DET2, seq, ToleranceSchedule(2501, 5000, 0.01))
    assert v.status == FAIL
    assert v.witness_index == 2501 and v.witness_partner == 5000


@pytest.mark.parametrize("window", [(1, 20), (100, 300), (5000, 5100)])
def test_square_index_subsequence_has_unit_steps(window):
    seq = SeqSpec.from_text("(sqrt(n), sqrt(n))", index_map="n^2")
    v = classify_quasi_cauchy(DET2, seq, ToleranceSchedule(*window, 0.5))
    assert v.status == FAIL
    assert v.worst_value == 1.0
    assert v.witness_index == window[0]


def test_convergent_to_point():
    seq = SeqSpec.from_text("(1 + 1/n, 2 - 1/n)")
    sched = ToleranceSchedule(100, 400, 0.011)
    assert classify_convergent(DET2, seq, (1.0, 2.0), sched).status == PASS
    v = classify_convergent(DET2, seq, (1.0, 2.1), sched)
    assert v.status == FAIL and v.witness_direction == (1.0, 0.0)


# -- oracles ------------------------------------------------------------------

SEQS = ["(sin(n), cos(n))", "(sqrt(n), 1/n)", "(n^0.3, -n^0.2)", "(sin(sqrt(n)), n/(n + 1))"]


@pytest.mark.parametrize("text", SEQS)
def test_quasi_cauchy_matches_loop_oracle(text):
    seq = SeqSpec.from_text(text)
    sched = ToleranceSchedule(10, 300, 0.05)
    terms = [seq.term(n) for n in range(10, 302)]
    v = classify_quasi_cauchy(DET2, seq, sched)
    assert v.worst_value == brute_qc_worst(terms)
    assert v.status == (PASS if v.worst_value < 0.05 else FAIL)


@pytest.mark.parametrize("text", SEQS)
def test_cauchy_matches_loop_oracle(text):
    seq = SeqSpec.from_text(text)
    sched = ToleranceSchedule(10, 150, 0.05)
    terms = [seq.term(n) for n in range(10, 151)]
    v = classify_cauchy(DET2, seq, sched)
    assert v.worst_value == brute_cauchy_worst(terms)


def test_cauchy_blocks_cover_long_windows():
    # long enough that the scan is split into several blocks
    seq = SeqSpec.from_text("(1/n, sin(n)/n)")
    sched = ToleranceSchedule(1, 800, 0.5)
    terms = [seq.term(n) for n in range(1, 801)]
    assert classify_cauchy(DET2, seq, sched).worst_value == brute_cauchy_worst(terms)


def test_vectorised_terms_match_scalar_terms():
    seq = SeqSpec.from_text("(sin(n^0.25), cos(n^0.25))")
    arr = seq.terms(1, 2000)
    assert all(tuple(arr[n - 1]) == seq.term(n) for n in range(1, 2001))


def test_custom_directions_and_gram_space():
    space = TwoNormSpace.gram(3)
    seq = SeqSpec.from_text("(n, 0, 0)")
    v = classify_quasi_cauchy(space, seq, ToleranceSchedule(1, 20, 0.5), directions=[(1.0, 0.0, 0.0)])
    assert v.status == PASS and v.worst_value == 0.0
    v = classify_quasi_cauchy(space, seq, ToleranceSchedule(1, 20, 0.5))
    assert v.status == FAIL and v.worst_value == 1.0


# -- invariants ---------------------------------------------------------------

terms_st = st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=14, max_size=60)


@given(terms_st, st.floats(0.01, 50))
def test_cauchy_pass_implies_quasi_cauchy_pass(terms, eps):
    seq = SeqSpec.from_terms(terms)
    n = len(terms)
    cauchy = classify_cauchy(DET2, seq, ToleranceSchedule(1, n, eps))
    qc = classify_quasi_cauchy(DET2, seq, ToleranceSchedule(1, n - 1, eps))
    assert qc.worst_value <= cauchy.worst_value
    if cauchy.passed:
        assert qc.passed


@given(terms_st, st.floats(0.01, 50))
def test_negated_sequence_has_identical_verdict(terms, eps):
    n = len(terms)
    sched = ToleranceSchedule(1, n - 1, eps)
    a = classify_quasi_cauchy(DET2, SeqSpec.from_terms(terms), sched)
    b = classify_quasi_cauchy(DET2, SeqSpec.from_terms([(-x, -y) for x, y in terms]), sched)
    assert a.to_dict() == b.to_dict()


@given(terms_st, st.floats(0.05, 20))
def test_extraction_yields_increasing_quasi_cauchy_run(terms, eps):
    seq = SeqSpec.from_terms(terms)
    sched = ToleranceSchedule(1, len(terms), eps)
    idx = extract_quasi_cauchy_subsequence(DET2, seq, sched, bound=1000.0)
    if idx is None:
        return
    assert len(idx) >= 2
    assert all(a < b for a, b in zip(idx, idx[1:]))
    pts = [seq.term(i) for i in idx]
    assert brute_qc_worst(pts) < eps


def test_extraction_on_bounded_oscillation():
    seq = SeqSpec.from_text("(sin(n), cos(n))")
    idx = extract_quasi_cauchy_subsequence(DET2, seq, ToleranceSchedule(1, 5000, 0.1), bound=2.0)
    assert idx is not None and len(idx) > 20


def test_extraction_rejects_unbounded_terms():
    seq = SeqSpec.from_text("(n, 0)")
    with pytest.raises(BoundViolationError):
        extract_quasi_cauchy_subsequence(DET2, seq, ToleranceSchedule(1, 50, 0.1), bound=10.0)


# -- construction -------------------------------------------------------------

def test_interleave_alternates_with_point():
    seq = interleave(SeqSpec.from_text("(n, 2*n)"), (0.0, 0.0))
    assert [seq.term(k) for k in range(1, 5)] == [(1.0, 2.0), (0.0, 0.0), (2.0, 4.0), (0.0, 0.0)]


def test_delta_and_index_map():
    seq = SeqSpec.from_text("(n, n^2)").subsequence("2*n")
    assert seq.term(3) == (6.0, 36.0)
    assert delta(seq, 3) == (2.0, 28.0)


def test_schedule_validation():
    with pytest.raises(InvalidToleranceError):
        ToleranceSchedule(0, 100, 0.1)
    with pytest.raises(InvalidToleranceError):
        ToleranceSchedule(10, 15, 0.1)
    with pytest.raises(InvalidToleranceError):
        ToleranceSchedule(10, 100, -1.0)
    assert ToleranceSchedule(10, 100, 0.1).doubled().window == (19, 200)


def test_sequence_validation():
    with pytest.raises(DimensionError):
        SeqSpec.from_text("sqrt(n)")
    with pytest.raises(ValueError):
        SeqSpec.from_text("(x, n)")
    with pytest.raises(ValueError):
        SeqSpec.from_text("(n, n)", index_map="n/2").terms(1, 20)


def test_trace_records_every_index():
    seq = SeqSpec.from_text("(sqrt(n), sqrt(n))")
    v = classify_quasi_cauchy(DET2, seq, ToleranceSchedule(10, 30, 0.5), trace=True)
    assert [n for n, _ in v.trace] == list(range(10, 31))
    assert np.allclose([vals[0] for _, vals in v.trace],
                       [math.sqrt(n + 1) - math.sqrt(n) for n in range(10, 31)], rtol=1e-12)
