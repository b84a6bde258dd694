import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twonorm import dsl
from twonorm.cases import fixture_dir
from twonorm.config import tomllib
from twonorm.errors import EvalError, LexError, ParseError

HERE = Path(__file__).parent
CONFIGS = HERE.parent / "configs"
DSL_KEYS = ("expr", "index_map")


def load_snapshots() -> list[tuple[str, str]]:
    rows = []
    for line in (HERE / "snapshots" / "parse_trees.txt").read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("#"):
            src, tree = line.split("\t")
            rows.append((src, tree))
    return rows


def corpus_files() -> list[Path]:
    files = sorted(fixture_dir().glob("*.toml"))
    files += sorted(p for p in CONFIGS.glob("*.toml") if p.name != "malformed.toml")
    return files


def dsl_strings(table, path=""):
    """Every DSL source string in a parsed TOML document, with its dotted path."""
    for key, value in table.items():
        where = f"{path}.{key}" if path else key
        if isinstance(value, dict):
            yield from dsl_strings(value, where)
        elif key in DSL_KEYS and isinstance(value, str):
            yield where, value
        elif key in DSL_KEYS and isinstance(value, list):
            for i, item in enumerate(value):
                yield f"{where}[{i}]", item


# -- lexing -------------------------------------------------------------------

def test_tokenize_kinds_and_offsets():
    toks = dsl.tokenize("(sqrt(n), 2.5e-1*x1)")
    assert [t.kind for t in toks] == ["lparen", "identifier", "lparen", "identifier", "rparen", "comma",
                                      "number", "operator", "identifier", "rparen"]
    assert [t.offset for t in toks][:4] == [0, 1, 5, 6]
    assert toks[6].text == "2.5e-1"


def test_lex_error_reports_offset():
    with pytest.raises(LexError) as info:
        dsl.tokenize("1 $ 2")
    assert info.value.offset == 2


# -- parsing ------------------------------------------------------------------

@pytest.mark.parametrize("src,tree", load_snapshots())
def test_golden_parse_tree(src, tree):
    assert dsl.to_sexpr(dsl.parse_text(src)) == tree


def test_snapshot_count():
    assert len(load_snapshots()) == 20


@pytest.mark.parametrize("src,offset", [
    ("2n", 1),
    ("(1, (2, 3))", 6),
    ("sqrt(1, 2)", 0),
    ("foo(1)", 0),
    ("1 +", 3),
    ("", 0),
    ("(1, 2", 5),
])
def test_parse_errors_carry_offsets(src, offset):
    with pytest.raises(ParseError) as info:
        dsl.parse_text(src)
    assert info.value.offset == offset


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        dsl.parse_text("1 +")
    assert {"number", "identifier", "("} <= info.value.expected


# -- evaluation ---------------------------------------------------------------

def test_power_precedence_values():
    assert dsl.evaluate(dsl.parse_text("-2^2"), {}) == -4.0
    assert dsl.evaluate(dsl.parse_text("2^3^2"), {}) == 512.0
    assert dsl.evaluate(dsl.parse_text("(x1^2, x2^2)"), {"x1": 3, "x2": -2}) == (9.0, 4.0)


@pytest.mark.parametrize("src,env", [
    ("sqrt(x)", {"x": -1.0}),
    ("1/x", {"x": 0.0}),
    ("x^0.5", {"x": -2.0}),
    ("0^-1", {}),
    ("y + 1", {}),
])
def test_domain_errors(src, env):
    with pytest.raises(EvalError):
        dsl.evaluate(dsl.parse_text(src), env)


def test_array_evaluation_raises_like_scalar():
    ast = dsl.parse_text("sqrt(x)")
    with pytest.raises(EvalError):
        dsl.evaluate_array(ast, {"x": np.array([1.0, -1.0])})


ARRAY_EXPRS = ["(sqrt(n), sqrt(n))", "(sin(n^0.25), cos(n^0.25))", "(1 + 1/n, 2 - 1/n)",
               "n^2 - 3*n", "abs(sin(n)) * sign(cos(n))", "max(n, 3) / min(n, 7, 9)",
               "(sqrt(n)/2, 3 - sqrt(n)/4)", "-n^-1.5"]


@pytest.mark.parametrize("src", ARRAY_EXPRS)
def test_array_matches_scalar_bitwise(src):
    ast = dsl.parse_text(src)
    ns = np.arange(1, 3001, dtype=float)
    got = dsl.evaluate_array(ast, {"n": ns})
    want = np.array([dsl.evaluate(ast, {"n": float(n)}) for n in ns])
    assert np.array_equal(got, want)


# -- round trip ---------------------------------------------------------------

names = st.sampled_from(["x", "y", "n", "x1", "y2"])
numbers = st.one_of(st.integers(0, 10 ** 6).map(float),
                    st.floats(0, 1e20, allow_nan=False, allow_infinity=False))
leaves = st.one_of(names.map(dsl.Var), numbers.map(dsl.Num))


def _node(children):
    return st.one_of(
        children.map(lambda c: dsl.Unary("-", c)),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: dsl.Binary(*t)),
        st.tuples(st.sampled_from(["sqrt", "sin", "abs", "sign"]), children).map(
            lambda t: dsl.Call(t[0], (t[1],))),
        st.lists(children, min_size=2, max_size=3).map(lambda cs: dsl.Call("max", tuple(cs))),
    )


exprs = st.recursive(leaves, _node, max_leaves=12)
roots = st.one_of(exprs, st.lists(exprs, min_size=2, max_size=3).map(lambda xs: dsl.TupleExpr(tuple(xs))))


@given(roots)
def test_pretty_print_round_trip(ast):
    text = dsl.to_text(ast)
    again = dsl.parse_text(text)
    assert again == ast
    assert dsl.to_text(again) == text


@given(exprs, st.floats(-50, 50, allow_nan=False))
def test_printed_form_evaluates_identically(ast, value):
    env = {k: value for k in ("x", "y", "n", "x1", "y2")}
    try:
        want = dsl.evaluate(ast, env)
    except EvalError:
        with pytest.raises(EvalError):
            dsl.evaluate(dsl.parse_text(dsl.to_text(ast)), env)
        return
    got = dsl.evaluate(dsl.parse_text(dsl.to_text(ast)), env)
    assert got == want or (math.isnan(got) and math.isnan(want))


# -- corpus -------------------------------------------------------------------

def test_corpus_is_not_empty():
    files = corpus_files()
    assert len(files) >= 10
    assert sum(len(list(dsl_strings(tomllib.loads(p.read_text())))) for p in files) >= 50


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_parses_and_round_trips(path):
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    for where, text in dsl_strings(data):
        ast = dsl.parse_text(text)
        printed = dsl.to_text(ast)
        assert dsl.to_text(dsl.parse_text(printed)) == printed, where
        assert dsl.parse_text(printed) == ast, where
