import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from henonroots import dsl
from henonroots.cli import main
from henonroots.dsl import (
    BinOp,
    Compose,
    Henon,
    Imag,
    MapPow,
    Neg,
    Num,
    Pair,
    ParseError,
    Pow,
    Tau,
    Var,
    Zeta,
    load_map,
    load_scalar,
    parse,
    parse_expr,
    to_text,
)
from henonroots.henon import HenonComposition
from henonroots.poly import BiPoly, PolyMap2, iterate
from henonroots.scalars import primitive_root

z, w = BiPoly.z(), BiPoly.w()
H_SQUARED = "(w, z + w^2)^2"


def test_parse_pair():
    node = parse("(w, w^2 - z)")
    assert node == Pair(Var("w"), BinOp("-", Pow(Var("w"), 2), Var("z")))
    assert load_map("(w, w^2 - z)") == PolyMap2(w, w**2 - z)


def test_parse_composition_of_henon_factors():
    node = parse("henon(p=w^2, a=1) o henon(p=w^3 - w, a=2)")
    assert isinstance(node, Compose)
    assert isinstance(node.left, Henon) and isinstance(node.right, Henon)
    h = load_map("henon(p=w^2, a=1) o henon(p=w^3 - w, a=2)")
    assert isinstance(h, HenonComposition) and h.degree == 6


def test_non_monic_rejected():
    with pytest.raises(ParseError, match="monic"):
        load_map("henon(p=2*w^2, a=1)")


def test_zero_a_rejected():
    with pytest.raises(ParseError, match="a"):
        load_map("henon(p=w^2, a=0)")


@pytest.mark.parametrize(
    "text, line, col",
    [("(w, w^2 - z", 1, 12), ("(w,\n  w^ - z)", 2, 6), ("(w, q)", 1, 5), ("(w, w) o", 1, 9)],
)
def test_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        load_map(text)
    assert (exc.value.line, exc.value.col) == (line, col)
    assert str(exc.value).startswith(f"line {line}, column {col}:")


def test_scalars():
    assert load_scalar("1/3") == Fraction(1, 3)
    assert load_scalar("0.25") == Fraction(1, 4)
    assert load_scalar("zeta(3)") == primitive_root(3)
    assert load_scalar("i^2") == -1
    assert load_scalar("0.25", approx=True) == 0.25


def test_map_power_and_tau():
    assert load_map(H_SQUARED) == iterate(PolyMap2(w, z + w**2), 2)
    assert load_map("tau o tau") == PolyMap2.identity()
    assert load_map("(henon(p=w^2, a=1))^2") == load_map("henon(p=w^2, a=1)").power(2)


def test_elem_nonflow_expression():
    F = load_map("elem_nonflow(r=2, mu=1, q=t^2 + 1, beta=-1)")
    assert F.as_map() == PolyMap2(-(z + w * (w**4 + 1)), -w)


def test_printer_examples():
    assert to_text(parse("(w, w^2 - z)")) == "(w, w^2 - z)"
    assert to_text(parse_expr("(z + w)^2")) == "(z + w)^2"
    assert to_text(parse_expr("z - (w - 1)")) == "z - (w - 1)"


names = st.sampled_from(["z", "w"])
leaves = st.one_of(
    st.integers(0, 99).map(lambda k: Num(str(k))),
    st.sampled_from(["0.5", "1.25", "3/4"]).map(lambda t: parse_expr(t)),
    st.just(Imag()),
    st.integers(1, 12).map(Zeta),
    names.map(Var),
)
exprs = st.recursive(
    leaves,
    lambda sub: st.one_of(
        sub.map(Neg),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(lambda t: BinOp(*t)),
        st.tuples(sub, st.integers(0, 4)).map(lambda t: Pow(*t)),
    ),
    max_leaves=8,
)
maps = st.recursive(
    st.one_of(st.tuples(exprs, exprs).map(lambda t: Pair(*t)), st.just(Tau()),
              st.tuples(exprs, exprs).map(lambda t: Henon(*t))),
    lambda sub: st.one_of(
        st.tuples(sub, sub).map(lambda t: Compose(*t)),
        st.tuples(sub, st.integers(0, 3)).map(lambda t: MapPow(*t)),
    ),
    max_leaves=4,
)


@given(exprs)
def test_expr_print_round_trip(node):
    assert parse_expr(to_text(node)) == node


@given(maps)
def test_map_print_round_trip(node):
    assert parse(to_text(node)) == node


# ---------------------------------------------------------------------------
# command line


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_green_point(capsys):
    code, out, _ = run(capsys, "green", "(w, w^2 - z)", "--point", "0,1e6", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["value"] - 13.8155) < 1e-3
    assert rep["classification"] == "escaped"
    assert "config" in rep


def test_cli_root_orders(capsys):
    code, out, _ = run(capsys, "root-orders", "henon(p=w^2, a=1) o henon(p=w^3 - w, a=2)", "--format", "json")
    assert code == 0 and json.loads(out)["orders"] == []
    code, out, _ = run(capsys, "root-orders", "henon(p=w^2, a=1)^6", "--format", "json")
    assert json.loads(out)["orders"] == [2, 3, 6]


def test_cli_roots_of_squared_map(capsys):
    code, out, _ = run(capsys, "roots", H_SQUARED, "--order", "2", "--starts", "30", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["roots"]) == 3
    assert all(r["status"] == "verified-exact" for r in rep["roots"])


def test_cli_verify_root_exit_codes(capsys):
    assert run(capsys, "verify-root", "(w, z + w^2)", "--order", "2", "--target", H_SQUARED)[0] == 0
    assert run(capsys, "verify-root", "(w, z + w^2)", "--order", "3", "--target", H_SQUARED)[0] == 2


def test_cli_diagnostics(capsys):
    code, _, err = run(capsys, "eval", "(w, w^2 - z")
    assert code == 1 and "line 1, column 12" in err
    code, _, err = run(capsys, "find-roots", H_SQUARED, "--order", "3")
    assert code == 1 and "order not admissible" in err
    code, _, err = run(capsys, "eval", "henon(p=2*w^2, a=1)")
    assert code == 1 and "monic" in err


def test_cli_text_and_commands(capsys):
    for argv in (
        ["eval", "(w, w^2 - z)", "--point", "1,2"],
        ["compose", "(w, w^2 - z)", "(w, w^2 - z)"],
        ["decompose", "(w, w^2 - z)"],
        ["normal-form", "(zeta(3)*w, zeta(3)^2*(z + w^2))"],
        ["symmetry-roots", "(w, z + w^2)", "--order", "2", "--target", H_SQUARED],
        ["elem-root", "elem_nonflow(r=2, mu=1, q=t^2 + 1, beta=-1)", "--l", "2"],
        ["elem-root", "--example-k", "3*t^7 - t^2"],
        ["fit-multiplier", "(w, z + w^2)", "--order", "2", "--target", H_SQUARED],
        ["check-bounds", "(w, w^2 - z)", "--samples", "20"],
    ):
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert "config" in out


def test_cli_eval_point(capsys):
    code, out, _ = run(capsys, "eval", "(w, w^2 - z)", "--point", "1,2", "--format", "json")
    assert code == 0
    assert "3" in out


def test_cli_conjugate(capsys):
    code, out, err = run(capsys, "conjugate", "(-(z + w*(w^4 + 1)/3 + w^6), -w)", "--order", "3",
                         "--target", "elem_nonflow(r=2, mu=1, q=t^2 + 1, beta=-1)")
    # w^6 is even, so with a = -1 and mu = 1 it is not resonant
    assert code == 0, err


def test_cli_escape_grid(tmp_path, capsys):
    out = tmp_path / "k.pgm"
    code, _, err = run(capsys, "escape-grid", "(w, w^2 - z)", "--resolution", "16x8", "--format", "pgm",
                       "--out", str(out))
    assert code == 0, err
    assert out.read_text().splitlines()[2] == "16 8"
    csv = tmp_path / "g.csv"
    code, _, _ = run(capsys, "escape-grid", "(w, w^2 - z)", "--resolution", "4x4", "--what", "green+",
                     "--format", "csv", "--out", str(csv))
    assert code == 0 and len(csv.read_text().splitlines()) == 17


def test_cli_is_deterministic_under_seed(capsys):
    argv = ["find-roots", H_SQUARED, "--order", "2", "--starts", "12", "--seed", "5", "--format", "json"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    argv = ["check-bounds", "(w, w^2 - z)", "--samples", "10", "--seed", "3", "--format", "json"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
