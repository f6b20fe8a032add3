import pytest

from scade2b.core.errors import BSyntaxError
from scade2b.models.b_ast import BApply, BBinOp, BIdent, BInt, PAnd, PCompare, PForAll, PImplies, PMember, POr
from scade2b.services.b_emitter import render_predicate
from scade2b.services.b_parser import parse_expression, parse_predicate, tokenize


def test_tokenize_folds_unicode_onto_ascii():
    assert tokenize("x ∈ 0..3 ∧ y ≠ 2") == tokenize("x : 0..3 & y /= 2")
    assert tokenize("f(i) := g(i) /* note */ ;") == ["f", "(", "i", ")", ":=", "g", "(", "i", ")", ";"]


def test_implication_binds_loosest():
    pred = parse_predicate("process_state = Enable => connection_state = Connected")
    assert pred == PImplies(
        PCompare("=", BIdent("process_state"), BIdent("Enable")),
        PCompare("=", BIdent("connection_state"), BIdent("Connected")),
    )


def test_conjunction_and_disjunction():
    pred = parse_predicate("a = 1 & b = 2 or c < 3")
    assert isinstance(pred, POr)
    assert isinstance(pred.parts[0], PAnd)


def test_quantifier_and_function_application():
    pred = parse_predicate("!i.(i : 0..(n - 1) => out(i) = v(i) * 2)")
    assert isinstance(pred, PForAll)
    assert pred.var == "i"
    assert isinstance(pred.body.left, PMember)
    assert pred.body.right.right == BBinOp("*", BApply(BIdent("v"), BIdent("i")), BInt(2))


def test_expression_precedence():
    assert parse_expression("1 + 2 * 3") == BBinOp("+", BInt(1), BBinOp("*", BInt(2), BInt(3)))


def test_rendered_predicates_parse_back():
    text = "x : 0..5 & (x > 2 => y /= TRUE)"
    assert render_predicate(parse_predicate(text)) == text


@pytest.mark.parametrize("text", ["x =", "x = 1 &", "(x = 1", "x ? 2"])
def test_malformed_text(text):
    with pytest.raises(BSyntaxError):
        parse_predicate(text)
