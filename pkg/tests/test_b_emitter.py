from scade2b.models.b_ast import (
    Assign,
    BApply,
    BBinOp,
    BIdent,
    BInt,
    BInterval,
    BMachine,
    BMaplets,
    BNeg,
    BOperation,
    BTotalFunction,
    FunctionOverride,
    If,
    Parallel,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    Seq,
)
from scade2b.services.b_emitter import emit_machine, render_expression, render_predicate


def test_binary_operands_are_parenthesised_by_precedence():
    a, b, c = BIdent("a"), BIdent("b"), BIdent("c")
    assert render_expression(BBinOp("*", BBinOp("+", a, b), c)) == "(a + b) * c"
    assert render_expression(BBinOp("-", a, BBinOp("-", b, c))) == "a - (b - c)"
    assert render_expression(BBinOp("-", BBinOp("-", a, b), c)) == "a - b - c"
    assert render_expression(BNeg(BBinOp("+", a, b))) == "-(a + b)"


def test_intervals_and_functions():
    domain = BInterval(BInt(0), BBinOp("-", BIdent("N"), BInt(1)))
    assert render_expression(BTotalFunction(domain, BIdent("BOOL"))) == "0..(N - 1) --> BOOL"
    assert render_expression(BMaplets(((BInt(0), BInt(3)), (BInt(1), BInt(4))))) == "{0 |-> 3, 1 |-> 4}"


def test_unicode_flavour_uses_glyphs():
    pred = PForAll("i", PImplies(PMember(BIdent("i"), BInterval(BInt(0), BInt(2))), PCompare("/=", BIdent("i"), BInt(5))))
    assert render_predicate(pred) == "!i.(i : 0..2 => i /= 5)"
    assert render_predicate(pred, "unicode") == "∀i.(i ∈ 0..2 ⇒ i ≠ 5)"


def test_machine_layout():
    machine = BMachine(
        name="M",
        sets=(("MODE", ("On", "Off")),),
        variables=("v",),
        invariant=(PMember(BIdent("v"), BIdent("MODE")),),
        initialisation=Assign("v", BIdent("Off")),
        operations=(
            BOperation(
                "Flip",
                ("out",),
                ("x",),
                PMember(BIdent("x"), BIdent("BOOL")),
                Seq((Assign("v", BIdent("On")), Assign("out", BIdent("x")))),
            ),
        ),
    )
    text = emit_machine(machine, "ascii", 2)
    assert text == (
        "MACHINE M\n\n"
        "SETS\n  MODE = {On, Off}\n\n"
        "VARIABLES\n  v\n\n"
        "INVARIANT\n  v : MODE\n\n"
        "INITIALISATION\n  v := Off\n\n"
        "OPERATIONS\n"
        "  out <-- Flip(x) =\n"
        "  PRE\n    x : BOOL\n  THEN\n"
        "    v := On;\n    out := x\n"
        "  END\n\n"
        "END\n"
    )


def test_nested_compositions_are_bracketed():
    inner = Parallel((Assign("a", BInt(1)), FunctionOverride("f", BInt(0), BApply(BIdent("f"), BInt(1)))))
    sub = If(((PCompare("=", BIdent("a"), BInt(0)), Seq((inner, Assign("b", BInt(2))))),))
    machine = BMachine(
        name="M",
        operations=(BOperation("Op", (), (), None, sub),),
    )
    lines = [line.strip() for line in emit_machine(machine, "ascii").splitlines()]
    start = lines.index("IF a = 0 THEN")
    assert lines[start + 1:start + 6] == ["BEGIN", "a := 1 ||", "f(0) := f(1)", "END;", "b := 2"]
