from scade2b.models.scade_ast import Equation, Fby, HigherOrderApp, StructMake, VarRef
from scade2b.services.inline_service import is_simple, simplify_node
from scade2b.services.pipeline_service import load_program
from tests.conftest import fixture_text


def test_forwarded_locals_take_the_output_name():
    node = simplify_node(load_program(fixture_text("appendix1.scade")).node("ComputeSum"))
    assert node.locals == ()
    equations = {item.lhs[0]: item.rhs for item in node.body if isinstance(item, Equation)}
    assert isinstance(equations["output"], HigherOrderApp)
    assert equations["output"].array_args == (VarRef("input"),)
    assert isinstance(equations["fby_out"], Fby)
    assert equations["fby_out"].input.name == "fby_in"


def test_branch_locals_are_substituted_into_the_struct():
    node = simplify_node(load_program(fixture_text("appendix1.scade")).node("ComputeSum"))
    block = node.body[-1]
    (eq,) = block.then_branch.body
    assert eq.lhs == ("strucDemo",)
    assert isinstance(eq.rhs, StructMake)
    assert [a.name for a in eq.rhs.args] == ["fby_in", "Stop"]
    assert block.then_branch.locals == ()


def test_arithmetic_locals_stay():
    node = simplify_node(
        load_program(
            """node N(a: int32) returns (x: int32)
var t: int32;
let
  t = a + 1;
  x = t;
tel
"""
        ).node("N")
    )
    assert [d.name for d in node.locals] == ["t"]
    assert len(node.body) == 2


def test_simple_expressions():
    assert is_simple(VarRef("a"))
    assert not is_simple(Fby(VarRef("a"), 1, VarRef("z"), 0))
