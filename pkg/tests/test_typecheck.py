import pytest

from scade2b.core.errors import ScadeNameError, ScadeTypeError
from scade2b.models.scade_ast import ArrayType, BaseType, ConstRef, EnumLit, EnumType, StructType
from scade2b.models.values import ArrayValue, EnumMember, RecordValue
from scade2b.services.scade_parser import parse_program
from scade2b.services.typecheck_service import const_values, typecheck, value_in_type, zero_value
from tests.conftest import fixture_text


def check(source: str):
    return typecheck(parse_program(source, "t.scade"), "t.scade")


def test_compute_sum_resolves_named_types_and_sizes():
    program = check(fixture_text("appendix1.scade"))
    node = program.node("ComputeSum")
    inputs = {d.name: d.type for d in node.inputs}
    assert inputs["input"] == ArrayType(BaseType("uint8"), "MAX_SIZE", 5)
    strucdemo = node.outputs[2].type
    assert isinstance(strucdemo, StructType)
    assert strucdemo.field_type("move") == EnumType("MOVE", ("Stop", "Forward", "Reverse"))
    assert const_values(program) == {"MAX_SIZE": 5}


def test_enum_and_constant_references_are_resolved():
    program = check(
        """type Mode = enum {Idle, Busy};
const K: int32 = 3;
node N(a: int32) returns (m: Mode; y: int32)
let
  m = Idle;
  y = a + K;
tel
"""
    )
    body = program.node("N").body
    assert isinstance(body[0].rhs, EnumLit)
    assert isinstance(body[1].rhs.right, ConstRef)


@pytest.mark.parametrize(
    "body, error",
    [
        ("x = true + 1;", ScadeTypeError),
        ("x = 300;", ScadeTypeError),
        ("x = b;", ScadeNameError),
        ("x = a; x = a;", ScadeTypeError),
        ("x = if a then 1 else 2;", ScadeTypeError),
    ],
)
def test_rejects_ill_typed_equations(body, error):
    with pytest.raises(error):
        check(f"node N(a: uint8) returns (x: uint8)\nlet\n  {body}\ntel\n")


def test_output_that_is_never_defined():
    with pytest.raises(ScadeNameError, match="never defined"):
        check("node N(a: int32) returns (x, y: int32)\nlet\n  x = a;\ntel\n")


def test_activate_branches_must_define_the_same_flows():
    source = """node N(a: int32) returns (x, y: int32)
let
  activate if a > 0 then let x = 1; y = 2; tel
  else let x = 3; tel
  returns ..;
tel
"""
    with pytest.raises(ScadeTypeError, match="different variables"):
        check(source)


def test_fby_is_refused_inside_functions():
    with pytest.raises(ScadeTypeError, match="fby"):
        check("function F(a: int32) returns (x: int32)\nlet\n  x = fby(a; 1; 0);\ntel\n")


def test_automaton_needs_one_initial_state():
    source = """node N(a: int32) returns (x: int32)
let
  automaton M
    state A
      let x = a; tel
  returns x;
tel
"""
    with pytest.raises(ScadeTypeError, match="initial state"):
        check(source)


def test_iterator_array_size_must_match():
    source = """function inc(v: int32) returns (w: int32)
let
  w = v + 1;
tel
node N(a: int32^3) returns (x: int32^4)
let
  x = (map inc <<4>>)(a);
tel
"""
    with pytest.raises(ScadeTypeError, match="size"):
        check(source)


def test_value_membership_and_zero_values():
    mode = EnumType("Mode", ("Idle", "Busy"))
    pair = StructType("P", (("n", BaseType("uint8")), ("m", mode)))
    assert value_in_type(255, BaseType("uint8"))
    assert not value_in_type(256, BaseType("uint8"))
    assert not value_in_type(True, BaseType("int32"))
    assert value_in_type(RecordValue((("n", 1), ("m", EnumMember("Busy")))), pair)
    assert zero_value(pair) == RecordValue((("n", 0), ("m", EnumMember("Idle"))))
    assert zero_value(ArrayType(BaseType("bool"), 2, 2)) == ArrayValue((False, False))


def test_non_boolean_condition_is_quoted_in_the_message():
    with pytest.raises(ScadeTypeError, match=r"if condition 'a \+ 1' must be bool, got uint8"):
        check("node N(a: uint8) returns (x: uint8)\nlet\n  x = if a + 1 then 1 else 2;\ntel\n")
