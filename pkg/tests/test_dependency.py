import pytest

from scade2b.core.errors import CausalityError
from scade2b.services.dependency_service import dependency_order, order_items
from scade2b.services.pipeline_service import load_program
from scade2b.services.scade_parser import parse_program
from tests.conftest import fixture_text


def test_cycle_is_reported_with_its_variables():
    with pytest.raises(CausalityError) as info:
        load_program(fixture_text("cyclic.scade"), "cyclic.scade")
    assert info.value.variables == ("x", "y")
    assert "x -> y -> x" in str(info.value)


def test_fby_breaks_an_instantaneous_cycle():
    program = load_program(
        """node N(a: int32) returns (x: int32)
var y: int32;
let
  x = fby(y; 1; 0);
  y = x + a;
tel
"""
    )
    assert program.node("N").name == "N"


def test_order_is_stable_among_independent_equations():
    node = parse_program(
        """node N(i: int32) returns (a, b, c: int32)
let
  c = b + 1;
  b = i;
  a = i;
tel
"""
    ).node("N")
    ordered = dependency_order(node)
    assert [item.lhs[0] for item in ordered] == ["b", "c", "a"]


def test_blocks_are_scheduled_after_what_they_read():
    node = parse_program(
        """node N(i: int32) returns (x, y: int32)
let
  activate if y > 0 then let x = 1; tel else let x = 2; tel returns x;
  y = i;
tel
"""
    ).node("N")
    ordered = order_items(node.body)
    assert ordered[0].lhs == ("y",)


def test_cycle_inside_an_activate_branch_is_found():
    source = """node N(i: int32) returns (x: int32)
let
  activate if i > 0 then
    var p, q: int32;
    let
      p = q;
      q = p;
      x = p;
    tel
  else let x = 0; tel
  returns x;
tel
"""
    with pytest.raises(CausalityError):
        load_program(source)
