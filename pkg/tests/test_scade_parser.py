import pytest

from scade2b.core.errors import ScadeNameError, ScadeSyntaxError
from scade2b.models.scade_ast import ActivateIf, Equation, Fby, HigherOrderApp, StateMachine, walk_expr
from scade2b.services.scade_parser import parse_program
from scade2b.services.scade_printer import print_program
from tests.conftest import fixture_text


def _node(body: str, header: str = "node N(a: int32) returns (x: int32)") -> str:
    return f"{header}\n{body}\n"


def test_parses_compute_sum_declarations():
    program = parse_program(fixture_text("appendix1.scade"), "appendix1.scade")
    assert [t.name for t in program.type_decls] == ["MOVE", "structType"]
    assert [c.name for c in program.const_decls] == ["MAX_SIZE"]
    assert [(n.kind, n.name) for n in program.nodes] == [("function", "square"), ("node", "ComputeSum")]
    assert [(p.kind, p.text) for p in program.pragmas] == [("machine", "example"), ("statevar", "STATE sm_state")]


def test_automaton_and_nested_activate_shape():
    node = parse_program(fixture_text("appendix1.scade")).node("ComputeSum")
    sm = next(item for item in node.body if isinstance(item, StateMachine))
    assert sm.name == "STATE"
    assert [s.name for s in sm.states] == ["init", "stateA", "stateB"]
    assert sm.initial.name == "init"
    assert [tr.target for tr in sm.state("stateB").transitions] == ["stateA"]

    block = next(item for item in node.body if isinstance(item, ActivateIf))
    nested = block.else_branch.body[0]
    assert isinstance(nested, ActivateIf)
    assert [d.name for d in block.then_branch.locals] == ["L1", "L2", "L3"]


def test_fby_instances_are_numbered_per_node():
    program = parse_program(
        _node("let\n  x = fby(a; 2; 0) + fby(a; 1; 1);\ntel")
    )
    fbys = [e for e in walk_expr(program.node("N").body[0].rhs) if isinstance(e, Fby)]
    assert sorted(f.instance for f in fbys) == [0, 1]
    assert {f.depth for f in fbys} == {1, 2}


def test_unnamed_automata_get_default_names():
    source = _node(
        """let
  automaton
    initial state A
      let x = a; tel
  returns x;
  automaton
    initial state B
  returns ..;
tel""",
    )
    names = [item.name for item in parse_program(source).node("N").body]
    assert names == ["SM", "SM2"]


def test_elsif_desugars_to_nested_activate():
    source = _node(
        """let
  activate if a = 0 then let x = 1; tel
  elsif a = 1 then let x = 2; tel
  else let x = 3; tel
  returns x;
tel"""
    )
    block = parse_program(source).node("N").body[0]
    inner = block.else_branch.body[0]
    assert isinstance(inner, ActivateIf)
    assert isinstance(inner.else_branch.body[0], Equation)


def test_mapfold_accumulator_count():
    source = _node(
        "let\n  s, t, y = (mapfold 2 step <<4>>)(0, 1, v);\ntel",
        "node N(v: int32^4) returns (s, t: int32; y: int32^4)",
    )
    app = parse_program(source).node("N").body[0].rhs
    assert isinstance(app, HigherOrderApp)
    assert app.acc_count == 2
    assert len(app.acc_inits) == 2
    assert len(app.array_args) == 1


def test_mapw_reads_condition_and_defaults():
    source = _node(
        "let\n  k, y = (mapwi f <<3>> if true default 0)(v);\ntel",
        "node N(v: int32^3) returns (k: int32; y: int32^3)",
    )
    app = parse_program(source).node("N").body[0].rhs
    assert app.variant == "mapwi"
    assert app.indexed and app.conditional
    assert len(app.defaults) == 1


@pytest.mark.parametrize(
    "body, message",
    [
        ("let\n  x = pre a;\ntel", "'pre' is not supported"),
        ("let\n  x = 0 -> a;\ntel", "'->' is not supported"),
        (
            "let\n  automaton\n    initial state A\n      until if a = 0 restart A;\n  returns ..;\n  x = a;\ntel",
            "weak transitions",
        ),
    ],
)
def test_rejects_unsupported_constructs_by_name(body, message):
    with pytest.raises(ScadeSyntaxError) as info:
        parse_program(_node(body))
    assert message in str(info.value)


def test_syntax_error_reports_position_and_expected_tokens():
    with pytest.raises(ScadeSyntaxError) as info:
        parse_program("node N(a: int32) returns (x: int32)\nlet\n  x = a\ntel\n", "bad.scade")
    err = info.value
    assert err.pos.line == 4
    assert "';'" in err.expected
    assert str(err).startswith("bad.scade:4:")


def test_unknown_pragma_is_rejected():
    with pytest.raises(ScadeSyntaxError):
        parse_program("--@colour red\n" + _node("let\n  x = a;\ntel"))


def test_duplicate_enum_member_across_types():
    source = "type\n  A = enum {On, Off};\n  B = enum {Off, Idle};\n"
    with pytest.raises(ScadeNameError):
        parse_program(source)


@pytest.mark.parametrize("name", ["appendix1.scade", "appendix3.scade", "appendix5.scade"])
def test_printer_output_parses_to_the_same_program(name):
    program = parse_program(fixture_text(name))
    printed = print_program(program)
    reparsed = parse_program(printed)
    assert reparsed == program
    assert print_program(reparsed) == printed
