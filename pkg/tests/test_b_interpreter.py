import itertools

import pytest

from scade2b.core.errors import BInitialisationError, DiagnosticKind
from scade2b.models.b_ast import (
    Assign,
    BApply,
    BBinOp,
    BConstFunction,
    BIdent,
    BInt,
    BInterval,
    BMachine,
    BOperation,
    BTotalFunction,
    FunctionOverride,
    Parallel,
    PCompare,
    PForAll,
    PImplies,
    PMember,
    Seq,
    Var,
    While,
)
from scade2b.models.values import ArrayValue, EnumMember, RecordValue
from scade2b.services.b_interpreter import BInterpreter, check_invariant, init_machine, invoke

NAT = BIdent("NAT")


def counter_machine(body, invariant=(), params=("x",), pre=None) -> BMachine:
    return BMachine(
        name="Counter",
        constants=("LIMIT",),
        properties=(PCompare("=", BIdent("LIMIT"), BInt(3)),),
        variables=("n",),
        invariant=(PMember(BIdent("n"), BInterval(BInt(0), BIdent("LIMIT"))), *invariant),
        initialisation=Assign("n", BInt(0)),
        operations=(
            BOperation(
                "Op",
                ("r",),
                params,
                pre if pre is not None else PMember(BIdent("x"), NAT),
                body,
                (PMember(BIdent("r"), NAT),),
            ),
        ),
    )


def test_compute_sum_first_cycles(compute_sum, experiment_trace):
    interpreter = BInterpreter(compute_sum.machine)
    state = interpreter.init_machine()
    assert state["sm_state"] == EnumMember("init")
    assert state["store"] == ArrayValue((0, 0, 0))

    first = interpreter.invoke(state, "ComputeSum", experiment_trace.cycles[0])
    assert first.ok
    assert first.outputs["output"] == ArrayValue((0, 0, 0, 0, 0))
    assert first.outputs["strucDemo"] == RecordValue((("fby_data", 0), ("move", EnumMember("Stop"))))
    assert first.state["sm_state"] == EnumMember("stateA")

    second = interpreter.invoke(first.state, "ComputeSum", experiment_trace.cycles[1])
    assert second.outputs["output"] == ArrayValue((1, 4, 9, 16, 25))
    assert second.outputs["strucDemo"] == RecordValue((("fby_data", 1), ("move", EnumMember("Forward"))))
    assert second.state["sm_state"] == EnumMember("stateB")
    assert second.state["store"] == ArrayValue((0, 0, 1))
    assert second.while_diagnostics == ()


def test_constants_come_from_properties(compute_sum):
    interpreter = BInterpreter(compute_sum.machine)
    assert interpreter.constants["MAX_SIZE"] == 5
    assert interpreter.constants["uint8_t"].size() == 256


def test_positional_arguments_and_module_helpers():
    machine = counter_machine(Seq((Assign("n", BIdent("x")), Assign("r", BIdent("n")))))
    state = init_machine(machine)
    result = invoke(machine, state, "Op", [2])
    assert result.outputs == {"r": 2}
    assert check_invariant(machine, result.state).holds


def test_pre_violation_keeps_the_state():
    machine = counter_machine(Assign("r", BIdent("x")), pre=PMember(BIdent("x"), BInterval(BInt(0), BInt(1))))
    state = init_machine(machine)
    result = invoke(machine, state, "Op", {"x": 5})
    assert result.error is DiagnosticKind.PRE_VIOLATION
    assert result.state == state


def test_missing_argument():
    machine = counter_machine(Assign("r", BIdent("x")))
    result = invoke(machine, init_machine(machine), "Op", {})
    assert result.error is DiagnosticKind.MISSING_INPUT


def test_invariant_violation_is_reported_with_the_conjunct():
    below_two = PCompare("<", BIdent("n"), BInt(2))
    machine = counter_machine(Seq((Assign("n", BIdent("x")), Assign("r", BInt(0)))), invariant=(below_two,))
    state = init_machine(machine)
    result = invoke(machine, state, "Op", {"x": 2})
    assert result.error is DiagnosticKind.INVARIANT_VIOLATION
    assert result.state == state
    assert result.diagnostics[-1].detail == "n < 2"

    reported = invoke(machine, state, "Op", {"x": 2}, report_violations=True)
    assert reported.ok and not reported.invariant_holds
    assert reported.state["n"] == 2
    verdict = check_invariant(machine, reported.state)
    assert (verdict.holds, verdict.conjunct_index) == (False, 1)


def test_write_outside_the_variable_type_is_a_range_error():
    machine = counter_machine(Seq((Assign("n", BIdent("x")), Assign("r", BInt(0)))))
    result = invoke(machine, init_machine(machine), "Op", {"x": 7})
    assert result.error is DiagnosticKind.RANGE_ERROR


def test_division_by_zero():
    machine = counter_machine(Assign("r", BBinOp("/", BInt(6), BIdent("x"))))
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.error is DiagnosticKind.DIVISION_BY_ZERO


def test_output_outside_its_type_is_a_range_error():
    machine = counter_machine(Assign("r", BInt(-1)))
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.error is DiagnosticKind.RANGE_ERROR


def test_parallel_branches_read_old_values():
    body = Seq((Parallel((Assign("n", BIdent("x")), Assign("r", BIdent("n")))),))
    machine = counter_machine(body)
    result = invoke(machine, init_machine(machine), "Op", {"x": 2})
    assert result.outputs == {"r": 0}
    assert result.state["n"] == 2


@pytest.mark.parametrize("order", list(itertools.permutations(range(3))))
def test_parallel_branch_order_does_not_matter(order):
    branches = (
        Assign("n", BBinOp("+", BIdent("n"), BIdent("x"))),
        Assign("r", BBinOp("*", BIdent("n"), BInt(10))),
        Assign("m", BIdent("n")),
    )
    body = Var(("m",), Parallel(tuple(branches[i] for i in order)), (PMember(BIdent("m"), NAT),))
    machine = counter_machine(Seq((Assign("n", BInt(1)), body)))
    result = invoke(machine, init_machine(machine), "Op", {"x": 2})
    assert result.ok
    assert result.outputs == {"r": 10}
    assert result.state["n"] == 3


def test_parallel_branches_writing_the_same_variable():
    machine = counter_machine(Parallel((Assign("n", BInt(1)), Seq((Assign("n", BInt(2)), Assign("r", BInt(0)))))))
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.error is DiagnosticKind.NON_DISJOINT_PARALLEL


def _counting_loop(invariant, variant) -> Var:
    return Var(
        ("i",),
        Seq(
            (
                Assign("i", BInt(0)),
                While(
                    PCompare("<", BIdent("i"), BInt(3)),
                    Assign("i", BBinOp("+", BIdent("i"), BInt(1))),
                    invariant,
                    variant,
                ),
                Assign("r", BIdent("i")),
            )
        ),
        (PMember(BIdent("i"), NAT),),
    )


def test_while_runs_to_completion_with_a_decreasing_variant():
    loop = _counting_loop(PMember(BIdent("i"), BInterval(BInt(0), BInt(3))), BBinOp("-", BInt(3), BIdent("i")))
    machine = counter_machine(loop)
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.outputs == {"r": 3}
    assert result.while_diagnostics == ()


def test_while_variant_that_does_not_decrease_is_fatal():
    machine = counter_machine(_counting_loop(None, BInt(5)))
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.error is DiagnosticKind.VARIANT_NON_DECREASE


def test_while_invariant_failure_is_a_warning():
    loop = _counting_loop(PCompare("/=", BIdent("i"), BInt(2)), BBinOp("-", BInt(3), BIdent("i")))
    machine = counter_machine(loop)
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.ok
    assert result.outputs == {"r": 3}
    (diagnostic,) = result.while_diagnostics
    assert diagnostic.kind is DiagnosticKind.INVARIANT_VIOLATION
    assert diagnostic.location == "WHILE in Op iteration 2"
    assert diagnostic.detail == "i /= 2"


def test_quantified_loop_invariant_over_a_function():
    domain = BInterval(BInt(0), BInt(2))
    quantified = PForAll(
        "k",
        PImplies(
            PMember(BIdent("k"), BInterval(BInt(0), BBinOp("-", BIdent("i"), BInt(1)))),
            PCompare("=", BApply(BIdent("a"), BIdent("k")), BIdent("k")),
        ),
    )
    body = Var(
        ("a", "i"),
        Seq(
            (
                Assign("i", BInt(0)),
                Assign("a", BConstFunction(domain, BInt(0))),
                While(
                    PCompare("<", BIdent("i"), BInt(3)),
                    Seq(
                        (
                            FunctionOverride("a", BIdent("i"), BIdent("i")),
                            Assign("i", BBinOp("+", BIdent("i"), BInt(1))),
                        )
                    ),
                    quantified,
                    BBinOp("-", BInt(3), BIdent("i")),
                ),
                Assign("r", BApply(BIdent("a"), BInt(2))),
            )
        ),
        (PMember(BIdent("a"), BTotalFunction(domain, NAT)), PMember(BIdent("i"), NAT)),
    )
    machine = counter_machine(body)
    result = invoke(machine, init_machine(machine), "Op", {"x": 0})
    assert result.outputs == {"r": 2}
    assert result.while_diagnostics == ()


def test_failing_property_stops_initialisation():
    machine = counter_machine(Assign("r", BInt(0)))
    broken = BMachine(
        name=machine.name,
        constants=machine.constants,
        properties=(*machine.properties, PCompare(">", BIdent("LIMIT"), BInt(10))),
        variables=machine.variables,
        invariant=machine.invariant,
        initialisation=machine.initialisation,
        operations=machine.operations,
    )
    with pytest.raises(BInitialisationError, match="property does not hold"):
        init_machine(broken)


def test_initialisation_outside_the_variable_type():
    machine = counter_machine(Assign("r", BInt(0)))
    broken = BMachine(
        name=machine.name,
        constants=machine.constants,
        properties=machine.properties,
        variables=machine.variables,
        invariant=machine.invariant,
        initialisation=Assign("n", BInt(7)),
        operations=machine.operations,
    )
    with pytest.raises(BInitialisationError):
        init_machine(broken)

    interpreter = BInterpreter(broken)
    state = interpreter.init_machine(check=False)
    assert state["n"] == 7
    verdict = interpreter.check_invariant(state)
    assert (verdict.holds, verdict.conjunct_index, verdict.conjunct) == (False, 0, "n : 0..LIMIT")


def test_protocol_reaches_an_invariant_violation(protocol_unsafe):
    interpreter = BInterpreter(protocol_unsafe.machine)
    state = interpreter.init_machine()
    outputs = []
    for event in ("ConnectRequest", "ConnectAck"):
        result = interpreter.invoke(state, "HandleEvent", {"input_event": EnumMember(event)})
        assert result.ok
        outputs.append(result.outputs["process_enable"])
        state = result.state
    assert outputs == [False, True]
    result = interpreter.invoke(state, "HandleEvent", {"input_event": EnumMember("DisconnectRequest")})
    assert result.error is DiagnosticKind.INVARIANT_VIOLATION
    assert "process_state = Enable => connection_state = Connected" in result.diagnostics[-1].detail
