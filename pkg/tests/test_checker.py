import pytest

from scade2b.core.errors import ConfigurationError
from scade2b.models.b_ast import Assign, BIdent, BInt, BInterval, BMachine, BOperation, PMember
from scade2b.models.runtime import BoundExceeded, Verified, Violation
from scade2b.models.values import EnumMember
from scade2b.services.checker_service import derive_domains, explore, render_counterexample, replay
from scade2b.services.pipeline_service import check


def test_unsafe_protocol_has_a_three_step_counterexample(protocol_unsafe):
    result = check(protocol_unsafe)
    assert isinstance(result, Violation)
    steps = result.counterexample.steps
    assert [dict(s.args)["input_event"] for s in steps] == [
        EnumMember("ConnectRequest"),
        EnumMember("ConnectAck"),
        EnumMember("DisconnectRequest"),
    ]
    assert [dict(s.outputs)["process_enable"] for s in steps] == [False, True, False]
    final = steps[-1].state
    assert final["connection_state"] == EnumMember("Disconnecting")
    assert final["process_state"] == EnumMember("Enable")
    assert "process_state = Enable => connection_state = Connected" in result.counterexample.failing_conjunct


def test_counterexample_replays(protocol_unsafe):
    result = check(protocol_unsafe)
    assert replay(protocol_unsafe.machine, result.counterexample)


def test_counterexample_table(protocol_unsafe):
    table = render_counterexample(check(protocol_unsafe).counterexample)
    lines = table.splitlines()
    assert lines[0].split() == ["Position", "Transition", "Output"]
    assert lines[1].split() == ["0", "---root---"]
    assert lines[2].split() == ["1", "INITIALISATION"]
    assert lines[3].split() == ["2", "HandleEvent(input_event=ConnectRequest)", "FALSE"]
    assert lines[5].split() == ["4", "HandleEvent(input_event=DisconnectRequest)", "FALSE"]
    assert "final state: connection_state=Disconnecting, process_state=Enable" in table


def test_safe_protocol_is_verified(protocol_safe):
    result = check(protocol_safe)
    assert result == Verified(states_visited=4, transitions_fired=16)


def test_state_bound(protocol_safe):
    result = check(protocol_safe, max_states=2)
    assert isinstance(result, BoundExceeded)
    assert result.bound == 2


def test_initialisation_violating_the_invariant():
    machine = BMachine(
        name="Broken",
        variables=("n",),
        invariant=(PMember(BIdent("n"), BInterval(BInt(1), BInt(2))),),
        initialisation=Assign("n", BInt(0)),
    )
    result = explore(machine, derive_domains(machine))
    assert isinstance(result, Violation)
    assert result.counterexample.steps == ()
    assert result.counterexample.failing_conjunct == "n : 1..2"
    assert result.counterexample.initial_state["n"] == 0
    assert replay(machine, result.counterexample)


def test_domains_come_from_the_precondition(protocol_safe):
    domains = derive_domains(protocol_safe.machine)
    assert len(domains.for_operation("HandleEvent")["input_event"]) == 4


def test_wide_integer_parameter_needs_an_override(compute_sum):
    with pytest.raises(ConfigurationError, match="too large"):
        derive_domains(compute_sum.machine)


def test_overrides_narrow_integer_parameters():
    machine = BMachine(
        name="Counter",
        variables=("n",),
        invariant=(PMember(BIdent("n"), BIdent("NAT")),),
        initialisation=Assign("n", BInt(0)),
        operations=(BOperation("Set", (), ("v",), PMember(BIdent("v"), BIdent("NAT")), Assign("n", BIdent("v"))),),
    )
    domains = derive_domains(machine, {"Set.v": (0, 2)})
    assert domains.for_operation("Set")["v"] == (0, 1, 2)
    assert explore(machine, domains) == Verified(states_visited=3, transitions_fired=9)


def test_untyped_parameter_is_reported():
    machine = BMachine(
        name="Loose",
        variables=("n",),
        invariant=(PMember(BIdent("n"), BIdent("NAT")),),
        initialisation=Assign("n", BInt(0)),
        operations=(BOperation("Set", (), ("v",), None, Assign("n", BIdent("v"))),),
    )
    with pytest.raises(ConfigurationError, match="untyped"):
        derive_domains(machine)
