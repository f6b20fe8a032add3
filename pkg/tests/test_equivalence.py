import pytest

from scade2b.core.errors import ConfigurationError, DiagnosticKind
from scade2b.models.runtime import DivergenceKind, Trace
from scade2b.models.values import ArrayValue, EnumMember
from scade2b.services.equivalence_service import generate_trace, run_b, run_lockstep, run_scade
from scade2b.services.pipeline_service import compile_source, resolve_trace, simulate
from tests.conftest import compile_fixture


def test_experiment_trace_is_equivalent(compute_sum, experiment_trace):
    report = simulate(compute_sum, experiment_trace)
    assert report.equivalent
    assert report.cycles_compared == 5
    assert report.divergence is None
    assert [r.b_outputs["fby_out"] for r in report.records] == [0, 0, 0, 0, 1]
    assert report.while_diagnostics == ()


@pytest.mark.parametrize("mutation, cycle", [("drop-shift:0", 4), ("drop-shift:store:1", 3)])
def test_dropped_shift_assignment_is_caught_on_the_buffer(compute_sum, experiment_trace, mutation, cycle):
    report = simulate(compute_sum, experiment_trace, mutation=mutation)
    assert not report.equivalent
    divergence = report.divergence
    assert (divergence.cycle, divergence.kind, divergence.name) == (cycle, DivergenceKind.MAPPED_STATE, "store")


def test_unknown_shift_cell_is_rejected(compute_sum, experiment_trace):
    with pytest.raises(ConfigurationError):
        simulate(compute_sum, experiment_trace, mutation="drop-shift:7")


def test_protocol_traces_agree(protocol_safe):
    events = ["ConnectRequest", "ConnectAck", "DisconnectRequest", "DisconnectAck", "ConnectRequest"]
    trace = Trace(tuple({"input_event": EnumMember(e)} for e in events))
    report = run_lockstep(protocol_safe.program, protocol_safe.translation, trace)
    assert report.equivalent
    assert report.cycles_compared == 5


def test_same_runtime_error_on_both_sides_ends_the_run(compute_sum):
    trace = Trace(({"input": ArrayValue((16, 0, 0, 0, 0)), "fby_in": 0}, {"input": ArrayValue((1,) * 5), "fby_in": 0}))
    report = simulate(compute_sum, trace)
    assert report.equivalent
    assert report.cycles_compared == 1
    assert report.records[-1].error is DiagnosticKind.RANGE_ERROR


def test_missing_input_on_both_sides(compute_sum):
    report = simulate(compute_sum, Trace(({"fby_in": 0},)))
    assert report.equivalent
    assert report.records[0].error is DiagnosticKind.MISSING_INPUT


def test_generated_traces_are_reproducible(compute_sum):
    node = compute_sum.program.node("ComputeSum")
    first = generate_trace(node, seed=7, length=20, bounds={"input": (0, 15)})
    again = generate_trace(node, seed=7, length=20, bounds={"input": (0, 15)})
    assert first == again
    assert len(first) == 20
    for cycle in first.cycles:
        assert all(0 <= cell <= 15 for cell in cycle["input"].cells)
        assert 0 <= cycle["fby_in"] <= 255


def test_generated_enum_inputs_come_from_the_type(protocol_safe):
    trace = generate_trace(protocol_safe.program.node("HandleEvent"), seed=1, length=50)
    members = {cycle["input_event"].name for cycle in trace.cycles}
    assert members <= {"ConnectRequest", "ConnectAck", "DisconnectRequest", "DisconnectAck"}


def test_empty_bound_is_rejected(compute_sum):
    with pytest.raises(ConfigurationError):
        generate_trace(compute_sum.program.node("ComputeSum"), seed=0, length=1, bounds={"input": (3, 1)})


@pytest.mark.parametrize(
    "name, bounds",
    [("appendix1.scade", {"input": (0, 15)}), ("appendix5.scade", None)],
)
def test_random_traces_run_in_lock_step(name, bounds):
    compiled = compile_fixture(name)
    for seed in range(100):
        trace = resolve_trace(compiled, seed=seed, cycles=20, bounds=bounds)
        report = simulate(compiled, trace)
        assert report.equivalent, (seed, report.divergence)
        assert report.cycles_compared == 20
        assert report.while_diagnostics == ()


def test_single_side_runs_report_the_same_state(compute_sum, experiment_trace):
    scade = list(run_scade(compute_sum.program, compute_sum.translation, experiment_trace))
    b = list(run_b(compute_sum.translation, experiment_trace))
    assert [state for _, _, state in scade] == [state for _, _, state in b]
    assert [outputs for _, outputs, _ in scade] == [outputs for _, outputs, _ in b]
    assert b[-1][2]["store"] == ArrayValue((2, 3, 4))


@pytest.mark.parametrize("depth", [1, 2, 3, 4, 5])
def test_fby_delays_by_its_depth(depth):
    compiled = compile_source(
        f"""node Delay(u: int32) returns (o: int32)
let
  o = fby(u; {depth}; 7);
tel
"""
    )
    for seed in range(50):
        trace = resolve_trace(compiled, seed=seed, cycles=30, bounds={"u": (-100, 100)})
        report = simulate(compiled, trace)
        assert report.equivalent
        inputs = [cycle["u"] for cycle in trace.cycles]
        expected = [7 if t < depth else inputs[t - depth] for t in range(30)]
        assert [r.scade_outputs["o"] for r in report.records] == expected


def test_empty_trace_is_trivially_equivalent(compute_sum):
    report = simulate(compute_sum, Trace(()))
    assert report.equivalent
    assert report.cycles_compared == 0


def test_generated_trace_shape_and_seed_sensitivity(compute_sum):
    node = compute_sum.program.node("ComputeSum")
    trace = generate_trace(node, seed=0, length=3)
    assert len(trace) == 3
    for cycle in trace.cycles:
        assert len(cycle["input"]) == 5
        assert all(0 <= cell <= 255 for cell in cycle["input"].cells)
        assert 0 <= cycle["fby_in"] <= 255
    assert generate_trace(node, seed=0, length=3) == trace
    assert generate_trace(node, seed=1, length=3) != trace
