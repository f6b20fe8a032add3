import pytest

from scade2b.core.errors import ConfigurationError
from scade2b.models.b_ast import BInt, FunctionOverride, walk_substitution
from scade2b.services.mutation_service import drop_shift_assignment
from scade2b.services.pipeline_service import compile_source, parse_mutation


def _overrides(machine, name):
    body = machine.operation(name).body
    return [
        (s.name, s.index.value)
        for s in walk_substitution(body)
        if isinstance(s, FunctionOverride) and isinstance(s.index, BInt)
    ]


def test_drop_shift_removes_one_cell(compute_sum):
    before = _overrides(compute_sum.machine, "ComputeSum")
    mutant = drop_shift_assignment(compute_sum.machine, None, 1)
    after = _overrides(mutant, "ComputeSum")
    assert ("store", 1) in before
    assert ("store", 1) not in after
    assert len(after) == len(before) - 1
    assert mutant.variables == compute_sum.machine.variables


def test_the_original_machine_is_untouched(compute_sum):
    drop_shift_assignment(compute_sum.machine, "store", 0)
    assert ("store", 0) in _overrides(compute_sum.machine, "ComputeSum")


def test_last_cell_has_no_shift(compute_sum):
    with pytest.raises(ConfigurationError, match="no assignment"):
        drop_shift_assignment(compute_sum.machine, "store", 2)


def test_buffer_must_be_named_when_ambiguous():
    compiled = compile_source(
        """node A(x: int32) returns (y: int32)
let
  y = fby(x; 2; 0);
tel
node B(x: int32) returns (y: int32)
let
  y = fby(x; 2; 0);
tel
"""
    )
    with pytest.raises(ConfigurationError, match="cannot pick"):
        drop_shift_assignment(compiled.machine, None, 0)
    mutant = drop_shift_assignment(compiled.machine, "b_store", 0)
    assert _overrides(mutant, "A") == _overrides(compiled.machine, "A")


@pytest.mark.parametrize(
    "text, expected",
    [("drop-shift:0", (None, 0)), ("drop-shift:store:1", ("store", 1)), (" drop-shift:2 ", (None, 2))],
)
def test_parse_mutation(text, expected):
    assert parse_mutation(text) == expected


@pytest.mark.parametrize("text", ["drop-shift", "drop-shift:x", "swap:0"])
def test_parse_mutation_rejects(text):
    with pytest.raises(ConfigurationError):
        parse_mutation(text)
