import pytest

from scade2b import cli
from scade2b.services.b_parser import tokenize
from scade2b.utils.trace_format import parse_trace
from tests.conftest import FIXTURES, fixture_text


def run(*argv: str) -> int:
    return cli.main(["--log-level", "WARNING", *argv])


def test_translate_to_stdout(capsys):
    assert run("translate", str(FIXTURES / "appendix3.scade")) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert tokenize(out) == tokenize(fixture_text("appendix4.mch"))


def test_translate_to_file(tmp_path):
    target = tmp_path / "out" / "example.mch"
    code = run("translate", str(FIXTURES / "appendix1.scade"), "-o", str(target), "--machine-name", "Demo")
    assert code == cli.EXIT_OK
    assert target.read_text(encoding="utf-8").startswith("MACHINE Demo")


def test_unicode_flavor(capsys):
    run("translate", str(FIXTURES / "appendix1.scade"), "--flavor", "unicode")
    assert "∈" in capsys.readouterr().out


def test_unicode_switch_matches_the_flavor_option(capsys):
    source = str(FIXTURES / "appendix1.scade")
    assert run("translate", source, "--unicode") == cli.EXIT_OK
    switched = capsys.readouterr().out
    run("translate", source, "--flavor", "unicode")
    assert switched == capsys.readouterr().out
    assert "∈" in switched


def test_frontend_error_exit_code(capsys):
    assert run("translate", str(FIXTURES / "cyclic.scade")) == cli.EXIT_FRONTEND
    assert "x -> y -> x" in capsys.readouterr().err


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    assert run("translate", str(tmp_path / "nowhere.scade")) == cli.EXIT_TRANSLATION
    assert "cannot read" in capsys.readouterr().err


def test_conflicting_flags_are_rejected(capsys):
    source, trace = str(FIXTURES / "appendix1.scade"), str(FIXTURES / "experiment1.trace")
    code = run("simulate", source, "--trace", trace, "--seed", "3")
    assert code == cli.EXIT_TRANSLATION
    assert "either --trace or --seed" in capsys.readouterr().err


def test_simulate_equivalent(capsys):
    code = run("simulate", str(FIXTURES / "appendix1.scade"), "--trace", str(FIXTURES / "experiment1.trace"))
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[-1] == "equivalent: 5 cycle(s) compared"
    assert out[1].startswith("cycle=2 output=[1,4,9,16,25] fby_out=0")


def test_simulate_mutant_diverges(capsys):
    code = run(
        "simulate",
        str(FIXTURES / "appendix1.scade"),
        "--trace",
        str(FIXTURES / "experiment1.trace"),
        "--mutate",
        "drop-shift:1",
    )
    assert code == cli.EXIT_DIVERGENCE
    assert capsys.readouterr().out.splitlines()[-1].startswith("divergent at cycle 3: mapped-state store")


def test_simulate_one_side_prints_the_state(capsys):
    source, trace = str(FIXTURES / "appendix1.scade"), str(FIXTURES / "experiment1.trace")
    code = run("simulate", source, "--trace", trace, "--side", "scade")
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 5
    assert lines[-1].endswith("store=[2,3,4] sm_state=stateA")


def test_simulate_runtime_error_on_both_sides(tmp_path, capsys):
    trace = tmp_path / "overflow.trace"
    trace.write_text("input=[16,0,0,0,0] fby_in=0\ninput=[1,1,1,1,1] fby_in=0\n", encoding="utf-8")
    code = run("simulate", str(FIXTURES / "appendix1.scade"), "--trace", str(trace))
    assert code == cli.EXIT_RUNTIME
    captured = capsys.readouterr()
    assert captured.out.splitlines()[-1] == "equivalent: 1 cycle(s) compared"
    assert "runtime error at cycle 1 on both sides: RangeError" in captured.err


def test_simulate_generated_trace(capsys):
    code = run("simulate", str(FIXTURES / "appendix1.scade"), "--seed", "4", "--cycles", "12", "--domain", "input=0..15")
    assert code == cli.EXIT_OK
    assert capsys.readouterr().out.splitlines()[-1] == "equivalent: 12 cycle(s) compared"


def test_check_violation_and_export(tmp_path, capsys):
    export = tmp_path / "cx.trace"
    code = run("check", str(FIXTURES / "appendix3.scade"), "--export", str(export))
    assert code == cli.EXIT_VIOLATION
    out = capsys.readouterr().out
    assert out.startswith("invariant violation after 3 step(s)")
    trace = parse_trace(export.read_text(encoding="utf-8"))
    assert [cycle["input_event"].name for cycle in trace.cycles] == ["ConnectRequest", "ConnectAck", "DisconnectRequest"]


def test_check_verified(capsys):
    assert run("check", str(FIXTURES / "appendix5.scade")) == cli.EXIT_OK
    assert capsys.readouterr().out.strip() == "4 states, verified (16 transitions)"


def test_check_bound(capsys):
    assert run("check", str(FIXTURES / "appendix5.scade"), "--max-states", "2") == cli.EXIT_BOUND
    assert capsys.readouterr().out.startswith("bound exceeded")


def test_check_needs_domains_for_wide_parameters(capsys):
    assert run("check", str(FIXTURES / "appendix1.scade")) == cli.EXIT_TRANSLATION
    assert "--domain" in capsys.readouterr().err


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        cli.main(["verify", "x.scade"])
