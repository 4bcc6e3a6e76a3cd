import io

import pytest

from app.cli import EXIT_CLEAN, EXIT_ERROR, EXIT_RACES, main
from app.services.fixtures import get_fixture, line_event
from app.services.trace_parser import serialize
from app.services.tracegen import gen_equality_trace


def run_cli(*argv):
    out = io.StringIO()
    code = main(["--log-level", "WARNING", *argv], out=out)
    return code, out.getvalue().splitlines()


@pytest.fixture
def swappable_file(tmp_path):
    path = tmp_path / "swappable.std"
    code, _ = run_cli("generate", "--fixture", "swappable", "-o", str(path))
    assert code == EXIT_CLEAN
    return path


def test_analyze_pairs_both_detectors():
    code, lines = run_cli("analyze", "--fixture", "swappable", "--detector", "both", "--pairs")
    assert code == EXIT_RACES
    assert "RACE|wcp|L1|L8|count=1|mindist=7|ex=0,7|sound=1" in lines
    assert not [line for line in lines if line.startswith("RACE|hb|")]
    assert "wcp.races=1" in lines
    assert "hb.races=0" in lines
    assert not [line for line in lines if line.startswith("wall_time_s")]


def test_analyze_clean_trace():
    code, lines = run_cli("analyze", "--fixture", "conflict_then_read", "--pairs")
    assert code == EXIT_CLEAN
    assert "wcp.flags=0" in lines


def test_streaming_analysis_prints_flags(swappable_file):
    code, lines = run_cli("analyze", str(swappable_file))
    assert code == EXIT_RACES
    assert "FLAG|wcp|7|t2|r|y|L8" in lines
    assert "events=8" in lines


def test_timestamp_dump():
    code, lines = run_cli("analyze", "--fixture", "swappable", "--detector", "both", "--dump-timestamps")
    assert lines[0] == "0|t1|C=[1,0]|P=[0,0]|H=[1,0]"
    assert lines[1] == "HB|0|t1|C=[1,0]"
    assert "7|t2|C=[0,2]|P=[0,0]|H=[1,2]" in lines
    assert "HB|7|t2|C=[1,2]" in lines


def test_metrics_file(tmp_path):
    metrics = tmp_path / "metrics.txt"
    run_cli("analyze", "--fixture", "swappable", "--metrics", str(metrics))
    content = metrics.read_text().splitlines()
    assert "wcp.max_queue_load=2" in content
    assert "wcp.max_queue_load_pct=25.00" in content
    assert any(line.startswith("wall_time_s=") for line in content)


def test_output_is_deterministic(swappable_file):
    first = run_cli("analyze", str(swappable_file), "--pairs", "--detector", "both")
    second = run_cli("analyze", str(swappable_file), "--pairs", "--detector", "both")
    assert first == second


def test_validate(tmp_path):
    bad = tmp_path / "bad.std"
    bad.write_text("t1|acq|l\nt2|acq|l\n")
    code, lines = run_cli("validate", str(bad))
    assert code == EXIT_RACES
    assert lines[0].startswith("VALID|ok=0")

    code, lines = run_cli("validate", "--fixture", "gadget_pair")
    assert code == EXIT_CLEAN
    assert lines == ["VALID|ok=1|events=30|violations=0"]


def test_parse_and_io_errors(tmp_path):
    broken = tmp_path / "broken.std"
    broken.write_text("t1|lock|l\n")
    assert run_cli("analyze", str(broken))[0] == EXIT_ERROR
    assert run_cli("analyze", str(tmp_path / "missing.std"))[0] == EXIT_ERROR


@pytest.mark.parametrize("command", [["analyze"], ["analyze", "--pairs"], ["validate"], ["oracle"]])
def test_undecodable_input_is_an_error(tmp_path, command):
    bad = tmp_path / "bad.std"
    bad.write_bytes(b"T1|w|x\nT2|r|\xff\xfe\n")
    assert run_cli(*command, str(bad))[0] == EXIT_ERROR


def test_oracle():
    trace = get_fixture("sync_chain")
    i, j = line_event(trace, 3), line_event(trace, 12)
    code, lines = run_cli("oracle", "--fixture", "sync_chain")
    assert code == EXIT_RACES
    assert f"PREC|CPprec|{i}|{j}" in lines
    assert f"PREC|WCPprec|{i}|{j}" not in lines
    assert f"ORACLE_RACE|WCPle|{i}|{j}" in lines


def test_oracle_bound():
    assert run_cli("oracle", "--fixture", "swappable", "--bound", "3")[0] == EXIT_ERROR


def test_generate_gadget():
    code, lines = run_cli("generate", "--gen-bits", "01,01")
    assert code == EXIT_CLEAN
    assert "\n".join(lines) + "\n" == serialize(gen_equality_trace("01", "01"))
    assert run_cli("generate", "--gen-bits", "01,1")[0] == EXIT_ERROR


def test_generate_random_is_reproducible():
    args = ("generate", "--gen-random", "--seed", "5", "--events", "30", "--threads", "3")
    first, second = run_cli(*args), run_cli(*args)
    assert first == second
    assert len(first[1]) == 30


def test_generate_scaling():
    code, lines = run_cli("generate", "--gen-scaling", "500", "--threads", "4", "--locks", "4")
    assert code == EXIT_CLEAN
    assert len(lines) == 500


def test_unknown_fixture_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli("analyze", "--fixture", "no_such_trace")
    assert exc.value.code == 2
