import json
import subprocess
import sys

import pytest

from hawkmc.cli import main
from hawkmc.smc import wilson_interval


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_prints_a_table_and_json(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "check", "fixture:race", "--runs", "500", "--json", str(path))
    assert code == 0
    assert "t1_first" in out and "t2_first" in out
    doc = json.loads(path.read_text())
    assert doc["runs"] == 500 and doc["scheduler"] == "asap"
    assert [r["property"] for r in doc["results"]] == ["t1_first", "t2_first"]
    assert all("wall_time" not in r for r in doc["results"])


def test_check_json_is_byte_identical_across_runs_and_workers(capsys, tmp_path):
    texts = []
    for i, workers in enumerate(["1", "1", "4"]):
        p = tmp_path / f"r{i}.json"
        assert run(capsys, "check", "fixture:temperature", "--runs", "300", "--seed", "7",
                   "--workers", workers, "--json", str(p))[0] == 0
        texts.append(p.read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_single_run_gives_the_wilson_interval_at_n1(capsys):
    code, out, _ = run(capsys, "check", "fixture:race", "--runs", "1", "--json", "-")
    assert code == 0
    doc = json.loads(out[out.index("{"):])
    for r in doc["results"]:
        assert (r["lo"], r["hi"]) == pytest.approx(wilson_interval(r["k"], 1))
        assert r["hi"] - r["lo"] > 0.75


def test_simulate_is_seed_deterministic(capsys, tmp_path):
    csvs = []
    for seed in ("1", "1", "2"):
        code, out, _ = run(capsys, "simulate", "fixture:timer", "--seed", seed, "--horizon", "20")
        assert code == 0
        csvs.append(out.encode())
    assert csvs[0] == csvs[1] != csvs[2]
    assert csvs[0].splitlines()[0] == b"time,location,t,event"
    p = tmp_path / "t.csv"
    assert run(capsys, "simulate", "fixture:timer", "--seed", "1", "--horizon", "20", "--csv", str(p))[0] == 0
    assert p.read_bytes() == csvs[0]


def test_event_cap_is_a_runtime_error(capsys):
    code, _, err = run(capsys, "simulate", "fixture:energy", "--event-cap", "3")
    assert code == 4
    assert "simulator" in err and "3 events" in err


def test_malformed_model_is_a_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.hawk"
    bad.write_text("automaton a\nvar x\nloc l0 flow x = 1\ninit l0\n")
    code, _, err = run(capsys, "compose", str(bad))
    assert code == 2
    assert f"{bad}:3:13:" in err and "dsl" in err


def test_invalid_model_is_a_validation_error(capsys, tmp_path):
    bad = tmp_path / "neg.hawk"
    bad.write_text("automaton a\nvar x\nlabel k delay normal(8, 1)\nloc l0\nedge l0 -> l0 label k\ninit l0\n")
    code, _, err = run(capsys, "compose", str(bad))
    assert code == 3
    assert "negative-delay-support" in err


def test_bad_options_and_missing_inputs(capsys, tmp_path):
    assert run(capsys, "check", "fixture:race", "--runs", "0")[0] == 2
    assert run(capsys, "check", "fixture:race", "--confidence", "1.5")[0] == 2
    assert run(capsys, "check", "fixture:nothing")[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.blk"))[0] == 2
    lone = tmp_path / "lone.blk"
    lone.write_text("model m\nblock timer c(dist=dirac(1))\nwire t: c.out\n")
    code, _, err = run(capsys, "check", str(lone))
    assert code == 2 and "no properties" in err
    props = tmp_path / "p.props"
    props.write_text("prop q: <> nothere >= 1 within 5\n")
    code, _, err = run(capsys, "check", str(lone), str(props))
    assert code == 3 and "nothere" in err


def test_compose_emits_the_four_location_energy_automaton(capsys):
    code, out, err = run(capsys, "compose", "fixture:energy")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["locations"]) == 4
    assert "4 locations" in err
    code, raw, _ = run(capsys, "compose", "fixture:energy", "--no-prune")
    assert len(json.loads(raw)["locations"]) >= 4
    again = run(capsys, "compose", "fixture:energy")[1]
    assert again == out


def test_compose_can_emit_automaton_text(capsys):
    from hawkmc import parse_automaton
    code, out, _ = run(capsys, "compose", "fixture:temperature", "--emit", "hawk")
    assert code == 0
    assert len(parse_automaton(out).locations) == 3


def test_fixture_listing_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "fixtures", "list")
    assert code == 0
    names = [line.split()[0] for line in out.splitlines()]
    assert {"temperature", "energy", "race", "timer"} <= set(names)
    assert "0.875" in out
    code, out, _ = run(capsys, "fixtures", "export", str(tmp_path), "race")
    assert code == 0 and (tmp_path / "race.hawk").exists()
    code, _, _ = run(capsys, "check", str(tmp_path / "race.hawk"), str(tmp_path / "race.props"), "--runs", "50")
    assert code == 0
    assert run(capsys, "fixtures", "export", str(tmp_path), "nope")[0] == 2


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "hawkmc.cli", "fixtures", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "race" in proc.stdout
