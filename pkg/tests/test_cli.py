import json
import os

import jsonschema
import pytest

import config
import majorana_cli as cli
import settings_manager
from debug_config import DebugConfig
from majorana_errors import ResourceError


@pytest.fixture(autouse=True)
def isolated_settings(settings_file):
    return settings_file


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def check_report(command, output):
    report = json.loads(output)
    with open(os.path.join(config.SCHEMA_DIR, f"{command}.json"), "r", encoding="utf-8") as f:
        jsonschema.validate(report, json.load(f))
    return report


def test_every_command_has_a_schema():
    for command in cli.COMMANDS:
        assert os.path.exists(os.path.join(config.SCHEMA_DIR, f"{command}.json")), command


@pytest.mark.parametrize("backend", cli.BACKENDS)
def test_magic_square(capsys, backend):
    code, out, err = run_cli(capsys, "magic-square", "--backend", backend, "--trials", "200", "--seed", "3")
    assert code == cli.EXIT_OK
    report = check_report("magic-square", out)
    assert report["quantum_value"] == 9
    assert report["parity_strategy_value"] == 7
    assert report["backend_matches_exact"]
    assert report["sampled"]["G_hat"] == pytest.approx(9.0)
    assert report["seed"] == 3
    assert "PASS" in err


def test_magic_square_exact(capsys):
    code, out, _ = run_cli(capsys, "magic-square", "--exact")
    assert code == cli.EXIT_OK
    report = check_report("magic-square", out)
    assert "sampled" not in report
    assert len(report["distribution"]["entries"]) == 72


def test_classical_bound(capsys):
    code, out, _ = run_cli(capsys, "classical-bound", "--threads", "2")
    assert code == cli.EXIT_OK
    report = check_report("classical-bound", out)
    assert report["bound"] == 7
    assert report["identical_bound"] == 3
    assert report["checked"] == 512 * 512


def test_four_pair(capsys):
    code, out, _ = run_cli(capsys, "four-pair")
    assert code == cli.EXIT_OK
    report = check_report("four-pair", out)
    assert report["lhv_matches"] and report["simulation_matches"]


def test_ghz_scan(capsys):
    code, out, _ = run_cli(capsys, "ghz-scan", "--pairs", "3", "--trials", "20")
    assert code == cli.EXIT_OK
    report = check_report("ghz-scan", out)
    assert report["scans"]["3"]["verdict"] == "pass"
    assert report["scans"]["3"]["noncommuting"] == 0


def test_ghz_encoding(capsys):
    code, out, _ = run_cli(capsys, "ghz-encoding", "--modes-per-party", "4", "--trials", "20")
    assert code == cli.EXIT_OK
    report = check_report("ghz-encoding", out)
    assert report["canonical"]["verdict"] == "obstructed"
    assert report["exhaustive"]["verdict"] == "obstructed"
    assert report["exhaustive"]["sampled"] == 20
    assert report["exhaustive"]["rejected_pairs"] == 75


@pytest.mark.parametrize("scenario", ["I", "II"])
def test_teleport(capsys, scenario):
    code, out, _ = run_cli(capsys, "teleport", "--scenario", scenario, "--trials", "0", "--backend", "gaussian")
    assert code == cli.EXIT_OK
    report = check_report("teleport", out)
    assert report["total_variation"] == "0"
    assert report["discrimination_probability"] == "3/4"
    assert report["two_sample_pvalue"] is None
    assert len(report["example_run"]) == 7


def test_dense_code(capsys):
    code, out, _ = run_cli(capsys, "dense-code")
    assert code == cli.EXIT_OK
    report = check_report("dense-code", out)
    assert report["round_trip"]["successes"] == 4
    assert report["unassisted"]["bits"] == 1.0


def test_noise_sweep(capsys):
    code, out, _ = run_cli(capsys, "noise-sweep", "--points", "11", "--trials", "100")
    assert code == cli.EXIT_OK
    report = check_report("noise-sweep", out)
    assert report["bracket"] == [0.0, 0.1]
    assert report["threshold"] == pytest.approx(0.0913, abs=1e-4)
    assert all(anchor["match"] for anchor in report["oracle_anchors"])


def test_noise_sweep_csv(capsys):
    code, out, _ = run_cli(capsys, "noise-sweep", "--points", "6", "--trials", "0", "--format", "csv")
    assert code == cli.EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "eps,G,G_mc,stderr"
    assert len(lines) == 7


def test_source_gen(capsys, tmp_path):
    alice, bob = tmp_path / "a.tape", tmp_path / "b.tape"
    code, out, _ = run_cli(capsys, "source-gen", "--rounds", "5", "--alice-tape", str(alice),
                           "--bob-tape", str(bob))
    assert code == cli.EXIT_OK
    report = check_report("source-gen", out)
    assert report["records_per_tape"] == 45
    assert len(alice.read_text().splitlines()) == 45


def test_crosscheck(capsys):
    code, out, _ = run_cli(capsys, "crosscheck", "--pairs", "2", "--depth", "2", "--trials", "3")
    assert code == cli.EXIT_OK
    report = check_report("crosscheck", out)
    assert report["verdict"] == "PASS"


# ---------------------------------------------------------------------------
# Usage errors
# ---------------------------------------------------------------------------

def test_unknown_flag(capsys):
    code, out, _ = run_cli(capsys, "magic-square", "--bogus")
    assert code == cli.EXIT_USAGE
    assert out == ""


def test_unknown_command(capsys):
    assert run_cli(capsys, "teleport-everything")[0] == cli.EXIT_USAGE


def test_negative_trials(capsys):
    code, _, err = run_cli(capsys, "ghz-scan", "--trials", "-1")
    assert code == cli.EXIT_USAGE
    assert "--trials" in err


def test_csv_only_for_sweeps(capsys):
    code, _, err = run_cli(capsys, "four-pair", "--format", "csv")
    assert code == cli.EXIT_USAGE
    assert "noise-sweep" in err


def test_quantum_party_needs_a_tape(capsys):
    assert run_cli(capsys, "serve", "alice", "--mode", "quantum")[0] == cli.EXIT_USAGE


def test_scan_size_limit_is_a_usage_error(capsys):
    assert run_cli(capsys, "ghz-scan", "--pairs", "9", "--trials", "1")[0] == cli.EXIT_USAGE


def test_threads_default_comes_from_settings(settings_file):
    settings_file.write_text(json.dumps({"threads": 3}))
    settings_manager.reset_cache()
    args = cli.build_parser().parse_args(["classical-bound"])
    assert args.threads == 3


def test_same_flags_give_identical_bytes(capsys):
    argv = ("noise-sweep", "--points", "6", "--trials", "50", "--seed", "9")
    first = run_cli(capsys, *argv)[1]
    second = run_cli(capsys, *argv)[1]
    assert first == second
    assert json.loads(first)["seed"] == 9


@pytest.mark.slow
def test_larger_crosscheck(capsys):
    code, out, _ = run_cli(capsys, "crosscheck", "--pairs", "4", "--depth", "3", "--seed", "7", "--trials", "20")
    assert code == cli.EXIT_OK
    assert json.loads(out)["mismatches"] == 0


def test_backend_is_rejected_where_unused(capsys):
    code, out, err = run_cli(capsys, "ghz-scan", "--backend", "oracle", "--trials", "1")
    assert code == cli.EXIT_USAGE
    assert out == ""
    assert "--backend" in err


def test_oracle_mode_cap_checked_up_front(capsys, monkeypatch):
    monkeypatch.setattr(config, "MAX_ORACLE_MODES", 10)
    args = cli.build_parser().parse_args(["teleport", "--backend", "oracle"])
    with pytest.raises(ResourceError):
        cli.RunConfig.from_args(args)
    code, out, err = run_cli(capsys, "teleport", "--backend", "oracle", "--trials", "0")
    assert code == cli.EXIT_USAGE
    assert "12 modes" in err
    # magic-square fits in ten modes
    assert cli.RunConfig.from_args(cli.build_parser().parse_args(["magic-square", "--backend", "oracle"]))


def test_default_backend():
    run = cli.RunConfig.from_args(cli.build_parser().parse_args(["crosscheck"]))
    assert run.backend == cli.DEFAULT_BACKEND


def test_debug_only_enables_one_subsystem(capsys):
    code, _, _ = run_cli(capsys, "dense-code", "--debug-only", "protocols")
    assert code == cli.EXIT_OK
    assert DebugConfig.protocols_enabled
    assert not DebugConfig.net_enabled
