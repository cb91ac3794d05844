import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from mgregion.cli import EXIT_CHECK, EXIT_INPUT, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_region_line_breakpoints(capsys):
    code, out, _ = run(capsys, "region", "--topo", "wyner", "--coop", "both", "--model", "1",
                       "--rho", "0.8", "--rhof", "0.6", "--D", "10")
    assert code == EXIT_OK
    doc = json.loads(out)
    outer = doc["regions"]["outer"]["vertices"]
    expected = [[0, 0], [0.24, 0], [0.24, 0.5452], [0, 0.7852]]
    assert np.allclose(outer, expected, atol=1e-4)
    assert set(doc["regions"]) >= {"inner adaptive", "inner nonadaptive", "outer"}
    assert doc["coefficients"]["nonadaptive"] == 1.0


def test_region_hex_legend(capsys):
    code, out, _ = run(capsys, "region", "--topo", "hex", "--coop", "rx", "--model", "2",
                       "--rho", "0.8", "--rhof", "0.1", "--Dinf")
    coeffs = json.loads(out)["coefficients"]
    assert code == EXIT_OK
    assert coeffs["adaptive"] == pytest.approx(3.98, abs=0.01)
    assert coeffs["nonadaptive"] == pytest.approx(18)
    assert "outer" not in json.loads(out)["regions"]


@pytest.mark.parametrize("argv,needle", [
    (["region", "--rho", "1.3"], "rho"),
    (["region", "--topo", "hex", "--D", "4"], "--Dinf"),
    (["region", "--D", "3"], "even"),
    (["topology", "--topo", "wyner", "--K", "0"], "K"),
    (["verify", "--only", "nonsense"], "nonsense"),
    (["simulate", "--trials", "1"], "trials"),
    (["region", "--coop", "rx", "--rho", "1.0"], "rho"),
])
def test_input_errors(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert needle in err


def test_argparse_errors_use_input_code():
    with pytest.raises(SystemExit) as exc:
        main(["region", "--D", "4", "--Dinf"])
    assert exc.value.code == EXIT_INPUT


def test_simulate_passes_against_exact_targets(capsys):
    code, out, _ = run(capsys, "simulate", "--K", "1000", "--trials", "30", "--seed", "3")
    row = json.loads(out)["rows"][0]
    assert code == EXIT_OK and row["passed"]
    assert {"su vs exact", "sum vs exact", "sum vs published"} <= set(row["comparisons"])


def test_simulate_reports_published_mismatch_without_failing(capsys):
    code, out, _ = run(capsys, "simulate", "--coop", "rx", "--K", "2000", "--trials", "30")
    row = json.loads(out)["rows"][0]
    assert code == EXIT_OK
    assert not row["comparisons"]["sum vs published"]["passed"]


def test_workers_byte_identical(tmp_path):
    outs = []
    for w in (1, 4):
        f = tmp_path / f"w{w}.json"
        assert main(["simulate", "--model", "2", "--K", "400", "--trials", "17", "--workers", str(w),
                     "--out", str(f)]) == EXIT_OK
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_log_and_replay(tmp_path, capsys):
    log = tmp_path / "log.json"
    assert main(["simulate", "--coop", "rx", "--K", "50", "--trials", "5", "--log-trial", "3",
                 "--out", str(log)]) == EXIT_OK
    logged = json.loads(log.read_text())["rows"][0]["logged_trial"]
    (tmp_path / "trial.json").write_text(json.dumps({"logged_trial": logged}))
    code, out, _ = run(capsys, "simulate", "--coop", "rx", "--K", "50", "--replay", str(tmp_path / "trial.json"))
    doc = json.loads(out)
    assert code == EXIT_OK and doc["matches_log"] and doc["valid"]
    logged["tally"]["sum_phase"][0] += 1
    (tmp_path / "bad.json").write_text(json.dumps({"logged_trial": logged}))
    code, out, _ = run(capsys, "simulate", "--coop", "rx", "--K", "50", "--replay", str(tmp_path / "bad.json"))
    assert code == EXIT_CHECK and not json.loads(out)["matches_log"]
    code, _, _ = run(capsys, "simulate", "--coop", "rx", "--K", "51", "--replay", str(tmp_path / "trial.json"))
    assert code == EXIT_INPUT


def test_replay_reads_simulate_output(tmp_path, capsys):
    run_file = tmp_path / "run.json"
    assert main(["simulate", "--K", "200", "--trials", "10", "--log-trial", "3", "--out", str(run_file)]) == EXIT_OK
    code, out, _ = run(capsys, "simulate", "--K", "200", "--replay", str(run_file))
    assert code == EXIT_OK and json.loads(out)["matches_log"]
    (tmp_path / "empty.json").write_text("{}")
    code, _, err = run(capsys, "simulate", "--K", "200", "--replay", str(tmp_path / "empty.json"))
    assert code == EXIT_INPUT and "no logged realization" in err


def _argv_from_config(cfg):
    argv = [cfg["command"]]
    for k, v in cfg.items():
        if k in ("command", "schema") or v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        argv += [flag] if v is True else [flag, str(v)]
    return argv


@pytest.mark.parametrize("argv", [
    ["region", "--coop", "rx", "--model", "2", "--rho", "0.6", "--rhof", "0.3", "--D", "4"],
    ["simulate", "--topo", "hex", "--coop", "rx", "--W", "9", "--H", "9", "--trials", "4", "--seed", "8"],
    ["sweep", "--rho-grid", "0.3,0.7", "--rhof-grid", "0.2", "--format", "csv"],
])
def test_config_header_reproduces_run(capsys, argv):
    main(argv)
    first = capsys.readouterr().out
    if first.startswith("# config="):
        cfg = json.loads(first.splitlines()[0][len("# config="):])
    else:
        cfg = json.loads(first)["config"]
    main(_argv_from_config(cfg))
    assert capsys.readouterr().out == first


def test_csv_has_schema_column(capsys):
    code, out, _ = run(capsys, "region", "--format", "csv")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0].startswith("# config=")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert rows and all(r["schema"] == "1" for r in rows)
    assert {r["curve"] for r in rows} >= {"outer", "inner adaptive"}


def test_svg_output(capsys):
    code, out, _ = run(capsys, "region", "--format", "svg")
    assert code == EXIT_OK and out.lstrip().startswith("<svg") and "<desc>" in out


def test_verify_identity_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "identities", "--terms-tail", "1e-12")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["ok"]
    assert all(c["name"].startswith("identity ") for c in doc["checks"]) and len(doc["checks"]) == 16


def test_verify_passing_suites(capsys):
    code, out, _ = run(capsys, "verify", "--only", "validity,limits", "--draws", "200")
    assert code == EXIT_OK and json.loads(out)["ok"]


def test_verify_default_reports_known_failures(capsys):
    code, out, _ = run(capsys, "verify")
    failing = {c["name"] for c in json.loads(out)["checks"] if not c["ok"]}
    assert code == EXIT_CHECK
    assert failing == {
        "Tx+Rx model 2 six-term series vs corner",
        "Rx-only model 1 four-term series vs corner",
        "Rx-only model 1 combined series vs corner",
        "adaptive inner within outer (both, model 2)",
        "adaptive contains non-adaptive (rx, model 1)",
    }


def test_topology_command(capsys):
    code, out, _ = run(capsys, "topology", "--topo", "hex", "--W", "4", "--H", "3")
    topo = json.loads(out)["topology"]
    assert code == EXIT_OK and topo["K"] == 12 and "color_error" in topo
    code, out, _ = run(capsys, "topology", "--K", "4", "--format", "csv")
    assert out.splitlines()[1:] == ["schema,u,v", "1,1,2", "1,2,3", "1,3,4"]


def test_sweep_with_simulation(capsys):
    code, out, _ = run(capsys, "sweep", "--coop", "rx", "--rho-grid", "0.5", "--rhof-grid", "0.2,0.4",
                       "--simulate", "--K", "200", "--trials", "4")
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK and len(rows) == 2 and all("mc_se" in r for r in rows)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mgregion", "topology", "--K", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["topology"]["edges"] == [[1, 2]]
