import csv
import io
import json

import pytest

from starcc import cli


def run(argv, capsys):
    """Run the CLI in-process, return (exit_code, stdout + stderr)."""
    code = cli.main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out + captured.err


@pytest.fixture(autouse=True)
def isolated_outdir(tmp_path, monkeypatch):
    # keep every test away from ./certificates and from each other
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "certs"))
    return tmp_path


# ---------------------------------------------------------------------------
# eval


def test_eval_full_residual_text(capsys):
    code, out = run(["eval", "1", "1"], capsys)
    assert code == 0
    assert "lambda_11" in out and "lambda_52" in out
    assert "spread" in out and "y1" in out


def test_eval_single_index(capsys):
    code, out = run(["eval", "0.6119148403464306", "1.0", "--index", "31"],
                    capsys)
    assert code == 0
    # 15 significant digits in text mode
    assert "1.37245721225591" in out


def test_eval_json(capsys):
    code, out = run(["eval", "1.17", "0.93", "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["lambda"]["11"] == pytest.approx(1.9129492173729385, rel=1e-14)
    assert doc["y1"] == pytest.approx(0.03833568330204806, rel=1e-12)


def test_eval_outside_domain_exits_2(capsys):
    code, out = run(["eval", "0.9", "0.1"], capsys)
    assert code == cli.EXIT_DOMAIN


def test_eval_unknown_index_exits_2(capsys):
    code, _ = run(["eval", "1", "1", "--index", "12"], capsys)
    assert code == cli.EXIT_DOMAIN  # (1,2) is the normalized slot, not a lambda


# ---------------------------------------------------------------------------
# hessian


def test_hessian_passes_at_default_step(capsys):
    code, out = run(["hessian", "--json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "PASS"
    assert doc["richardson"] is True
    assert max(doc["relative_error"].values()) < 1e-5
    assert doc["closed_form"]["det"] == pytest.approx(602.805106650365)
    assert doc["leading_minors_positive"] is True


def test_hessian_reports_failure_for_crude_step(capsys):
    code, out = run(["hessian", "--step", "1e-2", "--no-richardson", "--json"],
                    capsys)
    assert code == 0  # a FAIL verdict is still a successful diagnostic run
    doc = json.loads(out)
    assert doc["verdict"] == "FAIL"
    assert doc["richardson"] is False
    assert max(doc["relative_error"].values()) > 1e-5


# ---------------------------------------------------------------------------
# certify / verify


def test_certify_single_region_writes_file(tmp_path, capsys):
    code, out = run(["certify", "J4", "--width", "0.05"], capsys)
    assert code == 0
    path = tmp_path / "certs" / "J4.json"
    assert path.exists()
    doc = json.loads(path.read_text())
    assert doc["region"] == "J4"
    assert len(doc["leaves"]) == 46
    assert "min_gap" in out

    code, out = run(["verify", path], capsys)
    assert code == 0
    assert "ACCEPT" in out


def test_certify_unknown_region_exits_2(capsys):
    code, _ = run(["certify", "J99"], capsys)
    assert code == cli.EXIT_DOMAIN


def test_certify_budget_exhaustion_exits_4(capsys):
    code, out = run(["certify", "J7", "--width", "0.05", "--max-depth", "2"],
                    capsys)
    assert code == cli.EXIT_BUDGET


def test_verify_rejects_tampered_bound(tmp_path, capsys):
    run(["certify", "J3", "--width", "0.1"], capsys)
    path = tmp_path / "certs" / "J3.json"
    doc = json.loads(path.read_text())
    doc["leaves"][0][5] = (float.fromhex(doc["leaves"][0][5]) * 2.0).hex()
    path.write_text(json.dumps(doc))
    code, out = run(["verify", path], capsys)
    assert code == cli.EXIT_VERIFY
    assert "REJECT" in out
    assert "r3=" in out  # the offending leaf is identified by its box


def test_verify_rejects_truncated_json(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"format": "starcc-certificate/1", "kind": "ineq')
    code, out = run(["verify", bad], capsys)
    assert code == cli.EXIT_VERIFY
    assert "REJECT" in out


def test_verify_missing_file_exits_2(tmp_path, capsys):
    code, _ = run(["verify", tmp_path / "nope.json"], capsys)
    assert code == cli.EXIT_DOMAIN


def test_certify_region_without_excision_fails_next_to_the_root(capsys):
    code, out = run(
        ["certify", "J16", "--width", "0.05", "--delta", "0",
         "--max-depth", "6"],
        capsys,
    )
    assert code == cli.EXIT_BUDGET


def test_config_file_flag_and_env_precedence(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "max_box_width": 0.1,
        "output_dir": str(tmp_path / "from-config"),
    }))
    # env beats config file for the output dir...
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "from-env"))
    code, _ = run(["certify", "J4", "--config", cfg], capsys)
    assert code == 0
    assert (tmp_path / "from-env" / "J4.json").exists()
    assert not (tmp_path / "from-config").exists()
    # ...and an explicit flag beats both
    code, _ = run(["certify", "J4", "--config", cfg,
                   "--output", tmp_path / "from-flag"], capsys)
    assert code == 0
    assert (tmp_path / "from-flag" / "J4.json").exists()
    # width came from the config file both times
    doc = json.loads((tmp_path / "from-flag" / "J4.json").read_text())
    assert doc["max_box_width"] == float(0.1).hex()


def test_config_file_with_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"max_box_widht": 0.1}))
    code, _ = run(["certify", "J4", "--config", cfg], capsys)
    assert code == cli.EXIT_DOMAIN


# ---------------------------------------------------------------------------
# scan


def test_scan_reports_one_root(tmp_path, capsys):
    out_file = tmp_path / "scan.json"
    code, out = run(
        ["scan", "--window", 0.5, 1.5, 0.5, 1.5, "--starts", 200,
         "--seed", 2, "--out", out_file],
        capsys,
    )
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert len(doc["roots"]) == 1
    assert doc["roots"][0]["r3"] == pytest.approx(1.0, abs=1e-8)


def test_scan_bad_window_exits_2(capsys):
    code, _ = run(["scan", "--window", 2, 1, 0.5, 1.5, "--starts", 10], capsys)
    assert code == cli.EXIT_DOMAIN


# ---------------------------------------------------------------------------
# plotdata


def _rows(out: str):
    return list(csv.DictReader(io.StringIO(out)))


def test_plotdata_regions_csv(capsys):
    code, out = run(["plotdata", "regions", "25"], capsys)
    assert code == 0
    rows = _rows(out)
    assert set(rows[0]) == {"r3", "r5", "region"}
    seen = {r["region"] for r in rows}
    assert "J1" in seen and "J16" in seen


def test_plotdata_gap_csv_is_positive_on_j1(capsys):
    code, out = run(["plotdata", "gap-J1", "20"], capsys)
    assert code == 0
    rows = _rows(out)
    assert set(rows[0]) == {"r3", "r5", "value", "check"}
    vals = [float(r["value"]) for r in rows]
    assert vals and min(vals) > 0.0
    checks = {r["check"] for r in rows}
    assert "lambda_11 < lambda_31" in checks
    assert "lambda_41 < lambda_11" in checks  # the corner zone shows up


def test_plotdata_spread_csv(capsys):
    code, out = run(
        ["plotdata", "spread", "15", "--window", 0.9, 1.1, 0.9, 1.1], capsys
    )
    assert code == 0
    rows = _rows(out)
    assert set(rows[0]) == {"r3", "r5", "spread", "y1"}
    best = min(rows, key=lambda r: float(r["spread"]))
    assert abs(float(best["r3"]) - 1.0) < 0.1


def test_plotdata_unknown_kind_exits_2(capsys):
    code, _ = run(["plotdata", "wat", "10"], capsys)
    assert code == cli.EXIT_DOMAIN


# ---------------------------------------------------------------------------
# the full bundle round trip (kept cheap with a coarse width)


def test_bundle_certify_verify_round_trip(tmp_path, capsys):
    code, out = run(["certify", "all", "--width", "0.1", "--threads", "2"],
                    capsys)
    assert code == 0
    assert "UNIQUE-IN-WINDOW" in out
    bundle = tmp_path / "certs"
    names = {p.name for p in bundle.iterdir()}
    assert names == {f"J{i}.json" for i in range(1, 17)} | {
        "local.json", "manifest.json"}

    code, out = run(["verify", bundle], capsys)
    assert code == 0
    assert "ACCEPT" in out and "local" in out

    # flip one annulus bound in the local certificate -> bundle must fail
    local = bundle / "local.json"
    doc = json.loads(local.read_text())
    doc["annulus"][5][5] = (float.fromhex(doc["annulus"][5][5]) * 4.0).hex()
    local.write_text(json.dumps(doc))
    code, out = run(["verify", bundle], capsys)
    assert code == cli.EXIT_VERIFY
    assert "REJECT" in out
