import hashlib
import json

import pytest

from cltukit.cli import main
from cltukit.gf2 import BitWord

TOY_SPEC = "M=6\nP1,I\n"


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_code_check(tmp_path, capsys):
    assert run(tmp_path, "code", "--builtin", "ccsds-128-64", "--check") == 0
    out = capsys.readouterr().out
    assert "rank=64" in out
    assert "left=OK right=OK" in out


def test_code_encode_right_fixture(tmp_path, capsys):
    assert run(tmp_path, "code", "--encode-right", "FD15755D75559557") == 0
    assert "6FA5DE77A89F2981FD15755D75559557" in capsys.readouterr().out


def test_code_dump_g_matches_encoder(tmp_path, code):
    assert run(tmp_path, "code", "--dump-g", "right") == 0
    rows = (tmp_path / "g_right.txt").read_text().splitlines()
    msg = BitWord.from_hex("FD15755D75559557")
    acc = 0
    for i in range(64):
        if msg.bit(i):
            acc ^= int(rows[i], 2)
    assert BitWord(128, acc) == code.encode_right(msg)


def test_code_bad_spec_exit_2(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("M=4\nP9,I\n")
    assert run(tmp_path, "code", "--spec", str(bad), "--check") == 2


def test_unknown_builtin_exit_2(tmp_path):
    assert run(tmp_path, "code", "--builtin", "nope", "--check") == 2


def test_certify_ts_true(tmp_path, capsys):
    rc = run(tmp_path, "certify-ts", "FFFFC000000000000000000000000000",
             "--min-distance", "5")
    assert rc == 0
    assert "certified true" in capsys.readouterr().out


def test_certify_ts_false_on_codeword(tmp_path, capsys, code):
    cw = code.encode_left(BitWord.zeros(64)).to_hex()
    rc = run(tmp_path, "certify-ts", cw, "--min-distance", "3")
    assert rc == 0
    assert "certified false" in capsys.readouterr().out


def test_certify_ts_cost_ceiling_exit_3(tmp_path, capsys):
    rc = run(tmp_path, "certify-ts", "FFFFC000000000000000000000000000",
             "--min-distance", "30", "--op-ceiling", "1000")
    assert rc == 3
    assert "cost ceiling" in capsys.readouterr().err


def test_transform_ts_fixture(tmp_path, capsys):
    rc = run(tmp_path, "transform-ts", "00008825008000A1A84020082000C002",
             "--target-half", "alt0")
    assert rc == 0
    assert "6FA55652A81F29205555555555555555" in capsys.readouterr().out


def test_enumerate_and_design_alg1(tmp_path, capsys):
    spec = tmp_path / "toy.spec"
    spec.write_text(TOY_SPEC)
    rc = run(tmp_path, "enumerate-codewords", "--spec", str(spec),
             "--budget", "2")
    assert rc == 0
    listing = tmp_path / "codewords_b2.txt"
    assert listing.exists()

    rc = run(tmp_path, "design-ts", "--spec", str(spec), "--alg", "alg1",
             "--codeword-list", str(listing), "--w-max", "4",
             "--max-attempts", "5000", "--seed", "3")
    assert rc == 0
    out = capsys.readouterr().out
    ts_line = (tmp_path / "ts_design.txt").read_text().splitlines()[0]
    assert BitWord(12, int(ts_line, 16)).weight == 3
    assert "d=" in out


def test_design_alg1_requires_list(tmp_path):
    assert run(tmp_path, "design-ts", "--alg", "alg1") == 2


def test_design_alg2_toy(tmp_path, capsys):
    spec = tmp_path / "toy.spec"
    spec.write_text(TOY_SPEC)
    rc = run(tmp_path, "design-ts", "--spec", str(spec), "--alg", "alg2",
             "--iterations", "16", "--s-max", "4096", "--seed", "1")
    assert rc == 0
    out = capsys.readouterr().out
    assert "stop reason" in out
    assert (tmp_path / "ts_design.txt").exists()


def test_roc_csv_columns(tmp_path):
    rc = run(tmp_path, "roc", "--ebn0", "0", "--metrics", "hard,soft",
             "--trials", "4000", "--pfa-grid", "1e-2,1e-1", "--seed", "5")
    assert rc == 0
    lines = (tmp_path / "roc.csv").read_text().splitlines()
    assert lines[0] == ("eb_n0_db,metric,threshold,p_fa,p_fa_ci,p_d,p_d_ci,"
                        "trials_absent,trials_present,seed")
    assert len(lines) == 1 + 2 * 2
    row = lines[1].split(",")
    assert row[1] == "hard"
    assert 0.0 <= float(row[5]) <= 1.0


def test_detect_eval_and_strict(tmp_path):
    rc = run(tmp_path, "detect-eval", "--ebn0", "-2", "--metrics", "hard",
             "--trials", "3000", "--pfa", "1e-2", "--seed", "6")
    assert rc == 0
    assert (tmp_path / "detect_eval.csv").exists()
    # tiny trial count cannot support the miss-count stopping rule
    rc = run(tmp_path, "detect-eval", "--ebn0", "6", "--metrics", "hard",
             "--trials", "2000", "--pfa", "1e-2", "--seed", "6", "--strict")
    assert rc == 4


def test_simulate_missing_key_names_it(tmp_path, capsys):
    cfgp = tmp_path / "sim.cfg"
    cfgp.write_text("mode = decoder\n")
    rc = run(tmp_path, "simulate", "--config", str(cfgp))
    assert rc == 2
    assert "'ts'" in capsys.readouterr().err


def test_simulate_smoke_and_determinism(tmp_path):
    cfgp = tmp_path / "sim.cfg"
    cfgp.write_text(
        "ts = v18\nmode = decoder\neb_n0_db = 0.0\n"
        "stop_errors = 5\nmax_trials = 2000\nmaster_seed = 21\n")
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["simulate", "--config", str(cfgp), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfgp), "--out", str(out2)]) == 0
    csv1 = (out1 / "campaign.csv").read_bytes()
    csv2 = (out2 / "campaign.csv").read_bytes()
    assert csv1 == csv2

    manifest = json.loads((out1 / "simulate.manifest.json").read_text())
    assert manifest["subcommand"] == "simulate"
    assert manifest["outputs"]["campaign.csv"] == \
        hashlib.sha256(csv1).hexdigest()
    assert "started" in manifest and "finished" in manifest


def test_manifest_written_for_code(tmp_path):
    assert run(tmp_path, "code", "--check") == 0
    manifest = json.loads((tmp_path / "code.manifest.json").read_text())
    assert manifest["tool_version"]
    assert manifest["master_seed"] == 0
