import json

import pytest

from looplab import __version__
from looplab.cli import run


def _run(capsys, argv):
    rc = run(argv)
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def test_bad_subcommand_is_usage_error(capsys):
    rc, _, err = _run(capsys, ["frobnicate"])
    assert rc == 1
    assert "usage error" in err


def test_missing_subcommand(capsys):
    rc, _, _ = _run(capsys, [])
    assert rc == 1


def test_invalid_level_is_usage_error(capsys):
    rc, _, err = _run(capsys, ["sample", "--level", "-1", "--n", "1"])
    assert rc == 1
    assert "usage error" in err


def test_sample_header_and_determinism(capsys):
    argv = ["sample", "--level", "0", "--truncation", "3", "--n", "4",
            "--seed", "5"]
    rc1, out1, _ = _run(capsys, argv)
    rc2, out2, _ = _run(capsys, argv)
    assert rc1 == rc2 == 0
    assert out1 == out2
    head = out1.splitlines()[0]
    assert head.startswith(f"# looplab {__version__} config=")
    cfg = json.loads(head.split("config=", 1)[1])
    assert cfg["command"] == "sample" and cfg["seed"] == 5
    # header + column row + 4 samples
    assert len(out1.splitlines()) == 6


def test_sample_seed_changes_output(capsys):
    _, a, _ = _run(capsys, ["sample", "--n", "2", "--seed", "1"])
    _, b, _ = _run(capsys, ["sample", "--n", "2", "--seed", "2"])
    assert a != b


def test_seed_env_default(capsys, monkeypatch):
    monkeypatch.setenv("LOOPLAB_SEED", "123")
    _, out_env, _ = _run(capsys, ["sample", "--n", "1"])
    monkeypatch.delenv("LOOPLAB_SEED")
    _, out_explicit, _ = _run(capsys, ["sample", "--n", "1", "--seed", "123"])
    assert out_env == out_explicit


def test_sample_json_format(capsys):
    rc, out, _ = _run(capsys, ["sample", "--n", "2", "--truncation", "2",
                               "--format", "json"])
    assert rc == 0
    payload = json.loads(out)
    assert len(payload["samples"]) == 2
    assert len(payload["samples"][0]["eta"]) == 2


def test_identities_gate_green(capsys):
    rc, out, _ = _run(capsys, ["identities", "--trials", "3", "--m", "48",
                               "--seed", "0"])
    assert rc == 0
    rows = out.strip().splitlines()[2:]
    assert len(rows) == 3


def test_roundtrip_gate_green(capsys):
    rc, out, _ = _run(capsys, ["roundtrip", "--trials", "2", "--seed", "1"])
    assert rc == 0


def test_roundtrip_impossible_tol_exits_2(capsys):
    rc, _, _ = _run(capsys, ["roundtrip", "--trials", "2", "--seed", "1",
                             "--tol", "0"])
    assert rc == 2


def test_diag_small(capsys):
    rc, out, _ = _run(capsys, ["diag", "--n", "20000", "--truncation", "128",
                               "--lambda", "1.0", "--seed", "0"])
    assert rc == 0
    assert "lambda," in out


def test_affine_table_and_word(capsys):
    rc, out, _ = _run(capsys, ["affine", "--type", "A", "--rank", "1",
                               "--level", "0", "--horizon", "4"])
    assert rc == 0
    lines = out.splitlines()
    # zeta exponents at level 0 for the rank-1 system: 2k
    zrows = [l for l in lines if l.startswith("zeta,")]
    assert [r.split(",")[-1] for r in zrows] == ["2", "4", "6", "8"]
    word = json.loads(lines[-1])
    assert word["period_length"] == 2
    assert word["word"][:4] == [0, 1, 0, 1]


def test_affine_invalid_level_usage_error(capsys):
    rc, _, err = _run(capsys, ["affine", "--type", "B", "--rank", "2",
                               "--level", "0", "--horizon", "2"])
    assert rc == 1
    assert "usage error" in err


def test_invariance_identity_mode(capsys):
    rc, out, _ = _run(capsys, ["invariance", "--mode", "identity", "--n", "10",
                               "--truncation", "6", "--seed", "0"])
    assert rc == 0
    summary = json.loads(out)
    assert summary["ks"] == 0.0 and summary["gate_pass"] is True


def test_reparam_rotation_mode(capsys):
    rc, out, _ = _run(capsys, ["reparam", "--mode", "rotation", "--n", "10",
                               "--truncation", "6", "--seed", "0"])
    assert rc == 0
    summary = json.loads(out)
    assert summary["max_per_sample_diff"] < 1e-9


def test_wiener_self_test_small(capsys):
    rc, out, _ = _run(capsys, ["wiener", "--n", "50", "--steps", "32",
                               "--reference-level", "0", "--seed", "3"])
    assert rc == 0
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["n_effective"] > 40


def test_out_file(tmp_path, capsys):
    path = tmp_path / "samples.csv"
    rc, out, _ = _run(capsys, ["sample", "--n", "1", "--out", str(path)])
    assert rc == 0
    text = path.read_text()
    assert text.startswith("# looplab")
