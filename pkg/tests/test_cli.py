import json
import subprocess
import sys

import pytest

from giacheck.cli import STATE_CAP_ENV, main
from giacheck.gchor import render_gchor

from figures import ONLINE_SHOPPING


@pytest.fixture
def shop(tmp_path):
    path = tmp_path / "shop.gc"
    path.write_text(render_gchor(ONLINE_SHOPPING) + "\n")
    return path


def write(tmp_path, text):
    path = tmp_path / "g.gc"
    path.write_text(text)
    return str(path)


def test_check_well_formed_exits_zero(shop, capsys):
    assert main(["check", str(shop)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["well_formed"] and doc["oracle_well_formed"]
    assert doc["buffered"]["deadlock_free"] and doc["buffered"]["orphan_free"]


def test_check_ill_formed_exits_one(tmp_path, capsys):
    assert main(["check", write(tmp_path, "D->E:m + D->F:n")]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert not doc["well_formed"]
    assert {w["kind"] for w in doc["witnesses"]} >= {"unmatched-output"}


def test_check_text_format(tmp_path, capsys):
    assert main(["check", write(tmp_path, "A->B:m | A->B:m"), "--format", "text", "--no-buffered"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("well-formed: no\n")
    assert "witness parallel at <root> on AB!?m" in out
    assert "buffered run" not in out


@pytest.mark.parametrize("text", ["A->B:m ;", "A->A:m", "A->B:m $"])
def test_check_parse_error_exits_two(tmp_path, capsys, text):
    assert main(["check", write(tmp_path, text)]) == 2
    assert "parse error" in capsys.readouterr().err


def test_check_missing_file_exits_two(tmp_path, capsys):
    assert main(["check", str(tmp_path / "absent.gc")]) == 2
    assert capsys.readouterr().err


def test_state_cap_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(STATE_CAP_ENV, "2")
    main(["check", write(tmp_path, "A->B:m | C->D:n")])
    assert json.loads(capsys.readouterr().out)["buffered"]["inconclusive"]
    monkeypatch.setenv(STATE_CAP_ENV, "lots")
    assert main(["check", write(tmp_path, "A->B:m")]) == 2


def test_export_all_stages(shop, tmp_path, capsys):
    out = tmp_path / "dot"
    assert main(["export", str(shop), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "gchor.dot",
        "pomset_0.dot",
        "pomset_1.dot",
        "product.dot",
        "projection_B.dot",
        "projection_H.dot",
        "projection_S.dot",
    ]
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["export", str(shop), "--out", str(out)]) == 0
    assert first == {p.name: p.read_bytes() for p in out.iterdir()}


def test_export_selected_stages(shop, tmp_path):
    out = tmp_path / "dot"
    assert main(["export", str(shop), "--stage=projections,product", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["product.dot", "projection_B.dot", "projection_H.dot", "projection_S.dot"]


def test_export_raw_projections_keep_tau(tmp_path):
    out = tmp_path / "dot"
    assert main(["export", write(tmp_path, "D->E:m + D->F:n"), "--stage", "projections", "--raw", "--out", str(out)]) == 0
    assert "τ" in (out / "projection_E.dot").read_text()


def test_export_pomsets_of_ill_formed_term(tmp_path, capsys):
    assert main(["export", write(tmp_path, "D->E:m + D->F:n"), "--stage", "pomsets", "--out", str(tmp_path)]) == 2
    assert "semantics undefined" in capsys.readouterr().err


def test_export_unknown_stage(shop, tmp_path):
    assert main(["export", str(shop), "--stage", "bogus", "--out", str(tmp_path)]) == 2


def test_corpus_empty(capsys):
    assert main(["corpus", "--seed", "3", "--count", "0"]) == 0
    out = capsys.readouterr().out
    assert "result: PASS" in out and "agreement: 0 passed, 0 failed" in out


def test_corpus_small_run_is_reproducible(capsys):
    assert main(["corpus", "--seed=5", "--count=15", "--max-depth=3"]) == 0
    first = capsys.readouterr().out
    assert main(["corpus", "--seed=5", "--count=15", "--max-depth=3"]) == 0
    assert capsys.readouterr().out == first


def test_corpus_rejects_bad_bounds(capsys):
    assert main(["corpus", "--count", "1", "--max-participants", "7"]) == 2


def test_console_script_runs(shop):
    proc = subprocess.run([sys.executable, "-m", "giacheck.cli", "check", str(shop), "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("well-formed: yes")
