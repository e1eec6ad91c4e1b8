import csv
import io
import json
import os
import sys
from pathlib import Path

import pytest

from poseval.cli import build_parser, main
from poseval.harness import PosevalConfig, write_score_dir
from poseval.metrics import ComplexScore
from poseval.structio import write_pdb, write_sdf

import builders as b
from conftest import FIXTURES

GOLDEN = Path(__file__).resolve().parent / "golden"
COMMANDS = ["score", "score-multi", "compare", "sites", "correlate", "annotate", "interactions", "validate"]


def _help(argv, monkeypatch, capsys):
    monkeypatch.setenv("COLUMNS", "100")
    with pytest.raises(SystemExit) as ex:
        build_parser().parse_args(argv)
    assert ex.value.code == 0
    return capsys.readouterr().out


@pytest.mark.parametrize("command", [None] + COMMANDS)
def test_help_matches_golden(command, monkeypatch, capsys):
    argv = ["--help"] if command is None else [command, "--help"]
    text = _help(argv, monkeypatch, capsys)
    path = GOLDEN / f"help_{command or 'main'}.txt"
    if os.environ.get("POSEVAL_REGEN_GOLDEN"):
        path.parent.mkdir(exist_ok=True)
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8")


@pytest.mark.parametrize("command", COMMANDS)
def test_help_lists_global_flags(command, monkeypatch, capsys):
    text = _help([command, "--help"], monkeypatch, capsys)
    for flag in ("--workers", "--config", "--out"):
        assert flag in text


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as ex:
        main(["score", "m.jsonl", "--bogus"])
    assert ex.value.code == 2


def test_workers_must_be_positive(capsys):
    with pytest.raises(SystemExit) as ex:
        main(["score", str(FIXTURES / "manifest.jsonl"), "--workers", "0"])
    assert ex.value.code == 2


# -- score ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def scored(tmp_path_factory):
    out = tmp_path_factory.mktemp("score") / "out"
    assert main(["score", str(FIXTURES / "manifest.jsonl"), "--out", str(out), "--method", "m1"]) == 0
    return out


def test_score_outputs(scored):
    files = sorted(p.name for p in (scored / "complexes").glob("*.json"))
    # 3 targets x 3 runs
    assert len(files) == 9
    assert files[0] == "T1__run0.json"
    rows = list(csv.DictReader(io.StringIO((scored / "aggregate.csv").read_text())))
    assert {r["metric"] for r in rows} >= {"rmsd_success", "centroid_success", "rmsd_pb_valid_success", "plif_emd_mean"}
    assert all(r["method"] == "m1" for r in rows)
    assert (scored / "config.json").exists()
    assert b"\r\n" not in (scored / "aggregate.csv").read_bytes()


def test_score_missing_file_is_data_not_error(scored):
    d = json.loads((scored / "complexes" / "T2__run2.json").read_text())
    assert d["excluded"] and d["reason"] == "input error"


def test_score_unreadable_manifest(tmp_path, capsys):
    assert main(["score", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_score_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["score", str(FIXTURES / "manifest.jsonl"), "--out", str(blocker / "sub")]) == 1


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"no_such_key": 1}')
    assert main(["score", str(FIXTURES / "manifest.jsonl"), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_score_multi_forces_protocol(tmp_path):
    out = tmp_path / "o"
    assert main(["score-multi", str(FIXTURES / "manifest.jsonl"), "--out", str(out)]) == 0
    d = json.loads((out / "complexes" / "T1__run0.json").read_text())
    assert d["mode"] == "multi"


# -- compare -------------------------------------------------------------------


def _method_dir(tmp_path, name, emd, targets=("a", "b")):
    runs = {0: [ComplexScore(t, 0, rmsd_symmetry_corrected=1.0, centroid_rmsd=0.5, pb_valid=True, plif_emd=emd) for t in targets]}
    d = tmp_path / name
    write_score_dir(d, runs, PosevalConfig(), method=name)
    return d


def _wm(out):
    return {r["method"]: float(r["plif_wm"]) for r in csv.DictReader(io.StringIO((out / "compare_wm.csv").read_text()))}


def test_compare_three_methods(tmp_path):
    dirs = [_method_dir(tmp_path, n, e) for n, e in (("m1", 1.0), ("m2", 2.0), ("m3", 3.0))]
    out = tmp_path / "cmp"
    assert main(["compare", *map(str, dirs), "--out", str(out)]) == 0
    assert _wm(out) == {"m1": 1.0, "m2": 0.5, "m3": 0.0}


def test_compare_identical(tmp_path):
    a = _method_dir(tmp_path / "x", "m", 0.4)
    c = _method_dir(tmp_path / "y", "m", 0.4)
    out = tmp_path / "cmp"
    assert main(["compare", str(a), str(c), "--out", str(out)]) == 0
    assert set(_wm(out).values()) == {1.0}
    rates = json.loads((out / "compare.json").read_text())["rates"]
    by = {}
    for r in rates:
        by.setdefault(r["metric"], set()).add(r["mean"])
    assert all(len(v) == 1 for v in by.values())


def test_compare_disjoint_targets(tmp_path, capsys):
    a = _method_dir(tmp_path, "m1", 1.0, ("a", "b"))
    c = _method_dir(tmp_path, "m2", 1.0, ("a", "c"))
    assert main(["compare", str(a), str(c), "--out", str(tmp_path / "cmp")]) == 1
    err = capsys.readouterr().err
    assert "m1 lacks c" in err and "m2 lacks b" in err


# -- sites / validate ------------------------------------------------------------


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_sites(tmp_path):
    prot = _write(tmp_path, "p.pdb", write_pdb(b.pocket_protein()))
    one = _write(tmp_path, "a.sdf", write_sdf([b.benzoate()]))
    far = _write(tmp_path, "far.sdf", write_sdf([b.ion("Zn", (60, 0, 0))]))
    near = _write(tmp_path, "near.sdf", write_sdf([b.ion("Zn", (3, 3, 3))]))
    out = tmp_path / "o"
    assert main(["sites", prot, one, "--out", str(out)]) == 0
    groups = json.loads((out / "sites.json").read_text())["sites"]
    assert len(groups) == 1 and groups[0]["size"] == [25.0] * 3
    assert main(["sites", prot, one, far, "--out", str(out)]) == 0
    assert len(json.loads((out / "sites.json").read_text())["sites"]) == 2
    assert main(["sites", prot, one, near, "--out", str(out)]) == 0
    (g,) = json.loads((out / "sites.json").read_text())["sites"]
    assert g["members"] == [0, 1] and g["center_source"] == "pocket"


def test_sites_parse_error(tmp_path):
    prot = _write(tmp_path, "p.pdb", write_pdb(b.pocket_protein()))
    bad = _write(tmp_path, "bad.sdf", "garbage\n")
    assert main(["sites", prot, bad, "--out", str(tmp_path / "o")]) == 1


def test_validate(tmp_path):
    good = _write(tmp_path, "g.sdf", write_sdf([b.benzoate()]))
    flat = _write(tmp_path, "f.sdf", write_sdf([b.cyclohexane(planar=True)]))
    out = tmp_path / "o"
    assert main(["validate", good, "--out", str(out)]) == 0
    assert json.loads((out / "validity.json").read_text())["overall"] is True
    assert main(["validate", flat, "--out", str(out)]) == 0
    rep = json.loads((out / "validity.json").read_text())
    assert rep["overall"] is False and rep["per_check"]["ring_flatness"] is False
    assert rep["disabled"] == ["internal_energy"]


# -- correlate / annotate / interactions -----------------------------------------------


def test_correlate_table(tmp_path):
    t = _write(tmp_path, "t.csv", "a,b\n1,3\n2,5\n3,7\n4,9\n")
    out = tmp_path / "o"
    assert main(["correlate", t, "--out", str(out)]) == 0
    res = json.loads((out / "correlation.json").read_text())
    assert res["pearson_r"] == pytest.approx(1.0) and res["spearman_rho"] == pytest.approx(1.0)


def test_correlate_missing_column(tmp_path):
    t = _write(tmp_path, "t.csv", "a,b\n1,3\n2,5\n3,7\n")
    assert main(["correlate", t, "--x", "zz", "--out", str(tmp_path / "o")]) == 2


def test_annotate(scored, tmp_path, annotations_file):
    out = tmp_path / "o"
    assert main(["annotate", str(scored), "--annotations", str(annotations_file), "--out", str(out)]) == 0
    assert (out / "annotations.csv").exists()
    failures = json.loads((out / "failures.json").read_text())
    # every target has at least one successful run in the fixture set
    assert failures["histogram"] == {}


def test_interactions(scored, tmp_path):
    out = tmp_path / "o"
    assert main(["interactions", str(scored), "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO((out / "interactions_summary.csv").read_text())))
    assert {r["method"] for r in rows} == {"m1", "reference"}


# -- determinism ------------------------------------------------------------------


def _tree_bytes(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_score_deterministic_across_worker_counts(tmp_path):
    outs = []
    for w in (1, 4):
        out = tmp_path / f"w{w}"
        assert main(["score", str(FIXTURES / "manifest.jsonl"), "--out", str(out), "--workers", str(w)]) == 0
        outs.append(_tree_bytes(out))
    assert outs[0] == outs[1]


def test_module_entry_point():
    import subprocess

    res = subprocess.run([sys.executable, "-m", "poseval", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("poseval ")
