from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from subtile import field as fieldmod
from subtile.catalog import bundled_bytes, penrose_document
from subtile.cli import run


def cli(*argv):
    out = io.StringIO()
    old = fieldmod.precision_budget()
    try:
        code = run(list(argv), stdout=out)
    finally:
        fieldmod.set_precision_budget(old)
    return code, out.getvalue()


def test_validate_penrose():
    code, out = cli("validate", "penrose", "--no-cache")
    assert code == 0
    assert "standard position S_G = {1, 21}" in out
    assert "support: ok" in out


def test_validate_json_and_rotation_group():
    code, out = cli("validate", "penrose", "--json", "--symmetry", "10", "--no-cache")
    doc = json.loads(out)
    assert code == 0 and doc["ok"]
    assert doc["group"]["standard_position"] == [1, 11, 21, 31]
    assert doc["group"]["order"] == 10


def test_validate_nonfree_square():
    assert cli("validate", "square", "--no-cache")[0] == 1
    assert cli("validate", "square", "--no-cache", "--allow-nonfree")[0] == 0


def test_validate_broken_system_exits_1(tmp_path):
    doc = penrose_document()
    doc["substitution"]["21"] = [it for it in doc["substitution"]["21"] if it["id"] != 17]
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc))
    code, out = cli("validate", str(path), "--no-cache")
    assert code == 1
    assert "area deficit" in out


def test_input_errors_exit_2(tmp_path, capsys):
    assert cli("validate", "no-such-system")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert cli("validate", str(bad))[0] == 2
    assert cli("expand", "penrose", "-p", "99", "-n", "1", "--no-cache")[0] == 2
    assert cli("matrix", "penrose", "--precision-bits", "8", "--no-cache")[0] == 2
    with pytest.raises(SystemExit) as info:
        cli("rokhlin", "penrose", "--eps", "0.9.1")
    assert info.value.code == 2
    assert "input error" in capsys.readouterr().err


def test_resource_error_exits_3(capsys):
    code, _ = cli("rokhlin", "penrose", "--eps", "9/10", "--max-level", "4", "--no-cache")
    assert code == 3
    assert "best found" in capsys.readouterr().err


def test_matrix_group():
    code, out = cli("matrix", "penrose", "--group", "--json", "--no-cache")
    doc = json.loads(out)
    assert code == 0
    assert doc["matrix"] == [[1, 1], [1, 2]]


def test_k0_output():
    code, out = cli("k0", "penrose", "--json", "--no-cache")
    doc = json.loads(out)
    assert code == 0
    assert doc["basis"] == [["0", "0", "1", "-1"], ["1", "0", "0", "0"]]


def test_trace_residual_zero():
    code, out = cli("trace", "penrose", "-n", "3", "--json", "--no-cache")
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] and doc["normalisation_residual"] == ["0", "0", "0", "0"]


def test_generators_and_factor():
    code, out = cli("generators", "penrose", "--json", "--no-cache")
    assert code == 0 and json.loads(out)["count"] == 180
    code, out = cli("factor", "penrose", "-p", "21", "-n", "3", "--random", "5", "--seed", "3", "--no-cache")
    assert code == 0


def test_punc_stats():
    code, out = cli("punc-stats", "penrose", "-R", "5", "--levels", "5..7", "--json", "--no-cache")
    assert code == 0
    doc = json.loads(out)
    assert [row["max"] for row in doc["levels"]] == ["1", "224/233", "443/610"]
    assert doc["non_increasing"]


def test_expand_svg_deterministic_and_cache_neutral(tmp_path):
    svgs, outs = [], []
    cache = tmp_path / "cache"
    for i, extra in enumerate([("--no-cache",), ("--cache-dir", str(cache)), ("--cache-dir", str(cache))]):
        svg = tmp_path / f"e{i}.svg"
        code, out = cli("expand", "penrose", "-p", "21", "-n", "5", "--svg", str(svg), "--json", *extra)
        assert code == 0
        svgs.append(svg.read_bytes())
        outs.append(out.replace(str(svg), "X"))
    assert svgs[0] == svgs[1] == svgs[2]
    assert outs[0] == outs[1] == outs[2]
    assert svgs[0].startswith(b'<?xml version="1.0" encoding="UTF-8"?>\n<svg')
    assert len(list(cache.glob("*.patch"))) >= 1


def test_corrupt_cache_entry_is_ignored(tmp_path):
    cache = tmp_path / "c"
    cli("expand", "penrose", "-p", "1", "-n", "4", "--cache-dir", str(cache))
    (entry,) = cache.glob("*.patch")
    entry.write_text("garbage\n")
    code, out = cli("expand", "penrose", "-p", "1", "-n", "4", "--cache-dir", str(cache), "--json")
    code2, out2 = cli("expand", "penrose", "-p", "1", "-n", "4", "--no-cache", "--json")
    assert code == code2 == 0 and out == out2


def test_layers_svg_and_check(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert cli("layers", "penrose", "-p", "1", "-s", "4", "--svg", str(a), "--check", "--no-cache")[0] == 0
    assert cli("layers", "penrose", "-p", "1", "-s", "4", "--svg", str(b), "--no-cache")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"#282828" in a.read_bytes()  # layer 0 fill


def test_module_entry_point(tmp_path):
    sysfile = tmp_path / "p.json"
    sysfile.write_bytes(bundled_bytes("penrose"))
    res = subprocess.run(
        [sys.executable, "-m", "subtile", "matrix", str(sysfile), "--no-cache"], capture_output=True, text=True
    )
    assert res.returncode == 0, res.stderr
