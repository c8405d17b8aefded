import csv
import io
import json
import math
import subprocess
import sys

import pytest

from conftest import skewed_spec
from schottky.cli import emit_limit_set, limit_set_rows, load_group_spec, main
from schottky.errors import OverlappingCircles, ParseError
from schottky.groups import build_from_circles, spec_on_rays, spec_to_dict, Circle


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


@pytest.fixture
def g2_file(tmp_path):
    return write(tmp_path, "g2.json", spec_to_dict(skewed_spec(10.0)))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_load_examples(tmp_path):
    path = write(tmp_path, "g1.json", {"genus": 1, "circles": [{"cx": -3, "cy": 0, "r": 1, "cx2": 3, "cy2": 0, "r2": 1}]})
    assert load_group_spec(path).genus == 1
    nan = write(tmp_path, "nan.json", '{"genus": 1, "generators": [[[NaN, 0], [0, 0], [0, 0], [1, 0]]]}')
    with pytest.raises(ParseError):
        load_group_spec(nan)
    bad = write(tmp_path, "bad.json", "{genus: 1")
    with pytest.raises(ParseError):
        load_group_spec(bad)
    overlap = write(
        tmp_path,
        "overlap.json",
        {"genus": 2, "circles": [{"cx": -3, "cy": 0, "r": 1, "cx2": 3, "cy2": 0, "r2": 1}, {"cx": -2.5, "cy": 0, "r": 1, "cx2": 0, "cy2": 3, "r2": 1}]},
    )
    with pytest.raises(OverlappingCircles):
        load_group_spec(overlap)


def test_overlap_exit_code(tmp_path, capsys):
    overlap = write(
        tmp_path,
        "overlap.json",
        {"genus": 2, "circles": [{"cx": -3, "cy": 0, "r": 1, "cx2": 3, "cy2": 0, "r2": 1}, {"cx": -2.5, "cy": 0, "r": 1, "cx2": 0, "cy2": 3, "r2": 1}]},
    )
    code, _, err = run(["validate", "--input", overlap], capsys)
    assert code == 2 and "OverlappingCircles" in err


def test_validate(g2_file, capsys):
    code, out, _ = run(["validate", "--input", g2_file], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["subcommand"] == "validate"
    assert rep["result"]["report"]["valid"] and len(rep["result"]["report"]["gaps"]) == 6
    assert len(rep["input_sha256"]) == 64 and "wall_time" in rep


def test_dimension(g2_file, capsys):
    code, out, _ = run(["dimension", "--input", g2_file, "--max-word-len", "6"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and 0 <= res["lower"] <= res["upper"] < 1 and res["word_length"] == 6


def test_period_matrix_and_gate(g2_file, tmp_path, capsys):
    code, out, _ = run(["period-matrix", "--input", g2_file, "-N", "5"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and set(res) >= {"genus", "N", "tail_bound", "re", "im"}
    assert res["genus"] == 2 and len(res["re"]) == 2
    tight = write(tmp_path, "tight.json", spec_to_dict(spec_on_rays(1.02 * math.sqrt(2), [0.0, math.pi / 2], [1.0, 1.0])))
    code, _, err = run(["period-matrix", "--input", tight, "-N", "8"], capsys)
    assert code == 3 and "ConvergenceGateFailed" in err


def test_bounds_with_atoms(g2_file, tmp_path, capsys):
    atoms = tmp_path / "atoms.csv"
    code, out, _ = run(["bounds", "--input", g2_file, "-N", "4", "--depth", "1", "--atoms", str(atoms)], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and {b["name"] for b in res["bounds"]} == {"B1", "B2", "B3"}
    rows = list(csv.DictReader(atoms.open()))
    assert list(rows[0]) == ["re", "im", "weight", "word"]
    assert len(rows) == 4 + 12 + 36 + 108
    assert math.isclose(sum(float(r["weight"]) for r in rows), 1.0, rel_tol=1e-12)


def test_inequality_suite(capsys):
    code, out, _ = run(["inequality-suite", "--g-min", "2", "--g-max", "100"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4 * 99
    assert all(r["pass"] == "true" for r in rows if r["check_id"] == "i")
    code, _, _ = run(["inequality-suite", "--g-min", "1", "--g-max", "3"], capsys)
    assert code == 2


def test_limit_set_counts(tmp_path, genus1_spec):
    out = tmp_path / "ls.csv"
    assert emit_limit_set(genus1_spec, 3, str(out)) == 6
    pts = {(round(float(r["re"]), 9), round(float(r["im"]), 9)) for r in csv.DictReader(out.open())}
    assert len(pts) == 2
    spec = skewed_spec(10.0)
    assert len(limit_set_rows(spec, 2)) == 16


def test_limit_set_in_disks():
    spec = skewed_spec(5.0)
    for re, im, word in limit_set_rows(spec, 4):
        z = complex(float(re), float(im))
        assert any(abs(z - c.center) <= c.radius * (1 + 1e-9) for c in spec.disks), word


def test_limit_set_cli(g2_file, capsys):
    code, out, _ = run(["limit-set", "--input", g2_file, "-N", "2"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "re,im,word" and len(lines) == 17


def test_deterministic(g2_file, capsys):
    payloads = []
    for _ in range(2):
        _, out, _ = run(["bounds", "--input", g2_file, "-N", "4", "--depth", "1"], capsys)
        payloads.append(json.dumps(json.loads(out)["result"], sort_keys=True))
    assert payloads[0] == payloads[1]
    a = subprocess.run([sys.executable, "-m", "schottky.cli", "period-matrix", "--input", g2_file, "-N", "4"], capture_output=True, text=True)
    b = subprocess.run([sys.executable, "-m", "schottky.cli", "period-matrix", "--input", g2_file, "-N", "4"], capture_output=True, text=True, env={"SCHOTTKY_THREADS": "4", "PATH": ""})
    assert a.returncode == 0 and b.returncode == 0
    assert json.loads(a.stdout)["result"] == json.loads(b.stdout)["result"]


def test_out_file(g2_file, tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(["dimension", "--input", g2_file, "-N", "3", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["parameters"]["N"] == 3
