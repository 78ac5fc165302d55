import json
import xml.dom.minidom

import pytest

from fpf_chroma.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def config(boxes, h, branches, k=1, **extra):
    return {"domain": {"boxes": boxes, "h": h}, "map": {"dimension": k, "branches": branches}, **extra}


def test_certify_translation(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 10]]], 10, ["x0 + 1"]))
    out = tmp_path / "cert.json"
    assert main(["certify", cfg, "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["result"]["status"] == "certified"
    assert doc["result"]["delta"] == pytest.approx(1, abs=1e-12)


def test_certify_square(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 2]]], 0.1, ["x0*x0"]))
    out = tmp_path / "cert.json"
    assert main(["certify", cfg, "-o", str(out)]) == 1
    res = json.loads(out.read_text())["result"]
    x = res["point"][0]
    assert res["status"] == "counterexample" and abs(x * x - x) <= 1e-9


def test_malformed_expression(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", config([[[0, 2]]], 0.1, ["x0 + * 2"]))
    assert main(["certify", cfg]) == 2
    err = capsys.readouterr().err
    assert "map.branches[0][0]" in err and "offset" in err


@pytest.mark.parametrize("bad, field", [
    ('{"domain": {"boxes": [[[0, 1]]], "h": 0.1},\n "map": ', "line 2"),
    (config([[[0, 1]]], -1, ["x0"]), "domain.h"),
    (config([[[0, 1]]], 0.1, ["x0", "x0+1"], tolerances={"min_margin": 0}), "tolerances.min_margin"),
    ({**config([[[0, 1]]], 0.1, ["x0"]), "map": {"dimension": 1, "n": 2, "branches": ["x0"]}}, "map.n"),
    (config([[[0, 1]]], 0.1, [["x0", "x1"]]), "map.branches[0]"),
])
def test_config_diagnostics(tmp_path, capsys, bad, field):
    cfg = write(tmp_path, "c.json", bad)
    assert main(["certify", cfg]) == 2
    assert field in capsys.readouterr().err


def test_color_end_to_end(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 12]]], 0.1, ["x0 + 1", "x0 + 2"],
                                           tolerances={"min_margin": 1e-3}))
    cert, rep, svg = tmp_path / "cert.json", tmp_path / "rep.json", tmp_path / "p.svg"
    assert main(["color", cfg, "-o", str(cert), "--report", str(rep), "--svg", str(svg)]) == 0
    doc = json.loads(cert.read_text())
    assert doc["ledger"]["bound"] == 52 and doc["ledger"]["classes"] <= 52
    assert json.loads(rep.read_text())["verdict"] == "bright"
    xml.dom.minidom.parse(str(svg))
    # the certificate re-verifies on its own
    assert main(["verify", str(cert), "-o", str(tmp_path / "v.json")]) == 0
    # and plots to the same bytes
    assert main(["plot", str(cert), "-o", str(tmp_path / "q.svg")]) == 0
    assert (tmp_path / "q.svg").read_bytes() == svg.read_bytes()


def test_color_fixed_point_stops(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 2]]], 0.1, ["x0*x0"]))
    out = tmp_path / "cert.json"
    assert main(["color", cfg, "-o", str(out)]) == 1
    assert "classes" not in json.loads(out.read_text())


def test_color_deterministic_across_threads(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 4], [0, 4]]], 0.5, [["x0 + 1", "x1"], ["x0", "x1 + 1"]], k=2))
    paths = []
    for i, threads in enumerate(["1", "4"]):
        cert, svg = tmp_path / f"c{i}.json", tmp_path / f"p{i}.svg"
        assert main(["--threads", threads, "color", cfg, "-o", str(cert), "--svg", str(svg)]) == 0
        paths.append((cert.read_bytes(), svg.read_bytes()))
    assert paths[0] == paths[1]


def test_verify_detects_tampering(tmp_path):
    cfg = write(tmp_path, "c.json", config([[[0, 4]]], 0.25, ["x0 + 1"]))
    cert = tmp_path / "cert.json"
    assert main(["color", cfg, "-o", str(cert)]) == 0
    doc = json.loads(cert.read_text())
    merged = sorted({c for cls in doc["classes"] for c in cls["cells"]})
    doc["classes"] = [{"cells": merged, "margin": 1.0, "provenance": "forged"}]
    cert.write_text(json.dumps(doc))
    assert main(["verify", str(cert)]) == 1
    doc["classes"] = [{"cells": [10_000], "margin": 1.0, "provenance": "forged"}]
    cert.write_text(json.dumps(doc))
    assert main(["verify", str(cert)]) == 2


def test_bound(capsys):
    assert main(["bound", "1", "2"]) == 0
    assert capsys.readouterr().out.strip() == "52"
    assert main(["bound", "5", "1"]) == 0
    assert capsys.readouterr().out.strip() == "8"
    assert main(["bound", "0", "1"]) == 2


def test_discrete_single_cycle(tmp_path, capsys):
    f = write(tmp_path, "g.txt", "".join(f"{i}: {(i + 1) % 6}\n" for i in range(6)))
    assert main(["discrete", "--mode", "single", f]) == 0
    out = capsys.readouterr().out.splitlines()
    colors = dict(line.split() for line in out if not line.startswith("#"))
    assert len(set(colors.values())) == 2
    assert out[-1] == "# colors: 2 <= 3"


def test_discrete_multi(tmp_path, capsys):
    f = write(tmp_path, "g.txt", "# Z5\n" + "".join(f"{i}: {(i + 1) % 5} {(i + 2) % 5}\n" for i in range(5)))
    assert main(["discrete", f]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "# colors: 5 <= 2k+1 = 5"


def test_discrete_doubling(capsys):
    assert main(["discrete", "--mode", "doubling", "--N", "4"]) == 0
    assert "minimum colors 3" in capsys.readouterr().out
    assert main(["discrete", "--mode", "doubling", "--N", "99"]) == 2


def test_discrete_loop(tmp_path, capsys):
    f = write(tmp_path, "g.txt", "0: 1\n1: 1\n")
    assert main(["discrete", f]) == 1
    assert "vertex 1" in capsys.readouterr().err


def test_discrete_bad_input(tmp_path, capsys):
    f = write(tmp_path, "g.txt", "0 1\n")
    assert main(["discrete", f]) == 2
    assert "line 1" in capsys.readouterr().err
