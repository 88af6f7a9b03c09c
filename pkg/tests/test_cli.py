import csv
import json

import numpy as np
import pytest

from imgsearch import apps
from imgsearch.artifact import ArtifactError, dumps, loads
from imgsearch.cli import main

QUERIES = {
    "range": ["box=10:11", "box=7:11", "box=0:6 op=count", "box=0:15 k=3", "box=0:6 k=100"],
    "preimage": ["op=predecessor y=2", "op=rank y=3", "op=select k=2", "op=preimage_rank y=1 z=6",
                 "op=preimage_select y=1 k=2", "op=preimage_median y=0", "op=rank_distinct y=3"],
    "kpol": ["box=0:9 box=0:9 y=10", "box=0:9 box=0:9 y=4", "box=0:9,0:9 y=10 op=count"],
    "gapped": ['P1="a" P2="na" gap=1:1 k=10', 'P1="an" P2="a" gap=0:5 k=3',
               'P1="a" P2="a" gap=2:2 op=count'],
    "theilsen": ["box=0:7,0:7", "box=0:2,0:7", "box=5:5,0:7"],
    "collinear": ["y=4", "y=3", "y=0"],
}


@pytest.fixture
def inputs(tmp_path):
    files = {}
    (tmp_path / "f.json").write_text(json.dumps({"N": 8, "coords": [{"a": 3, "mod": 16}],
                                                 "widths": [4]}))
    (tmp_path / "g.json").write_text(json.dumps({"N": 8, "coords": [{"a": 1, "mod": 4}],
                                                 "widths": [2]}))
    (tmp_path / "s1").write_text("1\n3\n8\n")
    (tmp_path / "s2").write_text("2\n5\n7\n")
    (tmp_path / "text.bin").write_bytes(b"banana")
    (tmp_path / "pts").write_text("0 0\n1 1\n2 4\n3 3\n")
    (tmp_path / "a").write_text("0 0\n1 3\n")
    (tmp_path / "b").write_text("2 2\n3 1\n")
    files["range"] = [str(tmp_path / "f.json")]
    files["preimage"] = [str(tmp_path / "g.json")]
    files["kpol"] = [str(tmp_path / "s1"), str(tmp_path / "s2")]
    files["gapped"] = [str(tmp_path / "text.bin")]
    files["theilsen"] = [str(tmp_path / "pts")]
    files["collinear"] = [str(tmp_path / "a"), str(tmp_path / "b")]
    return files


@pytest.mark.parametrize("app", sorted(QUERIES))
def test_round_trip_and_determinism(app, inputs):
    opts = {"line_x": 4} if app == "collinear" else {}
    data, built = apps.build_artifact(app, inputs[app], 0.5, 3, **opts)
    again, _ = apps.build_artifact(app, inputs[app], 0.5, 3, **opts)
    assert data == again
    header, loaded = apps.load_artifact(data)
    assert header.app == app and header.seed == 3 and header.alpha == 0.5
    for q in QUERIES[app]:
        assert apps.run_query(header, loaded, q) == apps.run_query(built.header, built.index, q)


def test_cli_examples(inputs, tmp_path, capsys):
    out = str(tmp_path / "text.idx")
    assert main(["build", "--app", "gapped", "--alpha", "0.6", "--seed", "7",
                 "--input", inputs["gapped"][0], "--out", out]) == 0
    assert "space_words=" in capsys.readouterr().out
    assert main(["query", out, 'P1="a" P2="na" gap=1:1 k=10']) == 0
    assert capsys.readouterr().out.split("\n")[:4] == ["1 2", "3 2", "3 4", "5 4"]
    rng = str(tmp_path / "range.idx")
    assert main(["build", "--app", "range", "--input", inputs["range"][0], "--out", rng]) == 0
    capsys.readouterr()
    assert main(["query", rng, "box=10:11"]) == 0
    assert capsys.readouterr().out.strip() == "NONE"


def test_exit_codes(inputs, tmp_path):
    out = str(tmp_path / "x.idx")
    with pytest.raises(SystemExit) as e:
        main(["build", "--app", "gapped", "--alpha", "1.5", "--input", inputs["gapped"][0],
              "--out", out])
    assert e.value.code == 2
    assert main(["build", "--app", "range", "--input", inputs["range"][0], "--out", out]) == 0
    data = bytearray(open(out, "rb").read())
    data[30] ^= 0xFF
    bad = tmp_path / "bad.idx"
    bad.write_bytes(bytes(data))
    assert main(["query", str(bad), "box=1:2"]) == 5
    assert main(["query", out, "box=1"]) == 2
    assert main(["query", out, "frobnicate"]) == 2
    assert main(["query", str(tmp_path / "missing.idx"), "box=1:2"]) == 4
    assert main(["build", "--app", "range", "--input", str(tmp_path / "nothere.json"),
                 "--out", out]) == 4


def test_build_failure_exit(inputs, tmp_path, monkeypatch):
    monkeypatch.setenv("IMGSEARCH_MAX_DOMAIN", "4")
    assert main(["build", "--app", "range", "--input", inputs["range"][0],
                 "--out", str(tmp_path / "y.idx")]) == 3


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--app", "inversion", "--sizes", "256,1024", "--alphas", "0.6",
                 "--trials", "1", "--queries", "5", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["app", "N", "alpha", "seed", "space_words", "max_query_evals",
                       "mean_query_evals", "build_seconds"]
    assert len(rows) == 3
    assert "slope_space=" in capsys.readouterr().out
    assert main(["bench", "--app", "range", "--sizes", "256", "--out",
                 str(tmp_path / "nodir" / "x.csv")]) == 4


def test_artifact_rejects_garbage():
    with pytest.raises(ArtifactError):
        loads(b"not an index at all")
