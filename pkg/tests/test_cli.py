import csv
import json

import pytest

from xbarmap.cli import EXIT_IO, EXIT_OK, EXIT_PACKING, EXIT_PARSE, EXIT_SEARCH, OUT_ENV, main

TWO_LAYER = {"name": "two", "input_shape": [4, 1, 4], "layers": [
    {"name": "a", "kind": "conv", "k": 1, "c_in": 4, "c_out": 8, "stride": 1, "padding": 0},
    {"name": "b", "kind": "conv", "k": 1, "c_in": 8, "c_out": 8, "stride": 2, "padding": 0},
]}


@pytest.fixture
def ws(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env-out"))
    (tmp_path / "hw.json").write_text(json.dumps({"xbar_rows": 128, "xbar_cols": 128}))
    (tmp_path / "two.json").write_text(json.dumps(TWO_LAYER))
    return tmp_path


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_compile_squeezenet_summary(ws):
    assert main(["compile", "zoo:squeezenet", str(ws / "hw.json"), "--out", str(ws / "c")]) == EXIT_OK
    summary = json.loads((ws / "c" / "summary.json").read_text())
    assert summary["utilization"] >= 0.80
    manifest = json.loads((ws / "c" / "manifest.json").read_text())
    assert manifest["command"] == "compile" and set(manifest["outputs"]) == {"plan.json", "summary.json"}


def test_isaac_one_box_per_container(ws):
    assert main(["compile", "zoo:squeezenet", str(ws / "hw.json"), "--no-pack", "--isaac"]) == EXIT_OK
    summary = json.loads((ws / "env-out" / "summary.json").read_text())
    assert summary["mapping"] == "isaac" and summary["boxes"] == summary["containers_used"]


def test_missing_hw_file(ws):
    out = ws / "never"
    assert main(["compile", "zoo:squeezenet", str(ws / "nope.json"), "--out", str(out)]) == EXIT_IO
    assert not out.exists()


def test_parse_and_packing_codes(ws):
    bad = dict(TWO_LAYER, layers=[dict(TWO_LAYER["layers"][0], c_out=-1)])
    (ws / "bad.json").write_text(json.dumps(bad))
    assert main(["compile", str(ws / "bad.json"), str(ws / "hw.json")]) == EXIT_PARSE
    assert main(["compile", "zoo:squeezenet", str(ws / "hw.json"), "--xbars", "10"]) == EXIT_PACKING
    assert main(["compile", "zoo:nothing", str(ws / "hw.json")]) == EXIT_PARSE


def test_simulate_two_layer_and_sweep(ws):
    assert main(["compile", str(ws / "two.json"), str(ws / "hw.json"), "--out", str(ws / "c")]) == EXIT_OK
    plan = str(ws / "c" / "plan.json")
    assert main(["simulate", plan, str(ws / "two.json"), "--out", str(ws / "s"), "--trace"]) == EXIT_OK
    assert rows(ws / "s" / "simulation.csv")[0]["total_cycles"] == "6"
    assert (ws / "s" / "trace.csv").read_text().startswith("time,event,sample,layer,container\n")
    assert main(["simulate", plan, str(ws / "two.json"), "--sweep", "--out", str(ws / "w")]) == EXIT_OK
    sweep = rows(ws / "w" / "sweep.csv")
    assert [int(r["n_samples"]) for r in sweep] == [2 ** k for k in range(11)]


def test_digest_mismatch(ws):
    main(["compile", str(ws / "two.json"), str(ws / "hw.json"), "--out", str(ws / "c")])
    assert main(["simulate", str(ws / "c" / "plan.json"), "zoo:squeezenet", "--out", str(ws / "s")]) == EXIT_PARSE
    assert not (ws / "s").exists()


def test_sdw_sweep_speedup_declines(ws):
    hw = str(ws / "hw.json")
    assert main(["compile", "zoo:mobilenetv3_small", hw, "--isaac", "--out", str(ws / "base")]) == EXIT_OK
    assert main(["compile", "zoo:mobilenetv3_small", hw, "--sdw", "20", "--out", str(ws / "split")]) == EXIT_OK
    assert main(["simulate", str(ws / "split" / "plan.json"), "zoo:mobilenetv3_small", "--sweep",
                 "--max-samples", "64", "--baseline", str(ws / "base" / "plan.json"), "--out", str(ws / "w")]) == EXIT_OK
    speed = [float(r["speedup"]) for r in rows(ws / "w" / "sweep.csv")]
    assert speed[0] > 1 and all(b <= a + 1e-9 for a, b in zip(speed, speed[1:]))


def test_search_repeatable_and_speed_choice(ws):
    hw = str(ws / "hw.json")
    common = ["search", "default", hw, "--xbars", "300", "--pop", "6", "--gens", "2", "--seed", "7"]
    assert main(common + ["--out", str(ws / "a")]) == EXIT_OK
    assert main(common + ["--out", str(ws / "b"), "--prefer", "speed"]) == EXIT_OK
    assert (ws / "a" / "pareto.csv").read_bytes() == (ws / "b" / "pareto.csv").read_bytes()
    front = rows(ws / "b" / "pareto.csv")
    assert front
    chosen = json.loads((ws / "b" / "chosen.json").read_text())
    assert chosen["total_cycles"] == min(int(r["total_cycles"]) for r in front)


def test_search_errors(ws):
    hw = str(ws / "hw.json")
    assert main(["search", "default", hw, "--xbars", "5", "--pop", "4", "--gens", "1"]) == EXIT_SEARCH
    assert main(["search", "default", hw, "--pop", "4", "--gens", "1"]) == EXIT_PARSE
    assert main(["search", "default", hw, "--xbars", "300", "--mut", "2"]) == EXIT_PARSE


def test_zoo_writes_documents(ws):
    assert main(["zoo", "space", "--out", str(ws / "z")]) == EXIT_OK
    assert "groups" in json.loads((ws / "z" / "space.json").read_text())
