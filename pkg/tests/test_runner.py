import csv
import json

import numpy as np
import pytest

from sorkinsim import runner
from sorkinsim.runner import ConfigError, canonical_json, emit, main, parse_config, run

A2B = {"scenario": "a2b", "alpha": [0.6, 0], "beta": [0.48, 0.36], "gamma": "auto",
       "recipe": {"kind": "sorkin3", "epsilon": 0.05}, "seed": 42}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_parse_auto_gamma():
    cfg = parse_config(json.dumps(A2B))
    assert cfg.scenario == "a2b" and cfg.seed == 42 and cfg.recipe_kind == "sorkin3"
    assert cfg.alphas[2].imag == 0 and cfg.alphas[2].real >= 0
    assert abs(np.linalg.norm(cfg.alphas) - 1) < 1e-12
    assert cfg.alphas[2].real == pytest.approx(np.sqrt(1 - 0.36 - 0.36), abs=1e-12)


def test_parse_missing_seed():
    doc = dict(A2B)
    del doc["seed"]
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert any(e.startswith("seed") for e in info.value.errors)


def test_parse_reports_norm():
    doc = {"scenario": "b2a", "alpha": [[1.1, 0], [0, 0]], "seed": 1}
    with pytest.raises(ConfigError, match=r"norm = 1\.1"):
        parse_config(doc)


def test_parse_unknown_scenario_and_recipe():
    with pytest.raises(ConfigError) as info:
        parse_config({"scenario": "tri", "seed": 1, "recipe": {"kind": "cubic"}})
    msgs = " ".join(info.value.errors)
    assert "scenario" in msgs and "recipe.kind" in msgs


def test_parse_malformed():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{not json")


def test_parse_sweep_grid():
    doc = dict(A2B, sweep={"epsilon_min": 0, "epsilon_max": 0.1, "steps": 11})
    cfg = parse_config(doc)
    assert cfg.is_sweep and len(cfg.epsilons) == 11 and cfg.epsilons[0] == 0.0
    with pytest.raises(ConfigError):
        parse_config(dict(A2B, sweep={"epsilon_min": 0.2, "epsilon_max": 0.1, "steps": 3}))


def test_run_sum_rules_born():
    cfg = parse_config({"scenario": "sum_rules", "n_slits": 4, "seed": 3})
    rep = run(cfg)
    r = rep.runs[0]
    assert 3 in r["vanishing_orders"] and 4 in r["vanishing_orders"]
    assert 2 in r["violated_orders"]


def test_run_sweep_born_endpoint():
    cfg = parse_config(dict(A2B, sweep={"epsilon_min": 0, "epsilon_max": 0.1, "steps": 11}))
    rep = run(cfg)
    assert rep.runs[0]["epsilon"] == 0.0 and rep.runs[0]["total_variation_B"] < 1e-12
    assert rep.runs[-1]["total_variation_B"] > 0


def test_run_b2a_random_trials():
    cfg = parse_config({"scenario": "b2a", "n_slits": 3, "trials": 5, "seed": 9,
                        "recipe": {"kind": "sorkin3", "epsilon": 0.02}})
    rep = run(cfg)
    assert len(rep.runs) == 5
    assert all(r["redistribution_satisfied"] for r in rep.runs)


def test_run_contextuality():
    cfg = parse_config({"scenario": "contextuality", "n_slits": 6, "blocks": [[0, 1, 2], [3, 4, 5]],
                        "trials": 4, "seed": 5})
    rep = run(cfg)
    assert rep.aggregate["max_abs_difference"] < 1e-12


def test_emit_csv_born_contexts_equal(tmp_path):
    cfg = parse_config(dict(A2B, recipe={"kind": "born"}))
    emit(run(cfg), tmp_path, "csv")
    with open(tmp_path / "screen.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [*rows[0]][:5] == ["scenario", "epsilon", "k", "prob_context1", "prob_context2"]
    for row in rows:
        assert float(row["prob_context1"]) == pytest.approx(float(row["prob_context2"]), abs=1e-15)


def test_emit_summary_rows(tmp_path):
    cfg = parse_config(dict(A2B, sweep={"epsilon_min": 0, "epsilon_max": 0.1, "steps": 11}))
    emit(run(cfg), tmp_path, "both")
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 11
    assert list(rows[0]) == ["epsilon", "trace_distance_A", "total_variation_B"]


def test_emitted_probabilities_valid(tmp_path):
    for doc in (dict(A2B, sweep={"epsilon_min": 0, "epsilon_max": 0.1, "steps": 4}),
                {"scenario": "b2a", "n_slits": 4, "trials": 3, "seed": 2, "recipe": {"kind": "sorkin3", "epsilon": 0.05}},
                {"scenario": "sum_rules", "n_slits": 3, "seed": 2},
                {"scenario": "contextuality", "n_slits": 6, "trials": 3, "seed": 2}):
        out = tmp_path / doc["scenario"]
        emit(run(parse_config(doc)), out, "csv")
        with open(out / "screen.csv") as fh:
            rows = list(csv.DictReader(fh))
        sums = {}
        for row in rows:
            for col in ("prob_context1", "prob_context2"):
                v = float(row[col])
                assert v >= 0
                key = (row["epsilon"], row["trial"], col)
                sums[key] = sums.get(key, 0.0) + v
        assert all(abs(s - 1) < 1e-9 for s in sums.values())


def test_json_round_trip(tmp_path):
    cfg = parse_config(json.dumps(A2B))
    emit(run(cfg), tmp_path, "json")
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["config"] == json.loads(canonical_json(A2B))
    assert parse_config(doc["config"]).alphas.tolist() == cfg.alphas.tolist()


def test_canonical_json_floats():
    assert canonical_json(0.1) == "0.10000000000000001"
    assert float(canonical_json(1 / 3)) == 1 / 3
    assert canonical_json({"b": 1, "a": [True, None]}) == '{\n  "a": [true, null],\n  "b": 1\n}'
    with pytest.raises(ValueError):
        canonical_json(float("nan"))


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", write(tmp_path, {"scenario": "a2b"}), "--out", str(tmp_path)]) == 1
    assert "seed" in capsys.readouterr().err
    ok = write(tmp_path, A2B, "ok.json")
    assert main(["run", ok, "--out", str(tmp_path / "o"), "--format", "both"]) == 0
    assert {p.name for p in (tmp_path / "o").iterdir()} == {"report.json", "screen.csv", "summary.csv"}
    # run succeeds, but sweep demands a sweep section
    assert main(["sweep", ok, "--out", str(tmp_path / "o")]) == 1
    bad = write(tmp_path, dict(A2B, recipe={"kind": "sorkin3", "epsilon": 1e6}), "bad.json")
    assert main(["run", bad, "--out", str(tmp_path / "o")]) == 2


def test_cli_seed_override(tmp_path):
    doc = {"scenario": "b2a", "n_slits": 3, "trials": 2, "seed": 1}
    p = write(tmp_path, doc)
    main(["run", p, "--out", str(tmp_path / "a"), "--seed", "7"])
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["config"]["seed"] == 7


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", write(tmp_path, A2B)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] is True


def test_determinism_bytes(tmp_path):
    p = write(tmp_path, dict(A2B, sweep={"epsilon_min": 0, "epsilon_max": 0.1, "steps": 6}))
    for name in ("r1", "r2"):
        assert main(["sweep", p, "--out", str(tmp_path / name), "--format", "both", "--workers", "3"]) == 0
    for f in ("report.json", "screen.csv", "summary.csv"):
        assert (tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "sorkinsim", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run" in out.stdout
