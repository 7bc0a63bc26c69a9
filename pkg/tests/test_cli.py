import json

import pytest

from rankarena.cli import main
from rankarena.storage import load_pair_model, read_jsonl


@pytest.fixture(scope="module")
def world_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("world")
    code = main(
        [
            "synth-world",
            "--out-dir", str(out),
            "--seed", "5",
            "--train", "6",
            "--online", "2",
            "--offline", "3",
        ]
    )
    assert code == 0
    return out


def test_synth_world_outputs(world_dir):
    for name in ("train_snapshot.jsonl", "offline_snapshot.jsonl", "corpus.jsonl", "queries.jsonl", "engine.json", "meta.json"):
        assert (world_dir / name).exists()
    assert len(read_jsonl(world_dir / "train_snapshot.jsonl")) == 6


@pytest.fixture(scope="module")
def trained_model_path(world_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "model.json"
    code = main(
        [
            "train",
            "--snapshot", str(world_dir / "train_snapshot.jsonl"),
            "--corpus", str(world_dir / "corpus.jsonl"),
            "--engine", str(world_dir / "engine.json"),
            "--out", str(out),
            "--folds", "3",
            "--c-grid", "0.01",
        ]
    )
    assert code == 0
    return out


def test_train_writes_model(trained_model_path):
    model = load_pair_model(trained_model_path)
    assert model.chosen_c == 0.01
    assert len(model.model.weights) == 15


def test_modify_explain(world_dir, trained_model_path, capsys):
    snapshot = read_jsonl(world_dir / "train_snapshot.jsonl")[0]
    query_id = snapshot["query"]["id"]
    last_doc = snapshot["rankings"][0]["doc_ids"][-1]
    code = main(
        [
            "modify",
            "--model", str(trained_model_path),
            "--history", str(world_dir / "train_snapshot.jsonl"),
            "--corpus", str(world_dir / "corpus.jsonl"),
            "--engine", str(world_dir / "engine.json"),
            "--query-id", query_id,
            "--doc-id", last_doc,
            "--explain",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["audit"]["reason"] == "modified"
    assert payload["text"]


def test_compete_and_report(tmp_path, capsys):
    config = {
        "query": {"id": "q", "text": "coral reef"},
        "players": [
            {"id": "a", "strategy": "static", "initial_text": "Coral reef text here."},
            {"id": "b", "strategy": "mimic_top", "initial_text": "Dune walk note today."},
        ],
        "rounds": 2,
        "engine": {"kind": "lm_dirichlet", "mu": 100},
    }
    config_path = tmp_path / "comp.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    out_dir = tmp_path / "results"
    assert main(["compete", "--config", str(config_path), "--out-dir", str(out_dir)]) == 0
    report_text = capsys.readouterr().out
    assert "average rank" in report_text
    assert (out_dir / "report.txt").read_text(encoding="utf-8") == report_text
    assert main(["report", "--records", str(out_dir / "rounds.jsonl")]) == 0
    assert "average rank" in capsys.readouterr().out


def test_offline_eval_cli(world_dir, trained_model_path, tmp_path, capsys):
    out_dir = tmp_path / "off"
    code = main(
        [
            "offline-eval",
            "--snapshot", str(world_dir / "offline_snapshot.jsonl"),
            "--model", f"bot(l)={trained_model_path}",
            "--corpus", str(world_dir / "corpus.jsonl"),
            "--engine", str(world_dir / "engine.json"),
            "--out-dir", str(out_dir),
            "--n-perm", "500",
        ]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert "bot(l)" in text and "static" in text
    cells = read_jsonl(out_dir / "cells.jsonl")
    assert any(not c.get("skipped") for c in cells)
    assert main(["report", "--records", str(out_dir / "cells.jsonl"), "--kind", "offline"]) == 0
    assert "bot(l)" in capsys.readouterr().out


def test_train_accepts_config_file(world_dir, tmp_path):
    out = tmp_path / "model.json"
    config = {
        "snapshot": str(world_dir / "train_snapshot.jsonl"),
        "corpus": str(world_dir / "corpus.jsonl"),
        "engine": str(world_dir / "engine.json"),
        "out": str(out),
        "folds": 3,
        "c_grid": [0.01],
        "beta": 1.0,
        "epsilon": 1e-4,
        "m_max": 3,
        "alpha": 0.01,
        "seed": 2,
    }
    config_path = tmp_path / "train.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["train", "--config", str(config_path)]) == 0
    assert load_pair_model(out).chosen_c == 0.01


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps({"nope": 1}), encoding="utf-8")
    assert main(["train", "--config", str(config_path)]) == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_missing_required_option_is_validation_error(capsys):
    assert main(["train", "--out", "/tmp/x.json"]) == 2
    assert "--snapshot is required" in capsys.readouterr().err


def test_validation_exit_code_on_missing_file(capsys):
    code = main(["train", "--snapshot", "/nonexistent.jsonl", "--out", "/tmp/x.json"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_validation_exit_code_on_bad_model_spec(world_dir, capsys):
    code = main(
        [
            "offline-eval",
            "--snapshot", str(world_dir / "offline_snapshot.jsonl"),
            "--model", "missing-equals-sign",
        ]
    )
    assert code == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
