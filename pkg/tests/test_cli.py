import json

import pytest

from subatlas.cli import main


@pytest.fixture()
def workspace(tmp_path, fixture_paths):
    """Artifact root with April and May ingested and April trained small."""
    root = tmp_path / "artifacts"

    def run(*argv):
        return main(["--artifacts", str(root), *argv])

    for month in ("2021-04", "2021-05"):
        assert run(
            "ingest", "--month", month, "--dump", str(fixture_paths[month]),
            "--top-n", "4", "--percentile", "0.95",
        ) == 0
    assert run(
        "train", "--month", "2021-04", "--dim", "8", "--epochs", "2",
        "--negative", "5", "--threshold", "0.0", "--lr", "0.05",
    ) == 0
    return root, run


def read_json(path):
    return json.loads(path.read_text())


def test_ingest_writes_snapshot_and_reports(tmp_path, fixture_paths, capsys):
    root = tmp_path / "artifacts"
    rc = main(
        ["--artifacts", str(root), "ingest", "--month", "2021-04",
         "--dump", str(fixture_paths["2021-04"]), "--top-n", "4"]
    )
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["month"] == "2021-04"
    assert out["subreddits"] == 4
    assert (root / "months" / "2021-04" / "snapshot" / "contexts.bin").exists()


def test_ingest_missing_dump_exits_nonzero(tmp_path, capsys):
    rc = main(
        ["--artifacts", str(tmp_path / "a"), "ingest", "--month", "2021-04",
         "--dump", str(tmp_path / "nope.jsonl.gz")]
    )
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_train_single_config_and_report(workspace, capsys):
    root, _ = workspace
    mdir = root / "months" / "2021-04"
    assert (mdir / "model" / "vectors.f32").exists()
    report = read_json(mdir / "grid" / "report.json")
    assert len(report["rows"]) == 1
    assert report["rows"][0]["selected"] is True
    model_doc = read_json(mdir / "model" / "model.json")
    assert model_doc["params"]["dim"] == 8
    assert model_doc["normalized"] is True


def test_analogies_command(workspace, fixture_paths, capsys):
    _, run = workspace
    assert run(
        "analogies", "--month", "2021-04", "--pairs", str(fixture_paths["pairs"]),
    ) == 0
    doc = json.loads(capsys.readouterr().out)
    # 4-subreddit vocabulary: excluding the three query terms leaves only the
    # right answer, so precision is exactly 1
    assert doc["p_at_k"] == 1.0
    assert doc["k"] == 5


def test_cluster_metrics_and_intruder_gen(workspace, tmp_path, capsys):
    root, run = workspace
    assert run("cluster", "--month", "2021-04", "--algo", "kmeanspp", "-k", "2") == 0
    assert run("cluster", "--month", "2021-04", "--algo", "ha_ward", "-k", "2") == 0
    mdir = root / "months" / "2021-04"
    assert (mdir / "clusters" / "kmeanspp-k2.json").exists()
    assert (mdir / "clusters" / "tree-ward.json").exists()
    doc = read_json(mdir / "clusters" / "kmeanspp-k2.json")
    assert sum(doc["sizes"]) == 4

    assert run("metrics", "--month", "2021-04", "--algo", "kmeanspp", "-k", "2") == 0
    metrics_doc = read_json(mdir / "metrics" / "kmeanspp-k2.json")
    assert -1.0 <= metrics_doc["silhouette"] <= 1.0

    out_dir = tmp_path / "sheets"
    capsys.readouterr()
    assert run(
        "intruder-gen", "--month", "2021-04", "--algo", "kmeanspp", "-k", "2",
        "--seed", "0", "--out-dir", str(out_dir),
    ) == 0
    # clusters of 2 subreddits are all below the 5-member floor
    assert "2 clusters skipped" in capsys.readouterr().out
    assert (out_dir / "tasks.csv").exists()
    assert (out_dir / "key.csv").exists()
    assert (out_dir / "clusters.csv").exists()
    skips = read_json(out_dir / "skips.json")
    assert len(skips) == 2


def test_stability_and_vi_commands(workspace, capsys):
    root, run = workspace
    assert run(
        "train", "--month", "2021-05", "--dim", "8", "--epochs", "2",
        "--negative", "5", "--threshold", "0.0", "--lr", "0.05",
    ) == 0
    for month in ("2021-04", "2021-05"):
        assert run("cluster", "--month", month, "--algo", "kmeanspp", "-k", "2") == 0
        assert run("cluster", "--month", month, "--algo", "ha_ward", "-k", "2") == 0
    capsys.readouterr()

    assert run("stability", "-n", "3") == 0
    stability = read_json(root / "cross" / "stability.json")
    assert stability["months"] == ["2021-04", "2021-05"]
    assert stability["n_neighbors"] == 3

    assert run("vi", "--algo", "kmeanspp", "-k", "2") == 0
    vi_doc = read_json(root / "cross" / "vi" / "kmeanspp-k2.json")
    assert vi_doc["labels"] == ["2021-04", "2021-05"]

    assert run("vi", "-k", "2", "--pairing", "algorithms") == 0
    cross_doc = read_json(root / "cross" / "vi" / "algorithms-k2.json")
    assert cross_doc["labels"] == ["ha_ward", "kmeanspp"]
    assert cross_doc["units"] == "bits"


def test_stability_requires_two_months(workspace, capsys):
    _, run = workspace
    with pytest.raises(SystemExit, match="at least 2 months"):
        run("stability", "--months", "2021-04")


def test_intruder_and_coherence_scoring(tmp_path, capsys):
    sheets = tmp_path / "sheets"
    sheets.mkdir()
    (sheets / "tasks.csv").write_text(
        "task_id,option_1,option_2,option_3,option_4,option_5,option_6\n"
        "t1,a,x,b,c,d,e\n"
    )
    (sheets / "key.csv").write_text("task_id,intruder\nt1,x\n")
    (sheets / "responses.csv").write_text(
        "annotator,task_id,chosen\nann1,t1,x\nann2,t1,a\n"
    )
    rc = main(
        ["intruder-score", "--tasks", str(sheets / "tasks.csv"),
         "--key", str(sheets / "key.csv"),
         "--responses", str(sheets / "responses.csv")]
    )
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["per_cluster"] == {"t1": 0.5}

    (sheets / "coherence.csv").write_text(
        "annotator,cluster_id,coherent,theme\n"
        "ann1,0,1,sports\nann2,0,1,\nann1,1,0,\nann2,1,1,\n"
    )
    rc = main(["coherence-score", "--responses", str(sheets / "coherence.csv")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["per_cluster"]["0"] == 1.0
    assert "gwet_ac1" in doc


def test_export_with_config_runs_pipeline(tmp_path, fixture_paths, capsys):
    root = tmp_path / "tree"
    config = {
        "months": ["2021-04"],
        "inputs": {"2021-04": str(fixture_paths["2021-04"])},
        "artifact_root": str(root),
        "analogy_path": str(fixture_paths["pairs"]),
        "filter": {"top_n_subreddits": 4},
        "grid": [{"dim": 8, "epochs": 2, "negative_samples": 5}],
        "clusterings": [["kmeanspp", 2]],
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    assert main(["export", "--config", str(config_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["months"]["2021-04"]["status"] == "built"
    assert (root / "manifest.json").exists()

    # a failing month flips the exit code
    bad = dict(config)
    bad["months"] = ["2021-04", "2021-06"]
    bad["inputs"] = {**config["inputs"], "2021-06": str(tmp_path / "nope.gz")}
    config_path.write_text(json.dumps(bad))
    assert main(["export", "--config", str(config_path)]) == 1


def test_export_tree_from_stages(workspace, capsys):
    root, run = workspace
    assert run("cluster", "--month", "2021-04", "--algo", "kmeanspp", "-k", "2") == 0
    capsys.readouterr()
    assert run("export", "--stability-n", "3") == 0
    result = json.loads(capsys.readouterr().out)
    assert result["months"] == ["2021-04"]  # only April has a trained model
    assert (root / "months" / "2021-04" / "neighbors_top20.json").exists()
    assert (root / "cross" / "stability.json").exists()


def test_artifact_root_from_environment(tmp_path, fixture_paths, monkeypatch, capsys):
    root = tmp_path / "via_env"
    monkeypatch.setenv("SUBATLAS_ARTIFACT_ROOT", str(root))
    rc = main(
        ["ingest", "--month", "2021-04", "--dump", str(fixture_paths["2021-04"]),
         "--top-n", "4"]
    )
    assert rc == 0
    assert (root / "months" / "2021-04" / "snapshot" / "vocab.json").exists()
