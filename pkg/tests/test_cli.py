import hashlib
import json

import pytest

from newstriage.cli import run
from newstriage.corpus import load_dataset

from conftest import write_planted_dataset


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_evaluate_is_byte_deterministic(tmp_path, small_dataset_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    args = ["evaluate", "--model", "lr", "--dataset", str(small_dataset_path), "--seed", "42", "--folds", "4"]
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


def test_rank_is_byte_deterministic_and_sorted(tmp_path, small_dataset_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    args = ["rank", "--model", "lr", "--dataset", str(small_dataset_path), "--seed", "7"]
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    assert (out1 / "queue.csv").read_bytes() == (out2 / "queue.csv").read_bytes()
    rows = (out1 / "queue.csv").read_text().splitlines()[1:]
    scores = [float(r.split(",")[2]) for r in rows]
    assert scores == sorted(scores, reverse=True)


def test_ingest_filters_to_keyword_hits(tmp_path):
    dataset = tmp_path / "raw.jsonl"
    records = []
    for i in range(20):
        text = f"text number {i}" if i % 4 else f"this is 誤報 number {i} https://x.io/{i} #tag"
        records.append({"type": "post", "id": f"p{i}", "url": f"https://ex.com/{i % 6}", "raw": text, "label": 1 if i % 8 == 0 else -1})
    dataset.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in records) + "\n", encoding="utf-8")
    keywords = tmp_path / "kw.txt"
    keywords.write_text("誤報\n", encoding="utf-8")

    # hand-filtered oracle
    expected_ids = [r["id"] for r in records if "誤報" in r["raw"]]
    assert len(expected_ids) == 5

    out = tmp_path / "out"
    assert run(["ingest", "--dataset", str(dataset), "--keywords", str(keywords), "--out", str(out)]) == 0
    posts, articles = load_dataset(out / "dataset.jsonl")
    assert [p.id for p in posts] == expected_ids
    assert all(p.comment_text is not None and "https://" not in p.comment_text for p in posts)
    assert articles and all(a.post_ids for a in articles)


def test_train_writes_model(tmp_path, small_dataset_path):
    out = tmp_path / "out"
    assert run(["train", "--model", "tree", "--dataset", str(small_dataset_path), "--out", str(out)]) == 0
    container = json.loads((out / "model.json").read_text())
    assert container["kind"] == "tree" and "feature_fingerprint" in container


def test_curve_outputs(tmp_path, small_dataset_path):
    out = tmp_path / "out"
    code = run(
        [
            "curve", "--model", "lr", "--dataset", str(small_dataset_path),
            "--folds", "3", "--fractions", "0.5,1.0", "--out", str(out),
        ]
    )
    assert code == 0
    recall_lines = (out / "recall_curve.csv").read_text().splitlines()
    assert recall_lines[0] == "K,recall"
    values = [float(r.split(",")[1]) for r in recall_lines[1:]]
    assert values == sorted(values)
    learn_lines = (out / "learning_curve.csv").read_text().splitlines()
    assert learn_lines[0] == "fraction,f1" and len(learn_lines) == 3


def test_inputs_never_mutated(tmp_path, small_dataset_path):
    before = sha(small_dataset_path)
    run(["evaluate", "--dataset", str(small_dataset_path), "--folds", "3", "--out", str(tmp_path / "o")])
    run(["rank", "--dataset", str(small_dataset_path), "--out", str(tmp_path / "o2")])
    assert sha(small_dataset_path) == before


def test_usage_error_exit_code(capsys):
    assert run(["evaluate"]) == 1  # --dataset missing
    assert run(["no-such-command"]) == 1
    err = capsys.readouterr().err
    assert "usage_error:" in err


def test_data_error_exit_code(tmp_path, capsys):
    missing = tmp_path / "nope.jsonl"
    assert run(["evaluate", "--dataset", str(missing), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert run(["rank", "--dataset", str(bad), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err
