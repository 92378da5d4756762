import json
import logging

import pytest
from click.testing import CliRunner

from app.cli import cli
from app.core import editlex
from app.services.corpus_service import corpus_service
from app.utils.helpers import read_jsonl, write_jsonl
from tests.conftest import ROT_X_RECORD


@pytest.fixture
def runner():
    return CliRunner()


def lines(result):
    return [line for line in result.output.splitlines() if line.strip()]


def test_apply_rot_x_edit(runner, tmp_path, rot_x_example):
    path = tmp_path / "edits.jsonl"
    write_jsonl(path, [{"id": "x", "c_old": rot_x_example.c_old.texts(), "c_edit": editlex.serialize(rot_x_example.c_edit)}])
    result = runner.invoke(cli, ["apply-edits", str(path)])
    assert result.exit_code == 0, result.output
    assert lines(result) == ["double the roll euler angle in degrees ."]


def test_encode_then_apply_reproduces_new_comments(runner, tmp_path, records_file, toy_examples):
    encoded = tmp_path / "encoded.jsonl"
    result = runner.invoke(cli, ["encode-edits", str(records_file), str(encoded)])
    assert result.exit_code == 0, result.output
    assert len(list(read_jsonl(encoded))) == len(toy_examples)

    result = runner.invoke(cli, ["apply-edits", str(encoded)])
    assert result.exit_code == 0, result.output
    assert lines(result) == [e.c_new.joined() for e in toy_examples]


def test_malformed_edit_reports_error(runner, tmp_path, rot_x_example):
    path = tmp_path / "broken.jsonl"
    truncated = editlex.serialize(rot_x_example.c_edit)[:2]
    write_jsonl(path, [{"id": "x", "c_old": rot_x_example.c_old.texts(), "c_edit": truncated}])
    result = runner.invoke(cli, ["apply-edits", str(path)])
    assert result.exit_code == 1
    assert "error code=MalformedEditSequence detail=" in result.output


def test_lenient_apply_keeps_going(runner, tmp_path, rot_x_example):
    path = tmp_path / "broken.jsonl"
    truncated = editlex.serialize(rot_x_example.c_edit)[:2]
    write_jsonl(path, [{"id": "x", "c_old": rot_x_example.c_old.texts(), "c_edit": truncated}])
    result = runner.invoke(cli, ["apply-edits", "--lenient", str(path)])
    assert result.exit_code == 0
    assert "double the roll euler angle ." in result.output


def test_evaluate_references(runner, tmp_path, records_file, toy_examples):
    predictions = tmp_path / "predictions.jsonl"
    write_jsonl(predictions, [{"id": e.id, "tokens": e.c_new.texts()} for e in toy_examples])
    result = runner.invoke(cli, ["evaluate", "--predictions", str(predictions), "--data", str(records_file)])
    assert result.exit_code == 0, result.output
    assert "xmatch=100.000" in lines(result)
    assert f"count={len(toy_examples)}" in lines(result)


def test_copy_baseline_then_evaluate(runner, tmp_path, records_file):
    predictions = tmp_path / "copy.jsonl"
    result = runner.invoke(cli, ["baseline", "--name", "copy", "--data", str(records_file), str(predictions)])
    assert result.exit_code == 0, result.output

    tsv = tmp_path / "copy.tsv"
    result = runner.invoke(cli, [
        "evaluate", "--predictions", str(predictions), "--data", str(records_file),
        "--metrics", "xmatch,sari", "--tsv", str(tsv),
    ])
    assert result.exit_code == 0, result.output
    assert "xmatch=0.000" in lines(result)
    assert "unchanged=100.000" in lines(result)
    assert tsv.read_text().startswith("id\txmatch\tsari")


def test_split_without_partition_fails(runner, tmp_path, records_file):
    predictions = tmp_path / "predictions.jsonl"
    write_jsonl(predictions, [])
    result = runner.invoke(cli, [
        "evaluate", "--predictions", str(predictions), "--data", str(records_file), "--split", "test",
    ])
    assert result.exit_code == 1
    assert "error code=ConfigurationError" in result.output


def test_stats(runner, records_file):
    result = runner.invoke(cli, ["stats", "--round-trip", str(records_file)])
    assert result.exit_code == 0, result.output
    values = dict(line.split("=", 1) for line in lines(result) if "=" in line and not line.startswith("error"))
    assert json.loads(values["examples"]) == 10
    assert json.loads(values["projects"]) == 4
    assert values["round_trip_failures"] == "0"


def test_partition(runner, tmp_path, records_file):
    output = tmp_path / "partition.jsonl"
    result = runner.invoke(cli, ["partition", "--seed", "1", str(records_file), str(output)])
    assert result.exit_code == 0, result.output
    counts = dict(line.split("=") for line in lines(result))
    assert set(counts) == {"train", "valid", "test"}
    assert sum(int(v) for v in counts.values()) == 10
    assert all(int(v) > 0 for v in counts.values())


def test_filter_writes_rejections(runner, tmp_path):
    records = tmp_path / "records.jsonl"
    renamed = dict(ROT_X_RECORD, m_new=ROT_X_RECORD["m_new"].replace("getRotX", "getRollDegrees"))
    write_jsonl(records, [ROT_X_RECORD, renamed])
    kept, rejected = tmp_path / "kept.jsonl", tmp_path / "rejected.jsonl"
    result = runner.invoke(cli, ["filter", str(records), str(kept), "--rejected", str(rejected)])
    assert result.exit_code == 0, result.output
    assert lines(result) == ["kept=1", "rejected=1"]
    assert len(list(read_jsonl(rejected))) == 1


def test_unexpected_failure_is_a_single_line(runner, records_file, monkeypatch, caplog):
    def broken(examples):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr(corpus_service, "stats", broken)
    caplog.set_level(logging.DEBUG, logger="app.cli")
    result = runner.invoke(cli, ["stats", str(records_file)])
    assert result.exit_code == 1
    assert lines(result) == ['error code=RuntimeError detail="disk on fire"']
    assert "Traceback" not in result.output

    logged = [r for r in caplog.records if r.name == "app.cli"]
    assert [r.levelno for r in logged] == [logging.DEBUG]
    assert logged[0].exc_info is not None


def test_report_with_repeated_runs_and_comparison(runner, tmp_path, records_file, toy_examples):
    oracle, copy = tmp_path / "oracle.jsonl", tmp_path / "copy.jsonl"
    write_jsonl(oracle, [{"id": e.id, "tokens": e.c_new.texts()} for e in toy_examples])
    write_jsonl(copy, [{"id": e.id, "tokens": e.c_old.texts()} for e in toy_examples])
    result = runner.invoke(cli, [
        "report", "--data", str(records_file), "--metrics", "xmatch",
        "--predictions", f"oracle={oracle}", "--predictions", f"oracle={oracle}", "--predictions", f"copy={copy}",
        "--compare", "oracle,copy", "--bootstrap-samples", "100", "--seed", "3",
        "--tsv-dir", str(tmp_path / "scores"),
    ])
    assert result.exit_code == 0, result.output
    output = lines(result)
    assert output[0].split()[:3] == ["model", "runs", "count"]
    assert any(line.startswith("oracle") and "100.000 ± 0.000" in line for line in output)
    assert output[-1] == "compare=oracle,copy metric=xmatch delta=100.000 p_value=0.0000"
    assert sorted(p.name for p in (tmp_path / "scores").iterdir()) == ["copy.tsv", "oracle-1.tsv", "oracle-2.tsv"]


def test_report_rejects_unknown_comparison(runner, tmp_path, records_file, toy_examples):
    copy = tmp_path / "copy.jsonl"
    write_jsonl(copy, [{"id": e.id, "tokens": e.c_old.texts()} for e in toy_examples])
    result = runner.invoke(cli, [
        "report", "--data", str(records_file), "--predictions", f"copy={copy}", "--compare", "copy,edit",
    ])
    assert result.exit_code == 1
    assert "error code=ConfigurationError" in result.output
