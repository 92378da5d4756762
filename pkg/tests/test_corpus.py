import pytest

from app.core.exceptions import InsufficientProjects
from app.schemas.corpus import RejectReason, Split
from app.services.corpus_service import corpus_service, record_id, similarity
from app.utils.helpers import read_jsonl
from tests.conftest import ROT_X_RECORD


def _variant(**changes):
    record = dict(ROT_X_RECORD)
    record.update(changes)
    return record


class TestIngest:
    def test_rot_x_record(self, rot_x_example):
        assert rot_x_example.id == record_id(rot_x_example.record)
        assert rot_x_example.c_old.texts() == ["double", "the", "roll", "euler", "angle", "."]
        assert rot_x_example.c_new.joined() == "double the roll euler angle in degrees ."
        assert rot_x_example.c_edit is not None

    def test_long_field_names(self):
        example = corpus_service.build_example({
            "project": "p",
            "method_before": ROT_X_RECORD["m_old"],
            "method_after": ROT_X_RECORD["m_new"],
            "comment_before": ROT_X_RECORD["c_old"],
            "comment_after": ROT_X_RECORD["c_new"],
        })
        assert example.m_old.texts()[:2] == ["public", "double"]

    def test_bad_records_are_skipped(self, toy_records):
        broken = [
            {"project": "p", "m_old": "int f() {", "m_new": "int f() { }", "c_old": "@return x", "c_new": "@return y"},
            {"project": "p", "m_old": "int f() {}", "m_new": "int g() {}", "c_old": "@return", "c_new": "@return y"},
            {"m_old": "missing project"},
        ]
        examples = corpus_service.ingest(toy_records + broken)
        assert len(examples) == len(toy_records)

    def test_threaded_ingest_keeps_order(self, toy_records):
        sequential = corpus_service.ingest(toy_records, workers=1)
        threaded = corpus_service.ingest(toy_records, workers=4)
        assert [e.id for e in threaded] == [e.id for e in sequential]


class TestFilter:
    def test_toy_corpus_survives(self, toy_examples):
        kept, rejected = corpus_service.filter(toy_examples)
        assert len(kept) == len(toy_examples)
        assert rejected == []

    @pytest.mark.parametrize("changes,reason", [
        ({"m_new": ROT_X_RECORD["m_new"].replace("Math.toDegrees(mOrientation.getRotationX())", "mOrientation.getRotationX()")
          .replace("{", "{ int unused = 0;", 1)}, RejectReason.RETURN_IRRELEVANT),
        ({"m_new": ROT_X_RECORD["m_new"].replace("getRotX", "getRollDegrees")}, RejectReason.NAME_CHANGED),
        ({"c_new": "@return Double, the roll Euler angle!"}, RejectReason.STYLISTIC),
        ({"c_new": ROT_X_RECORD["c_old"] + " "}, RejectReason.STYLISTIC),
    ])
    def test_rejections(self, changes, reason):
        example = corpus_service.build_example(_variant(**changes))
        _, rejected = corpus_service.filter([example])
        assert [r.reason for r in rejected] == [reason]

    def test_duplicates(self, rot_x_example):
        twin = corpus_service.build_example(_variant(commit_after="b9"))
        kept, rejected = corpus_service.filter([rot_x_example, twin])
        assert kept == [rot_x_example]
        assert rejected[0].reason == RejectReason.DUPLICATE


class TestPartition:
    def test_projects_do_not_straddle_splits(self, toy_examples):
        partition = corpus_service.partition(toy_examples, seed=0)
        project_of = {e.id: e.project for e in toy_examples}
        owners = {}
        for split in Split:
            ids = partition.ids(split)
            assert ids, split
            for example_id in ids:
                owners.setdefault(project_of[example_id], set()).add(split)
        assert all(len(splits) == 1 for splits in owners.values())
        assert sorted(i for s in Split for i in partition.ids(s)) == sorted(e.id for e in toy_examples)

    def test_deterministic(self, toy_examples):
        assert corpus_service.partition(toy_examples, seed=3) == corpus_service.partition(toy_examples, seed=3)

    def test_needs_three_projects(self, toy_examples):
        two = [e for e in toy_examples if e.project in ("orientation", "adapters")]
        with pytest.raises(InsufficientProjects):
            corpus_service.partition(two)

    def test_file_round_trip(self, tmp_path, toy_examples):
        partition = corpus_service.partition(toy_examples)
        path = tmp_path / "partition.jsonl"
        corpus_service.write_partition(str(path), partition)
        assert corpus_service.read_partition(str(path)) == partition
        train = corpus_service.select(toy_examples, partition, Split.TRAIN)
        assert [e.id for e in train] == [e.id for e in toy_examples if e.id in set(partition.train)]


class TestStats:
    def test_summary(self, toy_examples):
        stats = corpus_service.stats(toy_examples)
        assert stats.examples == 10
        assert stats.projects == 4
        assert 0 < stats.mean_edit_actions < 4
        assert sum(stats.edit_action_counts.values()) == sum(len(e.c_edit) for e in toy_examples)
        assert sum(stats.edit_action_percentages.values()) == pytest.approx(100.0)
        assert stats.rts_unchanged > 0.5
        assert 0 < stats.comment_similarity < 1

    def test_empty(self):
        assert corpus_service.stats([]).examples == 0

    def test_round_trip(self, toy_examples):
        report = corpus_service.round_trip_report(toy_examples)
        assert report.checked == len(toy_examples)
        assert report.ok

    def test_similarity(self):
        assert similarity(["a", "b"], ["a", "b"]) == 1.0
        assert similarity(["a", "a", "b"], ["a", "c"]) == pytest.approx(1 / 3)
        assert similarity([], []) == 1.0


def test_write_files(tmp_path, toy_examples):
    records, derived = tmp_path / "records.jsonl", tmp_path / "derived.jsonl"
    assert corpus_service.write(str(records), toy_examples, derived_path=str(derived)) == 10
    reloaded = corpus_service.load(str(records))
    assert [e.id for e in reloaded] == [e.id for e in toy_examples]
    rows = list(read_jsonl(derived))
    assert rows[0]["c_edit"][0].startswith("<")
