import pytest

from app.core.exceptions import ConfigurationError
from app.core.metrics import METRIC_NAMES
from app.services.evaluation_service import evaluation_service, parse_metric_names, predicted_tokens


def references(examples):
    return {e.id: e.c_new.texts() for e in examples}


def test_perfect_predictions(toy_examples):
    report = evaluation_service.evaluate(toy_examples, references(toy_examples), workers=1)
    assert report.count == len(toy_examples)
    assert report.scores["xmatch"] == 100.0
    assert report.scores["bleu4"] == pytest.approx(100.0)
    assert report.unchanged == 0.0


def test_copying_old_comment(toy_examples):
    copies = {e.id: e.c_old.texts() for e in toy_examples}
    report = evaluation_service.evaluate(toy_examples, copies, workers=1)
    assert report.scores["xmatch"] == 0.0
    assert report.unchanged == 100.0
    assert report.scores["gleu"] < report.scores["bleu4"]


def test_missing_predictions_score_as_empty(toy_examples):
    predictions = references(toy_examples[:5])
    report = evaluation_service.evaluate(toy_examples, predictions, workers=1)
    assert report.scores["xmatch"] == pytest.approx(50.0)


def test_threaded_matches_sequential(toy_examples):
    copies = {e.id: e.c_old.texts() for e in toy_examples}
    sequential = evaluation_service.evaluate(toy_examples, copies, workers=1)
    threaded = evaluation_service.evaluate(toy_examples, copies, workers=4)
    assert threaded.scores == sequential.scores
    assert [s.id for s in threaded.per_example] == [s.id for s in sequential.per_example]


def test_empty_corpus():
    report = evaluation_service.evaluate([], {}, workers=1)
    assert report.count == 0
    assert set(report.scores) == set(METRIC_NAMES)


def test_key_value_output(toy_examples):
    report = evaluation_service.evaluate(toy_examples, references(toy_examples), ["xmatch"], workers=1)
    lines = evaluation_service.format_key_values(report).splitlines()
    assert lines == ["xmatch=100.000", "unchanged=0.000", f"count={len(toy_examples)}"]


def test_tsv_and_table(toy_examples):
    report = evaluation_service.evaluate(toy_examples, references(toy_examples), ["xmatch", "sari"], name="oracle")
    tsv = evaluation_service.to_tsv(report).splitlines()
    assert tsv[0] == "id\txmatch\tsari\tunchanged"
    assert len(tsv) == len(toy_examples) + 1
    table = evaluation_service.format_report([report])
    assert table.splitlines()[0].split() == ["model", "count", "xmatch", "sari", "unchanged"]
    assert "oracle" in table


def test_metric_names():
    assert parse_metric_names(None) == list(METRIC_NAMES)
    assert parse_metric_names("BLEU4, sari") == ["bleu4", "sari"]
    with pytest.raises(ConfigurationError):
        parse_metric_names("bleu4,rouge")


def test_predicted_tokens():
    assert predicted_tokens({"id": "a", "tokens": ["x"]}) == ["x"]
    assert predicted_tokens({"id": "a", "candidates": [{"parsed": ["y"]}, {"parsed": ["z"]}]}) == ["y"]
    assert predicted_tokens({"id": "a", "candidates": []}) == []


def copies(examples):
    return {e.id: e.c_old.texts() for e in examples}


def test_summary_over_runs(toy_examples):
    oracle = evaluation_service.evaluate(toy_examples, references(toy_examples), ["xmatch"], name="mixed", workers=1)
    copy = evaluation_service.evaluate(toy_examples, copies(toy_examples), ["xmatch"], name="mixed", workers=1)
    summary = evaluation_service.summarize("mixed", [oracle, copy])
    assert summary.runs == 2
    assert summary.mean["xmatch"] == pytest.approx(50.0)
    assert summary.std["xmatch"] == pytest.approx(70.7106781)
    assert summary.unchanged_mean == pytest.approx(50.0)

    single = evaluation_service.summarize("oracle", [oracle])
    assert single.std == {"xmatch": 0.0}
    table = evaluation_service.format_summaries([summary, single])
    assert table.splitlines()[0].split() == ["model", "runs", "count", "xmatch", "unchanged"]
    assert "50.000 ± 70.711" in table

    with pytest.raises(ConfigurationError):
        evaluation_service.summarize("nothing", [])


class TestPairedBootstrap:
    def runs(self, examples, predictions, name):
        return [evaluation_service.evaluate(examples, predictions, ["xmatch", "bleu4"], name=name, workers=1)]

    def test_identical_systems(self, toy_examples):
        a = self.runs(toy_examples, copies(toy_examples), "a")
        b = self.runs(toy_examples, copies(toy_examples), "b")
        result = evaluation_service.paired_bootstrap(a, b, "bleu4", samples=200)
        assert result.delta == 0.0
        assert result.p_value == 1.0

    def test_clear_winner(self, toy_examples):
        oracle = self.runs(toy_examples, references(toy_examples), "oracle")
        copy = self.runs(toy_examples, copies(toy_examples), "copy")
        result = evaluation_service.paired_bootstrap(oracle, copy, "xmatch", samples=500)
        assert (result.system_a, result.system_b) == ("oracle", "copy")
        assert result.delta == pytest.approx(100.0)
        assert result.p_value < 0.05

        reverse = evaluation_service.paired_bootstrap(copy, oracle, "xmatch", samples=500)
        assert reverse.delta == pytest.approx(-100.0)
        assert reverse.p_value == 1.0

    def test_seeded_resampling_is_reproducible(self, toy_examples):
        half = {**copies(toy_examples), **references(toy_examples[:5])}
        mixed = self.runs(toy_examples, half, "half")
        copy = self.runs(toy_examples, copies(toy_examples), "copy")
        first = evaluation_service.paired_bootstrap(mixed, copy, "bleu4", samples=300, seed=7)
        second = evaluation_service.paired_bootstrap(mixed, copy, "bleu4", samples=300, seed=7)
        assert first == second
        assert 0.0 <= first.p_value <= 1.0
        assert first.delta > 0

    def test_runs_are_averaged_per_example(self, toy_examples):
        oracle = self.runs(toy_examples, references(toy_examples), "x")
        copy = self.runs(toy_examples, copies(toy_examples), "x")
        scores = evaluation_service.example_scores(oracle + copy, "xmatch")
        assert set(scores) == {e.id for e in toy_examples}
        assert set(scores.values()) == {50.0}

    def test_different_test_sets(self, toy_examples):
        a = self.runs(toy_examples, copies(toy_examples), "a")
        b = self.runs(toy_examples[:4], copies(toy_examples), "b")
        with pytest.raises(ConfigurationError):
            evaluation_service.paired_bootstrap(a, b, "xmatch")
