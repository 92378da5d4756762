import math
import random

import pytest

from app.schemas.model import Candidate
from app.schemas.tokens import TokenSeq
from app.services.rerank_service import RerankWeights, beam_probability, rerank_service

C_OLD = TokenSeq.from_texts(["the", "roll", "angle"])


def candidate(parsed, probability):
    return Candidate(tokens=list(parsed), beam_score=math.log(probability), parsed=list(parsed))


def constant(value):
    return lambda tokens: value


def test_combined_score_is_weighted_sum():
    candidates = [
        candidate(["the", "roll", "angle", "in", "degrees"], 0.4),
        candidate(["the", "angle"], 0.3),
        candidate(["nothing", "alike"], 0.2),
    ]
    likelihood = {5: 0.6, 2: 0.1}
    scorer = lambda tokens: likelihood.get(len(tokens), 0.05)
    similarity = lambda a, b: len(set(a) & set(b)) / max(len(a), len(b), 1)

    ranked = rerank_service.rerank_edit(candidates, C_OLD, scorer, similarity=similarity)
    for c in ranked:
        expected = (
            0.5 * beam_probability(c)
            + 0.3 * scorer(c.parsed)
            + 0.2 * similarity(c.parsed, C_OLD.texts())
        )
        assert c.combined == pytest.approx(expected, abs=1e-12)
        assert set(c.scores) == {"beam", "generation", "similarity"}
    assert ranked[0].parsed == ["the", "roll", "angle", "in", "degrees"]
    assert ranked[-1].parsed == ["nothing", "alike"]


def test_result_is_permutation_of_input():
    rng = random.Random(0)
    candidates = [candidate([f"w{i}"], rng.uniform(0.01, 1.0)) for i in range(12)]
    ranked = rerank_service.rerank_edit(candidates, C_OLD, constant(0.5))
    assert sorted(c.parsed[0] for c in ranked) == sorted(c.parsed[0] for c in candidates)
    combined = [c.combined for c in ranked]
    assert combined == sorted(combined, reverse=True)


def test_ties_keep_beam_order():
    candidates = [candidate(["x"], 0.5), candidate(["y"], 0.5), candidate(["z"], 0.5)]
    ranked = rerank_service.rerank_edit(candidates, C_OLD, constant(0.2), similarity=lambda a, b: 0.0)
    assert [c.parsed for c in ranked] == [["x"], ["y"], ["z"]]


def test_higher_likelihood_never_ranks_lower():
    candidates = [candidate(["a"], 0.3), candidate(["b"], 0.3)]
    boosted = lambda tokens: 0.9 if tokens == ["b"] else 0.1
    ranked = rerank_service.rerank_edit(candidates, C_OLD, boosted, similarity=lambda a, b: 0.0)
    assert ranked[0].parsed == ["b"]


def test_inputs_are_not_mutated():
    candidates = [candidate(["a"], 0.3)]
    rerank_service.rerank_edit(candidates, C_OLD, constant(0.1))
    assert candidates[0].combined is None
    assert candidates[0].scores == {}


def test_generation_mode_weights():
    candidates = [candidate(["the", "roll"], 0.2), candidate(["other"], 0.6)]
    ranked = rerank_service.rerank_generation(candidates, C_OLD, similarity=lambda a, b: 1.0 if "roll" in a else 0.0)
    assert set(ranked[0].scores) == {"beam", "similarity"}
    assert ranked[0].parsed == ["the", "roll"]
    assert ranked[0].combined == pytest.approx(0.5 * 0.2 + 0.5 * 1.0)


def test_custom_weights():
    weights = RerankWeights(beam=1.0, generation=0.0, similarity=0.0)
    candidates = [candidate(["a"], 0.1), candidate(["b"], 0.9)]
    ranked = rerank_service.rerank_edit(candidates, C_OLD, constant(1.0), weights=weights)
    assert ranked[0].parsed == ["b"]
    assert ranked[0].combined == pytest.approx(0.9)
