import logging
import math
from typing import Callable, List, Sequence

from pydantic import BaseModel

from app.core.metrics import meteor
from app.schemas.model import Candidate
from app.schemas.tokens import TokenSeq

logger = logging.getLogger(__name__)

Similarity = Callable[[Sequence[str], Sequence[str]], float]
LikelihoodScorer = Callable[[Sequence[str]], float]


class RerankWeights(BaseModel):
    beam: float = 0.5
    generation: float = 0.3
    similarity: float = 0.2


EDIT_WEIGHTS = RerankWeights()
GENERATION_WEIGHTS = RerankWeights(beam=0.5, generation=0.0, similarity=0.5)


def beam_probability(candidate: Candidate) -> float:
    """Length-normalized log-probability mapped back to [0, 1]"""
    return math.exp(candidate.beam_score)


def _ordered(candidates: List[Candidate]) -> List[Candidate]:
    ranked = sorted(enumerate(candidates), key=lambda pair: (-pair[1].combined, pair[0]))
    if ranked and ranked[0][0] != 0:
        logger.debug(f"Reranking promoted beam candidate {ranked[0][0]} to the top")
    return [candidate for _, candidate in ranked]


class RerankService:
    def rerank_edit(
        self,
        candidates: Sequence[Candidate],
        c_old: TokenSeq,
        scorer: LikelihoodScorer,
        weights: RerankWeights = EDIT_WEIGHTS,
        similarity: Similarity = meteor,
    ) -> List[Candidate]:
        """Combine beam probability, generation likelihood and similarity to the old comment.

        `scorer` maps a parsed comment to its generation likelihood given the new method,
        e.g. a partial of PredictionService.generation_likelihood.
        """
        old = c_old.texts()
        scored = []
        for candidate in candidates:
            components = {
                "beam": beam_probability(candidate),
                "generation": scorer(candidate.parsed),
                "similarity": similarity(candidate.parsed, old),
            }
            combined = (
                weights.beam * components["beam"]
                + weights.generation * components["generation"]
                + weights.similarity * components["similarity"]
            )
            scored.append(candidate.model_copy(update={"scores": components, "combined": combined}))
        return _ordered(scored)

    def rerank_generation(
        self,
        candidates: Sequence[Candidate],
        c_old: TokenSeq,
        weights: RerankWeights = GENERATION_WEIGHTS,
        similarity: Similarity = meteor,
    ) -> List[Candidate]:
        old = c_old.texts()
        scored = []
        for candidate in candidates:
            components = {
                "beam": beam_probability(candidate),
                "similarity": similarity(candidate.parsed, old),
            }
            combined = weights.beam * components["beam"] + weights.similarity * components["similarity"]
            scored.append(candidate.model_copy(update={"scores": components, "combined": combined}))
        return _ordered(scored)


rerank_service = RerankService()
