import logging
import math
import warnings
from typing import List, Optional, Sequence

import torch
from tqdm import tqdm

from app.core import editlex
from app.core.batch import PreparedExample, PreparedSource
from app.core.decoding import Hypothesis, beam_search, greedy_decode
from app.core.exceptions import AmbiguousAnchor, ConfigurationError
from app.core.vocab import SPECIALS
from app.schemas.corpus import Example
from app.schemas.model import Candidate, OutputRepr, Prediction, SourceRole
from app.schemas.tokens import TokenSeq
from app.services.training_service import ModelBundle

logger = logging.getLogger(__name__)


class PredictionService:
    def to_candidate(self, bundle: ModelBundle, prepared: PreparedExample, hypothesis: Hypothesis) -> Candidate:
        builder = bundle.builder()
        tokens = [builder.token_text(i, prepared.oov) for i in hypothesis.token_ids]

        if bundle.config.output_repr == OutputRepr.C_EDIT:
            edits, report = editlex.deserialize(tokens)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", AmbiguousAnchor)
                parsed, _, applied = editlex.apply_edit_tokens(prepared.c_old, edits.actions, strict=False)
            well_formed = report.well_formed and not applied.skipped
            if not well_formed:
                logger.debug(f"{prepared.id}: malformed edit output ({report.error or 'anchors skipped'}), parsed best-effort")
        else:
            parsed = [t for t in tokens if t not in SPECIALS and not editlex.is_edit_keyword(t)]
            well_formed = True

        return Candidate(
            tokens=tokens,
            token_ids=hypothesis.token_ids,
            beam_score=hypothesis.normalized,
            parsed=parsed,
            well_formed=well_formed,
        )

    def candidates(self, bundle: ModelBundle, example: Example, beam_width: Optional[int] = None,
                   max_length: Optional[int] = None) -> List[Candidate]:
        config = bundle.config
        builder = bundle.builder()
        prepared = builder.prepare(example)
        batch = builder.collate([prepared], with_target=False)
        bundle.model.eval()
        hypotheses = beam_search(
            bundle.model, builder, batch,
            beam_width=beam_width or config.beam_width,
            max_length=max_length or config.max_decode_length,
        )
        return [self.to_candidate(bundle, prepared, h) for h in hypotheses]

    def greedy(self, bundle: ModelBundle, example: Example, max_length: Optional[int] = None) -> Candidate:
        builder = bundle.builder()
        prepared = builder.prepare(example)
        batch = builder.collate([prepared], with_target=False)
        bundle.model.eval()
        hypothesis = greedy_decode(bundle.model, builder, batch, max_length or bundle.config.max_decode_length)
        return self.to_candidate(bundle, prepared, hypothesis)

    def predict(self, bundle: ModelBundle, examples: Sequence[Example], beam_width: Optional[int] = None,
                max_length: Optional[int] = None) -> List[Prediction]:
        predictions = []
        for example in tqdm(examples, desc="decoding", unit="example", disable=None):
            predictions.append(Prediction(id=example.id, candidates=self.candidates(bundle, example, beam_width, max_length)))
        logger.info(f"Decoded {len(predictions)} examples")
        return predictions

    def generation_likelihood(self, generator: ModelBundle, comment: Sequence[str], m_new: TokenSeq) -> float:
        """P(comment | M_new) ** (1 / N) under a comment-from-code model; 0 for an empty comment"""
        if not comment:
            return 0.0
        config = generator.config
        if config.source_roles() != [SourceRole.M_NEW] or config.output_repr != OutputRepr.C_NEW:
            raise ConfigurationError("Generation likelihood needs a model with only an M_new encoder and C_new output")

        builder = generator.builder()
        prepared = builder.prepare_sources(
            "", {SourceRole.M_NEW: PreparedSource(tokens=m_new.texts())}, list(comment), c_old=[],
        )
        batch = builder.collate([prepared])
        generator.model.eval()
        with torch.no_grad():
            log_probs = generator.model.token_log_probs(batch)[0]
        # last step is the end token
        return math.exp(float(log_probs[:len(comment)].sum()) / len(comment))


prediction_service = PredictionService()
