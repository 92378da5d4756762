"""Greedy and beam decoding for a single example."""
from typing import List, NamedTuple, Optional

import torch

from app.core.batch import Batch, BatchBuilder, decoder_feature_row
from app.core.network import LOG_FLOOR, CommentUpdateModel, DecoderState
from app.core.vocab import SOS


class Hypothesis(NamedTuple):
    token_ids: List[int]
    log_prob: float  # summed, including the end token when finished
    finished: bool

    @property
    def normalized(self) -> float:
        steps = len(self.token_ids) + (1 if self.finished else 0)
        return self.log_prob / max(steps, 1)


def _decoder_features(builder: BatchBuilder, batch: Batch, histories: List[List[int]]) -> Optional[torch.Tensor]:
    if not builder.config.decoder_features:
        return None
    item = batch.prepared[0]
    comment_set, code_set = builder.source_sets(item)
    rows = []
    for history in histories:
        token = builder.token_text(history[-1], item.oov) if history else SOS
        rows.append(decoder_feature_row(token, comment_set, code_set))
    dtype = batch.sources[0].features.dtype if batch.sources[0].features is not None else torch.float32
    return torch.tensor(rows, dtype=dtype)


@torch.no_grad()
def beam_search(
    model: CommentUpdateModel,
    builder: BatchBuilder,
    batch: Batch,
    beam_width: int,
    max_length: int,
) -> List[Hypothesis]:
    """Length-normalized beam search over a batch holding one example.

    Live beams are expanded by cumulative log-probability; finished hypotheses
    are ranked by log-probability divided by their length (end token included).
    """
    vocab = builder.comment_vocab
    encoded = model.encode(batch)
    state = model.initial_state(encoded)

    live: List[Hypothesis] = [Hypothesis([], 0.0, False)]
    finished: List[Hypothesis] = []

    for _ in range(max_length):
        n = len(live)
        previous = torch.tensor([h.token_ids[-1] if h.token_ids else vocab.sos_id for h in live], dtype=torch.long)
        features = _decoder_features(builder, batch, [h.token_ids for h in live])
        probs, state = model.decode_step(previous, state, encoded.expand(n), batch.extended_size, features)
        log_probs = torch.log(probs.clamp_min(LOG_FLOOR))
        log_probs[:, vocab.pad_id] = float("-inf")
        totals = log_probs + torch.tensor([h.log_prob for h in live], dtype=log_probs.dtype).unsqueeze(1)

        k = min(beam_width, totals.numel())
        scores, flat = totals.view(-1).topk(k)
        width = totals.size(1)

        next_live: List[Hypothesis] = []
        parents: List[int] = []
        for score, index in zip(scores.tolist(), flat.tolist()):
            parent, token = divmod(index, width)
            if token == vocab.eos_id:
                finished.append(Hypothesis(live[parent].token_ids, score, True))
            else:
                next_live.append(Hypothesis(live[parent].token_ids + [token], score, False))
                parents.append(parent)

        if len(finished) >= beam_width or not next_live:
            break
        live = next_live
        state = state.select(torch.tensor(parents, dtype=torch.long))

    if not finished:
        finished = live
    finished.sort(key=lambda h: h.normalized, reverse=True)
    return finished[:beam_width]


def greedy_decode(model: CommentUpdateModel, builder: BatchBuilder, batch: Batch, max_length: int) -> Hypothesis:
    with torch.no_grad():
        vocab = builder.comment_vocab
        encoded = model.encode(batch)
        state: DecoderState = model.initial_state(encoded)
        tokens: List[int] = []
        total = 0.0
        for _ in range(max_length):
            previous = torch.tensor([tokens[-1] if tokens else vocab.sos_id], dtype=torch.long)
            features = _decoder_features(builder, batch, [tokens])
            probs, state = model.decode_step(previous, state, encoded, batch.extended_size, features)
            log_probs = torch.log(probs.clamp_min(LOG_FLOOR))[0]
            log_probs[vocab.pad_id] = float("-inf")
            token = int(log_probs.argmax())
            total += float(log_probs[token])
            if token == vocab.eos_id:
                return Hypothesis(tokens, total, True)
            tokens.append(token)
        return Hypothesis(tokens, total, False)
