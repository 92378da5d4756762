"""GRU encoder-decoder with split attention over several encoders and a pointer
that copies from every source sequence.

Every source (old comment, M_edit, M_old, M_new) has its own two-layer
bidirectional GRU. The decoder attends to each encoder separately, concatenates
the contexts, and mixes a vocabulary distribution with one copy distribution per
source through a softmax gate.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from app.core.batch import DECODER_FEATURE_WIDTH, Batch, SourceTensors, feature_width
from app.core.exceptions import ConfigurationError
from app.core.vocab import SPECIALS, UNK
from app.schemas.model import ModelConfig, SourceRole

logger = logging.getLogger(__name__)

PAD_ID = 0
UNK_ID = SPECIALS.index(UNK)
LOG_FLOOR = 1e-12


class GeneralAttention(nn.Module):
    """score(h, m) = h^T W m, softmax over unmasked positions"""

    def __init__(self, query_dim: int, memory_dim: int):
        super().__init__()
        self.proj = nn.Linear(memory_dim, query_dim, bias=False)

    def forward(self, query: torch.Tensor, memory: torch.Tensor, mask: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        scores = torch.bmm(self.proj(memory), query.unsqueeze(2)).squeeze(2)
        scores = scores.masked_fill(~mask, float("-inf"))
        weights = F.softmax(scores, dim=-1)
        context = torch.bmm(weights.unsqueeze(1), memory).squeeze(1)
        return context, weights


class SequenceEncoder(nn.Module):
    def __init__(self, embedding: nn.Embedding, features: int, config: ModelConfig):
        super().__init__()
        self.embedding = embedding
        self.features = features
        self.input_projection = nn.Linear(config.embedding_dim + features, config.embedding_dim) if features else None
        self.rnn = nn.GRU(
            config.embedding_dim,
            config.encoder_hidden,
            num_layers=config.encoder_layers,
            bidirectional=config.bidirectional,
            batch_first=True,
            dropout=config.dropout if config.encoder_layers > 1 else 0.0,
        )
        self.dropout = nn.Dropout(config.dropout)
        self.directions = 2 if config.bidirectional else 1

    def forward(self, source: SourceTensors) -> Tuple[torch.Tensor, torch.Tensor]:
        """Returns per-token states (B, L, dirs*H) and the top layer's final state (B, dirs*H)"""
        embedded = self.embedding(source.ids)
        if self.input_projection is not None:
            embedded = self.input_projection(torch.cat([embedded, source.features], dim=-1))
        embedded = self.dropout(embedded)

        packed = pack_padded_sequence(embedded, source.lengths.cpu(), batch_first=True, enforce_sorted=False)
        outputs, hidden = self.rnn(packed)
        outputs, _ = pad_packed_sequence(outputs, batch_first=True, total_length=source.ids.size(1))
        final = torch.cat([hidden[-d] for d in range(self.directions, 0, -1)], dim=-1)
        return outputs, final


@dataclass
class EncodedSources:
    memories: List[torch.Tensor]
    masks: List[torch.Tensor]
    ext_ids: List[torch.Tensor]
    finals: torch.Tensor

    def expand(self, n: int) -> "EncodedSources":
        """Repeat a single-example encoding n times (beam search)"""
        return EncodedSources(
            memories=[m.expand(n, -1, -1) for m in self.memories],
            masks=[m.expand(n, -1) for m in self.masks],
            ext_ids=[e.expand(n, -1) for e in self.ext_ids],
            finals=self.finals.expand(n, -1),
        )


@dataclass
class DecoderState:
    hidden: torch.Tensor
    attn_vec: torch.Tensor

    def select(self, index: torch.Tensor) -> "DecoderState":
        return DecoderState(self.hidden.index_select(0, index), self.attn_vec.index_select(0, index))


class CommentUpdateModel(nn.Module):
    def __init__(self, config: ModelConfig, code_vocab_size: int, comment_vocab_size: int):
        super().__init__()
        self.config = config
        self.roles = config.source_roles()
        if not self.roles:
            raise ConfigurationError("Model needs at least one encoder")
        if code_vocab_size <= len(SPECIALS) or comment_vocab_size <= len(SPECIALS):
            raise ConfigurationError("Vocabularies must contain more than the special tokens")

        dirs = 2 if config.bidirectional else 1
        memory_dim = config.encoder_hidden * dirs
        n_sources = len(self.roles)
        unified_dim = n_sources * memory_dim
        hidden = config.decoder_hidden

        self.comment_vocab_size = comment_vocab_size
        self.code_embedding = nn.Embedding(code_vocab_size, config.embedding_dim, padding_idx=PAD_ID)
        self.comment_embedding = nn.Embedding(comment_vocab_size, config.embedding_dim, padding_idx=PAD_ID)
        self.encoders = nn.ModuleDict({
            role.value: SequenceEncoder(
                self.comment_embedding if role == SourceRole.COMMENT else self.code_embedding,
                feature_width(config, role),
                config,
            )
            for role in self.roles
        })
        self.bridge = nn.Linear(unified_dim, hidden)
        self.attentions = nn.ModuleDict({role.value: GeneralAttention(hidden, memory_dim) for role in self.roles})

        decoder_input = config.embedding_dim + hidden + (DECODER_FEATURE_WIDTH if config.decoder_features else 0)
        self.cell = nn.GRUCell(decoder_input, hidden)
        self.attn_combine = nn.Linear(hidden + unified_dim, hidden)
        self.generator = nn.Linear(hidden, comment_vocab_size)
        self.copy_gate = nn.Linear(hidden + unified_dim + config.embedding_dim, 1 + n_sources)
        self.dropout = nn.Dropout(config.dropout)

    # -- encoding ----------------------------------------------------------

    def encode(self, batch: Batch) -> EncodedSources:
        memories, masks, ext_ids, finals = [], [], [], []
        for source in batch.sources:
            outputs, final = self.encoders[source.role.value](source)
            memories.append(outputs)
            masks.append(source.mask)
            ext_ids.append(source.ext_ids)
            finals.append(final)
        return EncodedSources(memories, masks, ext_ids, torch.cat(finals, dim=-1))

    def initial_state(self, encoded: EncodedSources) -> DecoderState:
        hidden = torch.tanh(self.bridge(encoded.finals))
        return DecoderState(hidden=hidden, attn_vec=torch.zeros_like(hidden))

    # -- decoding ----------------------------------------------------------

    def decode_step(
        self,
        previous: torch.Tensor,
        state: DecoderState,
        encoded: EncodedSources,
        extended_size: int,
        decoder_features: Optional[torch.Tensor] = None,
    ) -> Tuple[torch.Tensor, DecoderState]:
        """One step; returns probabilities over the extended vocabulary (B, extended_size)"""
        previous = previous.masked_fill(previous >= self.comment_vocab_size, UNK_ID)
        embedded = self.dropout(self.comment_embedding(previous))
        inputs = [embedded, state.attn_vec]
        if self.config.decoder_features:
            inputs.append(decoder_features)
        hidden = self.cell(torch.cat(inputs, dim=-1), state.hidden)

        contexts, weights = [], []
        for role, memory, mask in zip(self.roles, encoded.memories, encoded.masks):
            context, weight = self.attentions[role.value](hidden, memory, mask)
            contexts.append(context)
            weights.append(weight)
        unified = torch.cat(contexts, dim=-1)
        attn_vec = torch.tanh(self.attn_combine(torch.cat([hidden, unified], dim=-1)))
        features = self.dropout(attn_vec)

        generate = F.softmax(self.generator(features), dim=-1)
        gate = F.softmax(self.copy_gate(torch.cat([features, unified, embedded], dim=-1)), dim=-1)

        batch_size = generate.size(0)
        padding = generate.new_zeros(batch_size, extended_size - self.comment_vocab_size)
        probs = torch.cat([gate[:, :1] * generate, padding], dim=-1)
        for k, (weight, ext) in enumerate(zip(weights, encoded.ext_ids)):
            probs = probs.scatter_add(1, ext, gate[:, k + 1:k + 2] * weight)
        return probs, DecoderState(hidden=hidden, attn_vec=attn_vec)

    def token_log_probs(self, batch: Batch) -> torch.Tensor:
        """Teacher-forced log p(target_t) for every target step (B, T); padding steps are 0"""
        encoded = self.encode(batch)
        state = self.initial_state(encoded)
        steps = batch.target_in.size(1)
        out = []
        for t in range(steps):
            features = batch.decoder_features[:, t] if batch.decoder_features is not None else None
            probs, state = self.decode_step(batch.target_in[:, t], state, encoded, batch.extended_size, features)
            gold = probs.gather(1, batch.target_out[:, t:t + 1]).squeeze(1)
            out.append(torch.log(gold.clamp_min(LOG_FLOOR)))
        log_probs = torch.stack(out, dim=1)
        return log_probs.masked_fill(~batch.target_mask, 0.0)

    def forward(self, batch: Batch) -> torch.Tensor:
        """Mean negative log-likelihood per target token"""
        log_probs = self.token_log_probs(batch)
        return -log_probs.sum() / batch.target_mask.sum()
