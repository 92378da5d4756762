"""Turning Examples into padded tensors for the encoder-decoder."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch

from app.core import editlex
from app.core.exceptions import ConfigurationError
from app.core.features import FEATURE_WIDTH, featurize_code, featurize_comment, to_onehot
from app.core.vocab import SOS, Vocabulary
from app.schemas.corpus import Example
from app.schemas.model import ModelConfig, OutputRepr, SourceRole

DECODER_FEATURE_WIDTH = 3


@dataclass
class PreparedSource:
    tokens: List[str]
    features: Optional[np.ndarray] = None


@dataclass
class PreparedExample:
    id: str
    sources: Dict[SourceRole, PreparedSource]
    target: List[str]
    oov: List[str]
    c_old: List[str]


@dataclass
class SourceTensors:
    role: SourceRole
    ids: torch.Tensor
    ext_ids: torch.Tensor
    mask: torch.Tensor
    lengths: torch.Tensor
    features: Optional[torch.Tensor] = None


@dataclass
class Batch:
    ids: List[str]
    sources: List[SourceTensors]
    oov: List[List[str]]
    extended_size: int
    prepared: List[PreparedExample] = field(default_factory=list)
    target_in: Optional[torch.Tensor] = None
    target_out: Optional[torch.Tensor] = None
    target_mask: Optional[torch.Tensor] = None
    decoder_features: Optional[torch.Tensor] = None

    def __len__(self) -> int:
        return len(self.ids)


def feature_width(config: ModelConfig, role: SourceRole) -> int:
    if config.use_features and role in (SourceRole.COMMENT, SourceRole.M_EDIT):
        return FEATURE_WIDTH
    return 0


def target_tokens(example: Example, config: ModelConfig) -> List[str]:
    if config.output_repr == OutputRepr.C_EDIT:
        return editlex.serialize(example.c_edit) if example.c_edit is not None else []
    return example.c_new.texts()


def decoder_feature_row(token: str, comment_tokens: set, code_tokens: set) -> List[float]:
    return [
        1.0 if editlex.is_edit_keyword(token) else 0.0,
        1.0 if token in comment_tokens else 0.0,
        1.0 if token in code_tokens else 0.0,
    ]


class BatchBuilder:
    def __init__(self, config: ModelConfig, code_vocab: Vocabulary, comment_vocab: Vocabulary):
        self.config = config
        self.code_vocab = code_vocab
        self.comment_vocab = comment_vocab
        self.roles = config.source_roles()

    def vocab_for(self, role: SourceRole) -> Vocabulary:
        return self.comment_vocab if role == SourceRole.COMMENT else self.code_vocab

    def prepare(self, example: Example) -> PreparedExample:
        sources: Dict[SourceRole, PreparedSource] = {}
        for role in self.roles:
            width = feature_width(self.config, role)
            if role == SourceRole.COMMENT:
                tokens = example.c_old.texts()
                features = None
                if width:
                    features = to_onehot(featurize_comment(example.c_old, example.m_edit, example.m_old, example.m_new))
            elif role == SourceRole.M_EDIT:
                tokens = editlex.serialize(example.m_edit)
                features = None
                if width:
                    features = to_onehot(featurize_code(example.m_edit, example.c_old, example.m_old, example.m_new))
            elif role == SourceRole.M_OLD:
                tokens, features = example.m_old.texts(), None
            else:
                tokens, features = example.m_new.texts(), None
            sources[role] = PreparedSource(tokens=tokens, features=features)

        return self.prepare_sources(example.id, sources, target_tokens(example, self.config), example.c_old.texts())

    def prepare_sources(
        self, example_id: str, sources: Dict[SourceRole, PreparedSource], target: List[str], c_old: List[str]
    ) -> PreparedExample:
        missing = [role.value for role in self.roles if role not in sources]
        if missing:
            raise ConfigurationError(f"Missing source sequences for encoders: {', '.join(missing)}")
        oov: List[str] = []
        for source in sources.values():
            for token in source.tokens:
                if token not in self.comment_vocab and token not in oov:
                    oov.append(token)
        return PreparedExample(id=example_id, sources=sources, target=list(target), oov=oov, c_old=list(c_old))

    def prepare_all(self, examples: Sequence[Example]) -> List[PreparedExample]:
        return [self.prepare(e) for e in examples]

    def _ext_id(self, token: str, oov: List[str]) -> int:
        if token in self.comment_vocab:
            return self.comment_vocab.id(token)
        if token in oov:
            return len(self.comment_vocab) + oov.index(token)
        return self.comment_vocab.unk_id

    def collate(
        self, items: Sequence[PreparedExample], with_target: bool = True, dtype: torch.dtype = torch.float32
    ) -> Batch:
        sources: List[SourceTensors] = []
        for role in self.roles:
            vocab = self.vocab_for(role)
            width = feature_width(self.config, role)
            lengths = [max(len(item.sources[role].tokens), 1) for item in items]
            max_len = max(lengths)
            ids = torch.full((len(items), max_len), vocab.pad_id, dtype=torch.long)
            ext = torch.full((len(items), max_len), self.comment_vocab.pad_id, dtype=torch.long)
            mask = torch.zeros((len(items), max_len), dtype=torch.bool)
            feats = torch.zeros((len(items), max_len, width), dtype=dtype) if width else None
            for b, item in enumerate(items):
                source = item.sources[role]
                n = len(source.tokens)
                if n:
                    ids[b, :n] = torch.tensor(vocab.encode(source.tokens), dtype=torch.long)
                    ext[b, :n] = torch.tensor([self._ext_id(t, item.oov) for t in source.tokens], dtype=torch.long)
                    if feats is not None and source.features is not None:
                        feats[b, :n] = torch.from_numpy(source.features).to(dtype)
                mask[b, :max(n, 1)] = True
            sources.append(SourceTensors(
                role=role, ids=ids, ext_ids=ext, mask=mask,
                lengths=torch.tensor(lengths, dtype=torch.long), features=feats,
            ))

        batch = Batch(
            ids=[item.id for item in items],
            sources=sources,
            oov=[item.oov for item in items],
            extended_size=len(self.comment_vocab) + max((len(item.oov) for item in items), default=0),
            prepared=list(items),
        )
        if with_target:
            self._add_target(batch, items, dtype)
        return batch

    def _add_target(self, batch: Batch, items: Sequence[PreparedExample], dtype: torch.dtype) -> None:
        vocab = self.comment_vocab
        steps = max(len(item.target) for item in items) + 1
        target_in = torch.full((len(items), steps), vocab.pad_id, dtype=torch.long)
        target_out = torch.full((len(items), steps), vocab.pad_id, dtype=torch.long)
        target_mask = torch.zeros((len(items), steps), dtype=torch.bool)
        dec_feats = torch.zeros((len(items), steps, DECODER_FEATURE_WIDTH), dtype=dtype)

        for b, item in enumerate(items):
            inputs = [vocab.sos_id] + [vocab.id(t) for t in item.target]
            outputs = [self._ext_id(t, item.oov) for t in item.target] + [vocab.eos_id]
            n = len(outputs)
            target_in[b, :n] = torch.tensor(inputs, dtype=torch.long)
            target_out[b, :n] = torch.tensor(outputs, dtype=torch.long)
            target_mask[b, :n] = True
            if self.config.decoder_features:
                comment_set, code_set = self.source_sets(item)
                previous = [SOS] + item.target
                for t, token in enumerate(previous):
                    dec_feats[b, t] = torch.tensor(decoder_feature_row(token, comment_set, code_set), dtype=dtype)

        batch.target_in = target_in
        batch.target_out = target_out
        batch.target_mask = target_mask
        batch.decoder_features = dec_feats if self.config.decoder_features else None

    @staticmethod
    def source_sets(item: PreparedExample):
        comment_set = set(item.sources[SourceRole.COMMENT].tokens) if SourceRole.COMMENT in item.sources else set()
        code_set = {t for role, s in item.sources.items() if role != SourceRole.COMMENT for t in s.tokens}
        return comment_set, code_set

    def token_text(self, index: int, oov: List[str]) -> str:
        if index < len(self.comment_vocab):
            return self.comment_vocab.token(index)
        return oov[index - len(self.comment_vocab)]
