import logging
from collections import Counter
from typing import Dict, Iterable, List, Sequence

from app.core.editlex import EDIT_KEYWORDS
from app.core.exceptions import VocabularyMissing

logger = logging.getLogger(__name__)

PAD = "<pad>"
SOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIALS = (PAD, SOS, EOS, UNK)


class Vocabulary:
    """Token <-> id map; specials first, then edit keywords, then corpus tokens by frequency"""

    def __init__(self, tokens: Sequence[str]):
        self._itos: List[str] = []
        self._stoi: Dict[str, int] = {}
        for token in list(SPECIALS) + list(EDIT_KEYWORDS) + list(tokens):
            if token not in self._stoi:
                self._stoi[token] = len(self._itos)
                self._itos.append(token)

    @classmethod
    def build(cls, sequences: Iterable[Sequence[str]], min_count: int = 2) -> "Vocabulary":
        counts: Counter = Counter()
        for seq in sequences:
            counts.update(seq)
        kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
        vocab = cls(kept)
        logger.info(f"Built vocabulary of {len(vocab)} entries from {len(counts)} distinct tokens (min count {min_count})")
        return vocab

    @classmethod
    def from_list(cls, itos: Sequence[str]) -> "Vocabulary":
        if list(itos[:len(SPECIALS)]) != list(SPECIALS):
            raise VocabularyMissing("Stored vocabulary does not start with the special tokens")
        return cls(itos)

    def to_list(self) -> List[str]:
        return list(self._itos)

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, token: str) -> bool:
        return token in self._stoi

    def id(self, token: str) -> int:
        return self._stoi.get(token, self.unk_id)

    def token(self, index: int) -> str:
        return self._itos[index]

    def encode(self, tokens: Sequence[str]) -> List[int]:
        return [self.id(t) for t in tokens]

    @property
    def pad_id(self) -> int:
        return self._stoi[PAD]

    @property
    def sos_id(self) -> int:
        return self._stoi[SOS]

    @property
    def eos_id(self) -> int:
        return self._stoi[EOS]

    @property
    def unk_id(self) -> int:
        return self._stoi[UNK]
