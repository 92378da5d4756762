from enum import Enum
from typing import List, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator


class TokenKind(str, Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    OPERATOR = "operator"
    LITERAL = "literal"
    PUNCTUATION = "punctuation"
    WORD = "word"


class SequenceSource(str, Enum):
    METHOD = "method"
    COMMENT = "comment"


class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    kind: TokenKind
    parent_index: Optional[int] = None
    parent_text: Optional[str] = None

    @field_validator("text")
    @classmethod
    def validate_text(cls, v: str) -> str:
        if not v or any(ch.isspace() for ch in v):
            raise ValueError("token text must be non-empty and contain no whitespace")
        return v

    @property
    def is_subtoken(self) -> bool:
        return self.parent_index is not None


class TokenSeq(BaseModel):
    model_config = ConfigDict(frozen=True)

    tokens: List[Token] = Field(default_factory=list)
    source: SequenceSource

    def texts(self) -> List[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def joined(self) -> str:
        """Single-space rendering used in reports and CLI output"""
        return " ".join(self.texts())

    @classmethod
    def from_texts(cls, texts: Sequence[str], source: SequenceSource = SequenceSource.COMMENT) -> "TokenSeq":
        """Wrap bare strings, e.g. a parsed edit result or a test fixture"""
        kind = TokenKind.WORD if source == SequenceSource.COMMENT else TokenKind.IDENTIFIER
        tokens = []
        for text in texts:
            token_kind = kind
            if not any(ch.isalnum() for ch in text):
                token_kind = TokenKind.PUNCTUATION
            tokens.append(Token(text=text, kind=token_kind))
        return cls(tokens=tokens, source=source)
