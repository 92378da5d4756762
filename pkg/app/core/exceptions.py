from typing import Optional


class CommentEditError(Exception):
    """Base error for the library; carries a machine-readable code and a detail message"""

    code: str = "CommentEditError"

    def __init__(self, detail: str, code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        return self.detail


# Lexing / tokenization
class UnbalancedDelimiters(CommentEditError):
    code = "UnbalancedDelimiters"


class EmptyComment(CommentEditError):
    code = "EmptyComment"


class NoSignature(CommentEditError):
    code = "NoSignature"


# Edit lexicon
class NoDistinctChange(CommentEditError):
    code = "NoDistinctChange"


class MalformedEditSequence(CommentEditError):
    code = "MalformedEditSequence"


class AnchorNotFound(CommentEditError):
    code = "AnchorNotFound"


class AmbiguousAnchor(UserWarning):
    """Raised as a warning only: the first occurrence at or after P_old is used"""


# Corpus
class EmptyCorpus(CommentEditError):
    code = "EmptyCorpus"


class InsufficientProjects(CommentEditError):
    code = "InsufficientProjects"


class MiningError(CommentEditError):
    code = "MiningError"


# Model
class VocabularyMissing(CommentEditError):
    code = "VocabularyMissing"


class ConfigurationError(CommentEditError):
    code = "ConfigurationError"


class CheckpointError(CommentEditError):
    code = "CheckpointError"
