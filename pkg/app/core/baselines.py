"""Rule-based baselines: copy, return type substitution, and return type substitution with null handling."""
import logging
from typing import List, Set

from app.core.exceptions import NoSignature
from app.core.tokenizer import extract_if_statements, extract_return_statements, extract_return_type
from app.schemas.corpus import Example
from app.schemas.tokens import SequenceSource, Token, TokenKind, TokenSeq

logger = logging.getLogger(__name__)

NULL_SUFFIX = ["or", "null", "if", "null"]


def copy_baseline(example: Example) -> TokenSeq:
    return example.c_old


def _return_type(method: TokenSeq) -> List[str]:
    try:
        return extract_return_type(method)
    except NoSignature:
        return []


def _replace_all(texts: List[str], old: List[str], new: List[str]) -> List[str]:
    out: List[str] = []
    i, width = 0, len(old)
    while i < len(texts):
        if texts[i:i + width] == old:
            out.extend(new)
            i += width
        else:
            out.append(texts[i])
            i += 1
    return out


def _words(texts: List[str]) -> TokenSeq:
    return TokenSeq(
        tokens=[Token(text=t, kind=TokenKind.WORD if any(c.isalnum() for c in t) else TokenKind.PUNCTUATION) for t in texts],
        source=SequenceSource.COMMENT,
    )


def return_type_subst(example: Example) -> TokenSeq:
    old_type = _return_type(example.m_old)
    new_type = _return_type(example.m_new)
    if not old_type or not new_type or old_type == new_type:
        return example.c_old

    texts = example.c_old.texts()
    if not any(texts[i:i + len(old_type)] == old_type for i in range(len(texts))):
        return example.c_old
    return _words(_replace_all(texts, old_type, new_type))


def _null_sites(method: TokenSeq) -> Set[str]:
    statements = extract_return_statements(method) + extract_if_statements(method)
    return {t for s in statements for t in s.texts() if t == "null"}


def return_type_subst_null(example: Example) -> TokenSeq:
    base = return_type_subst(example)
    if not _null_sites(example.m_new) or _null_sites(example.m_old):
        return base

    texts = base.texts()
    if texts and texts[-1] == ".":
        texts = texts[:-1] + NULL_SUFFIX + ["."]
    else:
        texts = texts + NULL_SUFFIX
    return _words(texts)


BASELINES = {
    "copy": copy_baseline,
    "rts": return_type_subst,
    "rts-null": return_type_subst_null,
}
