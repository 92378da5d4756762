"""Per-token categorical features for M_edit and C_old, and their one-hot layout."""
import logging
from collections import Counter
from typing import Callable, Iterable, List, Optional, Sequence, Set

import numpy as np

from app.core import editlex
from app.core.exceptions import NoSignature
from app.core.tokenizer import JAVA_KEYWORDS, OPERATORS, extract_return_statements, extract_return_type
from app.schemas.edits import EditFlavor, EditKind, EditSequence
from app.schemas.features import (
    SUBTOKEN_INDEX_CAP,
    FeatureMatrix,
    FeatureRow,
    FeatureSide,
    PosTag,
    SpanMembership,
    VersionMatch,
)
from app.schemas.tokens import Token, TokenSeq

logger = logging.getLogger(__name__)

Tagger = Callable[[Sequence[str]], List[PosTag]]

STOP_WORDS = frozenset({
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing",
    "down", "during", "each", "either", "else", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself",
    "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "otherwise", "our", "ours",
    "ourselves", "out", "over", "own", "same", "she", "should", "so", "some",
    "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours",
    "yourself", "yourselves",
})

_DETERMINERS = frozenset({"a", "an", "the", "this", "that", "these", "those", "each", "every", "any", "some", "no", "all", "both", "either", "neither"})
_PREPOSITIONS = frozenset({
    "about", "above", "across", "after", "against", "along", "among", "around", "as", "at",
    "before", "behind", "below", "beneath", "beside", "between", "beyond", "by", "during",
    "except", "for", "from", "in", "inside", "into", "like", "near", "of", "off", "on",
    "onto", "out", "outside", "over", "per", "since", "through", "to", "toward", "towards",
    "under", "until", "up", "upon", "via", "with", "within", "without",
})
_PRONOUNS = frozenset({
    "i", "me", "my", "we", "us", "our", "you", "your", "he", "him", "his", "she", "her",
    "it", "its", "they", "them", "their", "itself", "themselves", "who", "whom", "whose",
    "which", "what",
})
_ADVERBS = frozenset({"not", "never", "always", "also", "only", "just", "otherwise", "then", "there", "here", "else", "already", "currently", "now", "very", "too"})
_VERBS = frozenset({
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do",
    "does", "did", "can", "could", "will", "would", "should", "may", "might", "must",
    "shall", "return", "returns", "returned", "get", "gets", "set", "sets", "create",
    "creates", "contains", "exists", "found", "find", "finds", "make", "makes",
})
_CONJUNCTIONS = frozenset({"and", "or", "but", "nor", "if", "when", "while", "because", "unless", "whether", "than"})
_NUMBER_WORDS = frozenset({"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"})
_ADJ_SUFFIXES = ("able", "ible", "ful", "ous", "ive", "ic", "al", "less", "ary")
_VERB_SUFFIXES = ("ize", "ise", "ify", "ate")


def lexicon_tagger(tokens: Sequence[str]) -> List[PosTag]:
    """Deterministic coarse tagger: closed-class lexicons, then suffix rules, NOUN by default"""
    tags: List[PosTag] = []
    for raw in tokens:
        word = raw.lower()
        if not any(ch.isalnum() for ch in word):
            tags.append(PosTag.PUNCT)
        elif word.replace(".", "", 1).isdigit() or word in _NUMBER_WORDS:
            tags.append(PosTag.NUM)
        elif word in _DETERMINERS:
            tags.append(PosTag.DET)
        elif word in _PRONOUNS:
            tags.append(PosTag.PRON)
        elif word in _PREPOSITIONS:
            tags.append(PosTag.PREP)
        elif word in _CONJUNCTIONS:
            tags.append(PosTag.OTHER)
        elif word in _VERBS:
            tags.append(PosTag.VERB)
        elif word in _ADVERBS or (word.endswith("ly") and len(word) > 4):
            tags.append(PosTag.ADV)
        elif word.endswith(_ADJ_SUFFIXES) and len(word) > 4:
            tags.append(PosTag.ADJ)
        elif word.endswith(_VERB_SUFFIXES) and len(word) > 5:
            tags.append(PosTag.VERB)
        else:
            tags.append(PosTag.NOUN)
    return tags


def _clamp(index: Optional[int]) -> Optional[int]:
    if index is None:
        return None
    return min(index, SUBTOKEN_INDEX_CAP)


def _span_membership_plan(edits: EditSequence) -> List[SpanMembership]:
    """Membership of every serialized token, aligned with editlex.serialize"""
    plan: List[SpanMembership] = []
    for action in edits.actions:
        layout = editlex.LAYOUTS[action.kind]
        plan.append(SpanMembership.NONE)
        if action.kind == EditKind.KEEP:
            plan.extend([SpanMembership.KEEP] * len(action.old_span))
        elif action.kind == EditKind.INSERT:
            plan.extend([SpanMembership.INSERT] * len(action.new_span))
        elif action.kind == EditKind.DELETE:
            plan.extend([SpanMembership.DELETE] * len(action.old_span))
        else:
            plan.extend([SpanMembership.REPLACE_OLD] * len(action.old_span))
            if layout.middle is not None:
                plan.append(SpanMembership.NONE)
            plan.extend([SpanMembership.REPLACE_NEW] * len(action.new_span))
        plan.append(SpanMembership.NONE)
    return plan


def _source_tokens(edits: EditSequence, m_old: Optional[TokenSeq], m_new: Optional[TokenSeq]) -> List[Optional[Token]]:
    """Recover the original Token behind every serialized M_edit token (None for keywords or when unknown)"""
    old_tokens = list(m_old.tokens) if m_old is not None else []
    new_tokens = list(m_new.tokens) if m_new is not None else []
    p_old = p_new = 0
    out: List[Optional[Token]] = []

    def take(pool: List[Token], start: int, count: int) -> List[Optional[Token]]:
        chunk: List[Optional[Token]] = list(pool[start:start + count])
        return chunk + [None] * (count - len(chunk))

    for action in edits.actions:
        out.append(None)
        if action.kind == EditKind.KEEP:
            n = len(action.old_span)
            out.extend(take(old_tokens, p_old, n))
            p_old += n
            p_new += n
        elif action.kind == EditKind.INSERT:
            n = len(action.new_span)
            out.extend(take(new_tokens, p_new, n))
            p_new += n
        elif action.kind == EditKind.DELETE:
            n = len(action.old_span)
            out.extend(take(old_tokens, p_old, n))
            p_old += n
        else:
            n_old, n_new = len(action.old_span), len(action.new_span)
            out.extend(take(old_tokens, p_old, n_old))
            out.append(None)
            out.extend(take(new_tokens, p_new, n_new))
            p_old += n_old
            p_new += n_new
        out.append(None)
    return out


def featurize_code(
    m_edit: EditSequence,
    c_old: TokenSeq,
    m_old: Optional[TokenSeq] = None,
    m_new: Optional[TokenSeq] = None,
) -> FeatureMatrix:
    if m_edit.flavor != EditFlavor.CODE:
        logger.warning("featurize_code called with a comment-flavored edit sequence")

    serialized = editlex.serialize(m_edit)
    membership = _span_membership_plan(m_edit)
    sources = _source_tokens(m_edit, m_old, m_new)
    comment_words = {text.lower() for text in c_old.texts()}

    rows: List[FeatureRow] = []
    for text, span, origin in zip(serialized, membership, sources):
        keyword = editlex.is_edit_keyword(text)
        rows.append(FeatureRow(
            token=text,
            is_edit_keyword=keyword,
            is_java_keyword=not keyword and text in JAVA_KEYWORDS,
            is_operator=not keyword and text in OPERATORS,
            span_membership=span,
            matches_comment_token=not keyword and text.lower() in comment_words,
            is_subtoken=origin is not None and origin.is_subtoken,
            subtoken_index=_clamp(origin.parent_index) if origin is not None else None,
        ))
    return FeatureMatrix(side=FeatureSide.CODE, rows=rows)


def _words(spans: Iterable[Sequence[str]]) -> Set[str]:
    return {text.lower() for span in spans for text in span}


def _version_match(word: str, old: Set[str], new: Set[str]) -> VersionMatch:
    in_old, in_new = word in old, word in new
    if in_old and in_new:
        return VersionMatch.BOTH
    if in_old:
        return VersionMatch.UNIQUE_OLD
    if in_new:
        return VersionMatch.UNIQUE_NEW
    return VersionMatch.NONE


def _return_type_words(method: TokenSeq) -> Set[str]:
    try:
        return {t.lower() for t in extract_return_type(method)}
    except NoSignature:
        return set()


def featurize_comment(
    c_old: TokenSeq,
    m_edit: EditSequence,
    m_old: TokenSeq,
    m_new: TokenSeq,
    tagger: Tagger = lexicon_tagger,
) -> FeatureMatrix:
    inserted = _words(a.new_span for a in m_edit.actions if a.kind == EditKind.INSERT)
    deleted = _words(a.old_span for a in m_edit.actions if a.kind == EditKind.DELETE)
    replaced = _words(
        list(a.old_span) + list(a.new_span)
        for a in m_edit.actions
        if a.kind not in (EditKind.KEEP, EditKind.INSERT, EditKind.DELETE)
    )
    stmt_old = _words(s.texts() for s in extract_return_statements(m_old))
    stmt_new = _words(s.texts() for s in extract_return_statements(m_new))
    type_old = _return_type_words(m_old)
    type_new = _return_type_words(m_new)

    texts = c_old.texts()
    counts = Counter(text.lower() for text in texts)
    tags = tagger(texts)

    rows: List[FeatureRow] = []
    for token, tag in zip(c_old.tokens, tags):
        word = token.text.lower()
        rows.append(FeatureRow(
            token=token.text,
            matches_inserted_code=word in inserted,
            matches_deleted_code=word in deleted,
            matches_replaced_code=word in replaced,
            appears_multiple=counts[word] > 1,
            is_stop_word=word in STOP_WORDS,
            pos_tag=tag,
            return_stmt_match=_version_match(word, stmt_old, stmt_new),
            return_type_match=_version_match(word, type_old, type_new),
            is_subtoken=token.is_subtoken,
            subtoken_index=_clamp(token.parent_index),
        ))
    return FeatureMatrix(side=FeatureSide.COMMENT, rows=rows)


# ---------------------------------------------------------------------------
# One-hot layout
# ---------------------------------------------------------------------------

BOOLEAN_FIELDS = (
    "is_edit_keyword", "is_java_keyword", "is_operator", "matches_comment_token",
    "matches_inserted_code", "matches_deleted_code", "matches_replaced_code",
    "appears_multiple", "is_stop_word", "is_subtoken",
)
ENUM_FIELDS = (
    ("span_membership", SpanMembership),
    ("pos_tag", PosTag),
    ("return_stmt_match", VersionMatch),
    ("return_type_match", VersionMatch),
)
SUBTOKEN_COLUMNS = SUBTOKEN_INDEX_CAP + 2  # 0..CAP plus "none"


def feature_columns() -> List[str]:
    columns = list(BOOLEAN_FIELDS)
    for name, enum_type in ENUM_FIELDS:
        columns.extend(f"{name}={member.value}" for member in enum_type)
    columns.extend(f"subtoken_index={i}" for i in range(SUBTOKEN_INDEX_CAP + 1))
    columns.append("subtoken_index=none")
    return columns


FEATURE_WIDTH = len(feature_columns())


def to_onehot(matrix: FeatureMatrix) -> np.ndarray:
    """Dense (rows, FEATURE_WIDTH) float32 matrix; code and comment rows share the layout"""
    out = np.zeros((len(matrix.rows), FEATURE_WIDTH), dtype=np.float32)
    for r, row in enumerate(matrix.rows):
        col = 0
        for name in BOOLEAN_FIELDS:
            if getattr(row, name):
                out[r, col] = 1.0
            col += 1
        for name, enum_type in ENUM_FIELDS:
            members = list(enum_type)
            out[r, col + members.index(getattr(row, name))] = 1.0
            col += len(members)
        index = row.subtoken_index
        out[r, col + (SUBTOKEN_INDEX_CAP + 1 if index is None else index)] = 1.0
    return out


def to_tsv(matrix: FeatureMatrix) -> str:
    fields = ["token"] + [f for f in FeatureRow.model_fields if f != "token"]
    lines = ["\t".join(fields)]
    for row in matrix.rows:
        values = []
        for name in fields:
            value = getattr(row, name)
            if isinstance(value, bool):
                values.append("1" if value else "0")
            elif value is None:
                values.append("none")
            elif hasattr(value, "value"):
                values.append(value.value)
            else:
                values.append(str(value))
        lines.append("\t".join(values))
    return "\n".join(lines) + "\n"
