"""Edit lexicon: code edit sequences (M_edit), condensed anchored comment edit
sequences (C_edit), the flat keyword serialization, and the two-pointer parser
that applies a comment edit sequence onto the old comment.
"""
import logging
import warnings
from collections import Counter
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from app.core.diffcore import OpTag, match_sequences
from app.core.exceptions import AmbiguousAnchor, AnchorNotFound, MalformedEditSequence, NoDistinctChange
from app.schemas.edits import ApplyReport, EditAction, EditFlavor, EditKind, EditSequence, ParseReport
from app.schemas.tokens import SequenceSource, Token, TokenKind, TokenSeq

logger = logging.getLogger(__name__)

INSERT = "<Insert>"
INSERT_END = "<InsertEnd>"
DELETE = "<Delete>"
DELETE_END = "<DeleteEnd>"
REPLACE_OLD = "<ReplaceOld>"
REPLACE_NEW = "<ReplaceNew>"
REPLACE_END = "<ReplaceEnd>"
KEEP = "<Keep>"
KEEP_END = "<KeepEnd>"
REPLACE_OLD_KEEP_BEFORE = "<ReplaceOldKeepBefore>"
REPLACE_NEW_KEEP_BEFORE = "<ReplaceNewKeepBefore>"
REPLACE_OLD_KEEP_AFTER = "<ReplaceOldKeepAfter>"
REPLACE_NEW_KEEP_AFTER = "<ReplaceNewKeepAfter>"
INSERT_OLD_KEEP_BEFORE = "<InsertOldKeepBefore>"
INSERT_NEW_KEEP_BEFORE = "<InsertNewKeepBefore>"
INSERT_OLD_KEEP_AFTER = "<InsertOldKeepAfter>"
INSERT_NEW_KEEP_AFTER = "<InsertNewKeepAfter>"
DELETE_OLD_KEEP_BEFORE = "<DeleteOldKeepBefore>"
DELETE_NEW_KEEP_BEFORE = "<DeleteNewKeepBefore>"
DELETE_OLD_KEEP_AFTER = "<DeleteOldKeepAfter>"
DELETE_NEW_KEEP_AFTER = "<DeleteNewKeepAfter>"

EDIT_KEYWORDS: Tuple[str, ...] = (
    INSERT, INSERT_END, DELETE, DELETE_END, REPLACE_OLD, REPLACE_NEW, REPLACE_END,
    KEEP, KEEP_END, REPLACE_OLD_KEEP_BEFORE, REPLACE_NEW_KEEP_BEFORE,
    REPLACE_OLD_KEEP_AFTER, REPLACE_NEW_KEEP_AFTER, INSERT_OLD_KEEP_BEFORE,
    INSERT_NEW_KEEP_BEFORE, INSERT_OLD_KEEP_AFTER, INSERT_NEW_KEEP_AFTER,
    DELETE_OLD_KEEP_BEFORE, DELETE_NEW_KEEP_BEFORE, DELETE_OLD_KEEP_AFTER,
    DELETE_NEW_KEEP_AFTER,
)
_KEYWORD_SET = frozenset(EDIT_KEYWORDS)


class _Layout(NamedTuple):
    opener: str
    middle: Optional[str]
    end: str


# (opener, middle, end); one-part layouts carry old_span except Insert, which carries new_span
LAYOUTS: Dict[EditKind, _Layout] = {
    EditKind.KEEP: _Layout(KEEP, None, KEEP_END),
    EditKind.INSERT: _Layout(INSERT, None, INSERT_END),
    EditKind.DELETE: _Layout(DELETE, None, DELETE_END),
    EditKind.REPLACE: _Layout(REPLACE_OLD, REPLACE_NEW, REPLACE_END),
    EditKind.REPLACE_KEEP_BEFORE: _Layout(REPLACE_OLD_KEEP_BEFORE, REPLACE_NEW_KEEP_BEFORE, REPLACE_END),
    EditKind.REPLACE_KEEP_AFTER: _Layout(REPLACE_OLD_KEEP_AFTER, REPLACE_NEW_KEEP_AFTER, REPLACE_END),
    EditKind.INSERT_KEEP_BEFORE: _Layout(INSERT_OLD_KEEP_BEFORE, INSERT_NEW_KEEP_BEFORE, INSERT_END),
    EditKind.INSERT_KEEP_AFTER: _Layout(INSERT_OLD_KEEP_AFTER, INSERT_NEW_KEEP_AFTER, INSERT_END),
    EditKind.DELETE_KEEP_BEFORE: _Layout(DELETE_OLD_KEEP_BEFORE, DELETE_NEW_KEEP_BEFORE, DELETE_END),
    EditKind.DELETE_KEEP_AFTER: _Layout(DELETE_OLD_KEEP_AFTER, DELETE_NEW_KEEP_AFTER, DELETE_END),
}
_BY_OPENER: Dict[str, EditKind] = {layout.opener: kind for kind, layout in LAYOUTS.items()}

TokensLike = Union[TokenSeq, Sequence[str]]


def is_edit_keyword(token: str) -> bool:
    return token in _KEYWORD_SET


def _texts(seq: TokensLike) -> List[str]:
    return seq.texts() if isinstance(seq, TokenSeq) else list(seq)


# ---------------------------------------------------------------------------
# Code edits
# ---------------------------------------------------------------------------

def encode_code_edits(m_old: TokensLike, m_new: TokensLike) -> EditSequence:
    old, new = _texts(m_old), _texts(m_new)
    actions: List[EditAction] = []
    for op in match_sequences(old, new):
        old_span = old[op.old_start:op.old_end]
        new_span = new[op.new_start:op.new_end]
        if op.tag == OpTag.EQUAL:
            actions.append(EditAction(kind=EditKind.KEEP, old_span=old_span))
        elif op.tag == OpTag.INSERT:
            actions.append(EditAction(kind=EditKind.INSERT, new_span=new_span))
        elif op.tag == OpTag.DELETE:
            actions.append(EditAction(kind=EditKind.DELETE, old_span=old_span))
        else:
            actions.append(EditAction(kind=EditKind.REPLACE, old_span=old_span, new_span=new_span))
    return EditSequence(actions=actions, flavor=EditFlavor.CODE)


# ---------------------------------------------------------------------------
# Condensed comment edits
# ---------------------------------------------------------------------------

def _occurrences(tokens: Sequence[str], span: Sequence[str], start: int = 0) -> List[int]:
    if not span:
        return []
    width = len(span)
    first = span[0]
    return [
        i for i in range(start, len(tokens) - width + 1)
        if tokens[i] == first and list(tokens[i:i + width]) == list(span)
    ]


def _is_unique(tokens: Sequence[str], start: int, end: int) -> bool:
    if end <= start:
        return False
    return len(_occurrences(tokens, tokens[start:end])) == 1


def _find_anchor(
    old: Sequence[str], start: int, end: int, before_limit: int, after_limit: int
) -> Optional[Tuple[int, int]]:
    """Smallest (before, after) context making old[start-before:end+after] unique.

    Order: no context, then preceding tokens one at a time, then following
    tokens one at a time, then all following tokens plus preceding ones.
    """
    if _is_unique(old, start, end):
        return 0, 0
    for before in range(1, before_limit + 1):
        if _is_unique(old, start - before, end):
            return before, 0
    for after in range(1, after_limit + 1):
        if _is_unique(old, start, end + after):
            return 0, after
    if after_limit:
        for before in range(1, before_limit + 1):
            if _is_unique(old, start - before, end + after_limit):
                return before, after_limit
    return None


class _Placed(NamedTuple):
    old_start: int
    old_end: int
    new_start: int
    new_end: int
    action: EditAction


def _anchored_action(
    old: Sequence[str], new: Sequence[str], core: Tuple[int, int, int, int], before: int, after: int
) -> _Placed:
    os_, oe, ns, ne = core
    if os_ == oe:
        family = (EditKind.INSERT, EditKind.INSERT_KEEP_BEFORE, EditKind.INSERT_KEEP_AFTER)
    elif ns == ne:
        family = (EditKind.DELETE, EditKind.DELETE_KEEP_BEFORE, EditKind.DELETE_KEEP_AFTER)
    else:
        family = (EditKind.REPLACE, EditKind.REPLACE_KEEP_BEFORE, EditKind.REPLACE_KEEP_AFTER)

    if before:
        kind = family[1]
    elif after:
        kind = family[2]
    else:
        kind = family[0]

    old_span = list(old[os_ - before:oe + after])
    new_span = list(new[ns - before:ne + after])
    if kind == EditKind.DELETE:
        new_span = []
    return _Placed(os_ - before, oe + after, ns - before, ne + after,
                   EditAction(kind=kind, old_span=old_span, new_span=new_span))


def encode_comment_edits(c_old: TokensLike, c_new: TokensLike) -> EditSequence:
    old, new = _texts(c_old), _texts(c_new)
    if old == new:
        raise NoDistinctChange("Old and new comments are token-identical")

    changes = [op for op in match_sequences(old, new) if op.tag != OpTag.EQUAL]
    placed: List[_Placed] = []

    for index, op in enumerate(changes):
        next_start = changes[index + 1].old_start if index + 1 < len(changes) else len(old)
        core = (op.old_start, op.old_end, op.new_start, op.new_end)

        while True:
            claimed = placed[-1].old_end if placed else 0
            anchor = _find_anchor(old, core[0], core[1], core[0] - claimed, next_start - core[1])
            if anchor is not None:
                placed.append(_anchored_action(old, new, core, *anchor))
                break
            if not placed:
                logger.debug("No unique anchor for change at %d; falling back to whole-comment replace", core[0])
                return EditSequence(
                    actions=[EditAction(kind=EditKind.REPLACE, old_span=old, new_span=new)],
                    flavor=EditFlavor.COMMENT_CONDENSED,
                )
            # context needed by this change is owned by the previous action: fuse the two
            previous = placed.pop()
            core = (previous.old_start, core[1], previous.new_start, core[3])

    return EditSequence(actions=[p.action for p in placed], flavor=EditFlavor.COMMENT_CONDENSED)


# ---------------------------------------------------------------------------
# Parsing edit sequences onto the old comment
# ---------------------------------------------------------------------------

def apply_edit_tokens(
    old: Sequence[str], actions: Sequence[EditAction], strict: bool = True
) -> Tuple[List[str], List[Optional[int]], ApplyReport]:
    """Walk P_old over `old` and P_edit over `actions`.

    Returns the new token texts, for each output token the index of the old
    token it was copied from (None for generated tokens), and a report.
    """
    out: List[str] = []
    provenance: List[Optional[int]] = []
    report = ApplyReport()
    p_old = 0

    def copy_until(stop: int) -> None:
        out.extend(old[p_old:stop])
        provenance.extend(range(p_old, stop))

    for p_edit, action in enumerate(actions):
        span = action.old_span
        if not span:
            # unanchored insertion: lands at the current position
            out.extend(action.new_span)
            provenance.extend([None] * len(action.new_span))
            continue

        locations = _occurrences(old, span, p_old)
        if not locations:
            if strict:
                raise AnchorNotFound(f"Action {p_edit} ({action.kind.value}) span {span!r} not found after position {p_old}")
            logger.warning(f"Skipping action {p_edit} ({action.kind.value}): anchor {span!r} not found")
            report.skipped.append(p_edit)
            continue
        if len(locations) > 1:
            warnings.warn(
                AmbiguousAnchor(f"Action {p_edit} span {span!r} matches {len(locations)} places; using the first"),
                stacklevel=2,
            )
            report.ambiguous.append(p_edit)

        location = locations[0]
        copy_until(location)
        if action.kind == EditKind.KEEP:
            out.extend(span)
            provenance.extend(range(location, location + len(span)))
        else:
            out.extend(action.new_span)
            provenance.extend([None] * len(action.new_span))
        p_old = location + len(span)

    copy_until(len(old))
    return out, provenance, report


def apply_edits(c_old: TokensLike, edits: EditSequence, strict: bool = True) -> TokenSeq:
    new_seq, _ = apply_edits_with_report(c_old, edits, strict=strict)
    return new_seq


def apply_edits_with_report(c_old: TokensLike, edits: EditSequence, strict: bool = True) -> Tuple[TokenSeq, ApplyReport]:
    if edits.flavor != EditFlavor.COMMENT_CONDENSED and strict:
        raise MalformedEditSequence("Only condensed comment edit sequences can be applied to a comment")

    old_texts = _texts(c_old)
    texts, provenance, report = apply_edit_tokens(old_texts, edits.actions, strict=strict)

    old_tokens = c_old.tokens if isinstance(c_old, TokenSeq) else None
    tokens: List[Token] = []
    for text, origin in zip(texts, provenance):
        if origin is not None and old_tokens is not None:
            tokens.append(old_tokens[origin])
        else:
            kind = TokenKind.WORD if any(ch.isalnum() for ch in text) else TokenKind.PUNCTUATION
            tokens.append(Token(text=text, kind=kind))
    return TokenSeq(tokens=tokens, source=SequenceSource.COMMENT), report


# ---------------------------------------------------------------------------
# Flat serialization
# ---------------------------------------------------------------------------

def serialize(edits: EditSequence) -> List[str]:
    out: List[str] = []
    for action in edits.actions:
        layout = LAYOUTS[action.kind]
        out.append(layout.opener)
        if layout.middle is None:
            out.extend(action.new_span if action.kind == EditKind.INSERT else action.old_span)
        else:
            out.extend(action.old_span)
            out.append(layout.middle)
            out.extend(action.new_span)
        out.append(layout.end)
    return out


def _read_span(tokens: Sequence[str], start: int) -> Tuple[List[str], int]:
    end = start
    while end < len(tokens) and tokens[end] not in _KEYWORD_SET:
        end += 1
    return list(tokens[start:end]), end


def deserialize(
    tokens: Sequence[str], flavor: EditFlavor = EditFlavor.COMMENT_CONDENSED
) -> Tuple[EditSequence, ParseReport]:
    """Total parser: keeps the longest well-formed prefix and reports the rest"""
    actions: List[EditAction] = []
    i, n = 0, len(tokens)
    error: Optional[str] = None

    while i < n:
        kind = _BY_OPENER.get(tokens[i])
        if kind is None:
            error = f"expected an action keyword at {i}, found {tokens[i]!r}"
            break
        layout = LAYOUTS[kind]
        first, j = _read_span(tokens, i + 1)
        second: List[str] = []
        if layout.middle is not None:
            if j >= n or tokens[j] != layout.middle:
                error = f"{layout.opener} at {i} is missing {layout.middle}"
                break
            second, j = _read_span(tokens, j + 1)
        if j >= n or tokens[j] != layout.end:
            error = f"{layout.opener} at {i} is not terminated by {layout.end}"
            break

        if layout.middle is not None:
            actions.append(EditAction(kind=kind, old_span=first, new_span=second))
        elif kind == EditKind.INSERT:
            actions.append(EditAction(kind=kind, new_span=first))
        else:
            actions.append(EditAction(kind=kind, old_span=first))
        i = j + 1

    report = ParseReport(well_formed=error is None, consumed=i, trailing=list(tokens[i:]), error=error)
    if error:
        logger.debug(f"Malformed edit sequence: {error}")
    return EditSequence(actions=actions, flavor=flavor), report


def deserialize_strict(tokens: Sequence[str], flavor: EditFlavor = EditFlavor.COMMENT_CONDENSED) -> EditSequence:
    edits, report = deserialize(tokens, flavor)
    if not report.well_formed:
        raise MalformedEditSequence(report.error or "malformed edit sequence")
    return edits


# ---------------------------------------------------------------------------
# Inspection helpers
# ---------------------------------------------------------------------------

def edit_action_counts(edits: EditSequence) -> Counter:
    return Counter(action.kind for action in edits.actions)


def anchors_unique(c_old: TokensLike, edits: EditSequence) -> bool:
    old = _texts(c_old)
    return all(len(_occurrences(old, a.old_span)) == 1 for a in edits.actions if a.old_span)


def old_side(edits: EditSequence) -> List[str]:
    """Concatenated old-side spans of a code edit sequence (reconstructs M_old)"""
    out: List[str] = []
    for action in edits.actions:
        out.extend(action.old_span)
    return out


def new_side(edits: EditSequence) -> List[str]:
    """Concatenated new-side spans of a code edit sequence (reconstructs M_new)"""
    out: List[str] = []
    for action in edits.actions:
        out.extend(action.old_span if action.kind == EditKind.KEEP else action.new_span)
    return out
