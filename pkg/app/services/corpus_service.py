import hashlib
import json
import logging
import random
import statistics
from collections import Counter
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import regex as re
from joblib import Parallel, delayed
from pydantic import ValidationError

from app.core import editlex
from app.core.baselines import return_type_subst, return_type_subst_null
from app.core.config import settings
from app.core.exceptions import CommentEditError, InsufficientProjects, NoDistinctChange, NoSignature
from app.core.tokenizer import (
    clean_comment_text,
    extract_method_name,
    extract_return_statements,
    extract_return_type,
    lex_method,
    tokenize_comment,
)
from app.schemas.corpus import (
    ChangeRecord,
    CorpusStats,
    Example,
    LengthStats,
    Partition,
    RejectReason,
    Rejection,
    RoundTripReport,
    Split,
)
from app.utils.helpers import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

RECORD_FIELDS = ("id", "project", "commit_before", "commit_after", "m_old", "m_new", "c_old", "c_new")
_PUNCT_RE = re.compile(r"[\p{P}\p{S}]+")


def record_id(record: ChangeRecord) -> str:
    payload = json.dumps([record.project, record.commit_before, record.commit_after,
                          record.m_old, record.m_new, record.c_old, record.c_new])
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:16]


def similarity(old: Sequence[str], new: Sequence[str]) -> float:
    """|multiset intersection| / max(|old|, |new|)"""
    if not old and not new:
        return 1.0
    overlap = sum((Counter(old) & Counter(new)).values())
    return overlap / max(len(old), len(new))


def _stylistic_key(comment: str) -> str:
    text = _PUNCT_RE.sub(" ", clean_comment_text(comment).lower())
    return " ".join(text.split())


def _return_type(example: Example) -> Tuple[List[str], List[str]]:
    def one(method):
        try:
            return extract_return_type(method)
        except NoSignature:
            return []
    return one(example.m_old), one(example.m_new)


def _method_name(method) -> Optional[str]:
    try:
        return extract_method_name(method)
    except NoSignature:
        return None


class CorpusService:
    def __init__(self):
        self.workers = settings.DEFAULT_WORKERS

    # -- ingest ------------------------------------------------------------

    def build_example(self, raw: Union[ChangeRecord, Dict[str, Any]]) -> Example:
        record = raw if isinstance(raw, ChangeRecord) else ChangeRecord.model_validate(raw)
        if not record.id:
            record = record.model_copy(update={"id": record_id(record)})

        m_old = lex_method(record.m_old)
        m_new = lex_method(record.m_new)
        c_old = tokenize_comment(record.c_old)
        c_new = tokenize_comment(record.c_new)

        try:
            c_edit = editlex.encode_comment_edits(c_old, c_new)
        except NoDistinctChange:
            c_edit = None
        return Example(
            record=record,
            m_old=m_old,
            m_new=m_new,
            c_old=c_old,
            c_new=c_new,
            m_edit=editlex.encode_code_edits(m_old, m_new),
            c_edit=c_edit,
        )

    def _try_build(self, position: int, raw: Union[ChangeRecord, Dict[str, Any]]) -> Optional[Example]:
        try:
            return self.build_example(raw)
        except ValidationError as e:
            logger.warning(f"Record {position}: invalid fields ({e.error_count()} errors), skipped")
        except CommentEditError as e:
            logger.warning(f"Record {position}: {e.code}: {e.detail}, skipped")
        return None

    def ingest(self, records: Iterable[Union[ChangeRecord, Dict[str, Any]]], workers: Optional[int] = None) -> List[Example]:
        records = list(records)
        n_jobs = workers or self.workers
        if n_jobs > 1:
            built = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(self._try_build)(i, raw) for i, raw in enumerate(records)
            )
        else:
            built = [self._try_build(i, raw) for i, raw in enumerate(records)]
        examples = [e for e in built if e is not None]
        logger.info(f"Ingested {len(examples)} of {len(records)} records")
        return examples

    def load(self, path: str, workers: Optional[int] = None) -> List[Example]:
        return self.ingest(read_jsonl(path), workers=workers)

    # -- filter ------------------------------------------------------------

    def rejection_reason(self, example: Example, seen: set) -> Optional[RejectReason]:
        old_type, new_type = _return_type(example)
        old_returns = [s.texts() for s in extract_return_statements(example.m_old)]
        new_returns = [s.texts() for s in extract_return_statements(example.m_new)]
        if old_type == new_type and old_returns == new_returns:
            return RejectReason.RETURN_IRRELEVANT

        old_name, new_name = _method_name(example.m_old), _method_name(example.m_new)
        if old_name is None or old_name != new_name:
            return RejectReason.NAME_CHANGED

        if _stylistic_key(example.record.c_old) == _stylistic_key(example.record.c_new):
            return RejectReason.STYLISTIC

        if example.c_old.texts() == example.c_new.texts() or example.m_old.texts() == example.m_new.texts():
            return RejectReason.TRIVIAL

        key = (example.record.m_old, example.record.m_new, example.record.c_old, example.record.c_new)
        if key in seen:
            return RejectReason.DUPLICATE
        seen.add(key)
        return None

    def filter(self, examples: Sequence[Example]) -> Tuple[List[Example], List[Rejection]]:
        kept: List[Example] = []
        rejected: List[Rejection] = []
        seen: set = set()
        for example in examples:
            reason = self.rejection_reason(example, seen)
            if reason is None:
                kept.append(example)
            else:
                rejected.append(Rejection(id=example.id, reason=reason))
        counts = Counter(r.reason.value for r in rejected)
        logger.info(f"Kept {len(kept)} of {len(examples)} examples; rejected {dict(counts)}")
        return kept, rejected

    # -- partition ---------------------------------------------------------

    def partition(
        self,
        examples: Sequence[Example],
        ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
        seed: Optional[int] = None,
    ) -> Partition:
        """Assign whole projects to train/valid/test, largest first, to the split furthest below its target"""
        seed = settings.SEED if seed is None else seed
        by_project: Dict[str, List[str]] = {}
        for example in examples:
            by_project.setdefault(example.project, []).append(example.id)
        if len(by_project) < 3:
            raise InsufficientProjects(f"Need at least 3 projects to partition, found {len(by_project)}")

        projects = sorted(by_project)
        random.Random(seed).shuffle(projects)
        projects.sort(key=lambda p: len(by_project[p]), reverse=True)

        total_ratio = sum(ratios)
        splits = list(Split)
        targets = {s: r / total_ratio * len(examples) for s, r in zip(splits, ratios)}
        assigned: Dict[Split, List[str]] = {s: [] for s in splits}
        sizes = {s: 0 for s in splits}
        active = [s for s in splits if targets[s] > 0]

        for position, project in enumerate(projects):
            remaining = len(projects) - position
            empty = [s for s in active if not assigned[s]]
            candidates = empty if remaining <= len(empty) else active
            split = max(candidates, key=lambda s: (targets[s] - sizes[s], -splits.index(s)))
            assigned[split].append(project)
            sizes[split] += len(by_project[project])

        partition = Partition(**{
            s.value: [i for p in assigned[s] for i in by_project[p]] for s in splits
        })
        logger.info(f"Partitioned {len(examples)} examples: " + ", ".join(f"{s.value}={sizes[s]}" for s in splits))
        return partition

    def select(self, examples: Sequence[Example], partition: Partition, split: Split) -> List[Example]:
        wanted = set(partition.ids(split))
        return [e for e in examples if e.id in wanted]

    def write_partition(self, path: str, partition: Partition) -> None:
        write_jsonl(path, [{"split": s.value, "ids": partition.ids(s)} for s in Split])

    def read_partition(self, path: str) -> Partition:
        values = {row["split"]: row["ids"] for row in read_jsonl(path)}
        return Partition(**values)

    # -- stats -------------------------------------------------------------

    def stats(self, examples: Sequence[Example]) -> CorpusStats:
        if not examples:
            return CorpusStats()

        def lengths(values: List[int]) -> LengthStats:
            return LengthStats(mean=statistics.fmean(values), median=float(statistics.median(values)))

        action_counts: Counter = Counter()
        per_example: List[int] = []
        for example in examples:
            if example.c_edit is not None:
                counts = editlex.edit_action_counts(example.c_edit)
                action_counts.update({k.value: v for k, v in counts.items()})
                per_example.append(len(example.c_edit))
        total_actions = sum(action_counts.values())

        code_tokens = {t for e in examples for t in e.m_old.texts() + e.m_new.texts()}
        comment_tokens = {t for e in examples for t in e.c_old.texts() + e.c_new.texts()}

        return CorpusStats(
            examples=len(examples),
            projects=len({e.project for e in examples}),
            m_old_length=lengths([len(e.m_old) for e in examples]),
            m_new_length=lengths([len(e.m_new) for e in examples]),
            c_old_length=lengths([len(e.c_old) for e in examples]),
            c_new_length=lengths([len(e.c_new) for e in examples]),
            method_similarity=statistics.fmean(similarity(e.m_old.texts(), e.m_new.texts()) for e in examples),
            comment_similarity=statistics.fmean(similarity(e.c_old.texts(), e.c_new.texts()) for e in examples),
            unique_code_tokens=len(code_tokens),
            unique_comment_tokens=len(comment_tokens),
            edit_action_counts=dict(action_counts),
            edit_action_percentages={k: 100.0 * v / total_actions for k, v in action_counts.items()} if total_actions else {},
            mean_edit_actions=statistics.fmean(per_example) if per_example else 0.0,
            rts_unchanged=statistics.fmean(
                1.0 if return_type_subst(e).texts() == e.c_old.texts() else 0.0 for e in examples
            ),
            rts_null_unchanged=statistics.fmean(
                1.0 if return_type_subst_null(e).texts() == e.c_old.texts() else 0.0 for e in examples
            ),
        )

    def round_trip_report(self, examples: Sequence[Example]) -> RoundTripReport:
        report = RoundTripReport()
        for example in examples:
            if example.c_edit is None:
                continue
            report.checked += 1
            rebuilt = editlex.apply_edits(example.c_old, example.c_edit, strict=False)
            if rebuilt.texts() != example.c_new.texts():
                report.failures.append(example.id)
        if report.failures:
            logger.error(f"{len(report.failures)} of {report.checked} comment edits do not reproduce the new comment")
        return report

    # -- files -------------------------------------------------------------

    def record_row(self, example: Example) -> Dict[str, str]:
        data = example.record.model_dump()
        return {name: data[name] or "" for name in RECORD_FIELDS}

    def derived_row(self, example: Example) -> Dict[str, Any]:
        return {
            "id": example.id,
            "m_old": example.m_old.texts(),
            "m_new": example.m_new.texts(),
            "c_old": example.c_old.texts(),
            "c_new": example.c_new.texts(),
            "m_edit": editlex.serialize(example.m_edit),
            "c_edit": editlex.serialize(example.c_edit) if example.c_edit is not None else None,
        }

    def write(self, path: str, examples: Sequence[Example], derived_path: Optional[str] = None) -> int:
        count = write_jsonl(path, (self.record_row(e) for e in examples))
        if derived_path:
            write_jsonl(derived_path, (self.derived_row(e) for e in examples))
        return count


corpus_service = CorpusService()
