import logging
import subprocess
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import regex as re
from tqdm import tqdm

from app.core.config import settings
from app.core.exceptions import MiningError
from app.schemas.corpus import ChangeRecord

logger = logging.getLogger(__name__)

_JAVADOC_RE = re.compile(r"/\*\*(.*?)\*/", re.DOTALL)
_ANNOTATION_RE = re.compile(r"\s*@[\w.]+(\s*\([^)]*\))?")
_NAME_RE = re.compile(r"([\p{L}_$][\p{L}\p{N}_$]*)\s*$")
_RETURN_TAG_RE = re.compile(r"^\s*\*?\s*@return\b")
_BLOCK_TAG_RE = re.compile(r"^\s*\*?\s*@\w+")


class DocumentedMethod(NamedTuple):
    name: str
    arity: int
    method: str
    comment: str


def _skip_literal(text: str, i: int) -> int:
    """Index just past the string/char literal or comment starting at i, else i"""
    if text.startswith("//", i):
        end = text.find("\n", i)
        return len(text) if end < 0 else end + 1
    if text.startswith("/*", i):
        end = text.find("*/", i + 2)
        return len(text) if end < 0 else end + 2
    if text[i] in "\"'":
        quote = text[i]
        j = i + 1
        while j < len(text) and text[j] != quote:
            j += 2 if text[j] == "\\" else 1
        return j + 1
    return i


def _find_matching(text: str, start: int, opener: str, closer: str) -> int:
    depth = 0
    i = start
    while i < len(text):
        skipped = _skip_literal(text, i)
        if skipped != i:
            i = skipped
            continue
        if text[i] == opener:
            depth += 1
        elif text[i] == closer:
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return -1


def _arity(parameters: str) -> int:
    inner = parameters.strip()
    if not inner:
        return 0
    depth, count = 0, 1
    for ch in inner:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        elif ch == "," and depth == 0:
            count += 1
    return count


def return_comment(javadoc: str) -> Optional[str]:
    """The @return block of a Javadoc body, or None"""
    lines = javadoc.splitlines()
    for k, line in enumerate(lines):
        if _RETURN_TAG_RE.match(line):
            block = [line]
            for follower in lines[k + 1:]:
                if _BLOCK_TAG_RE.match(follower):
                    break
                block.append(follower)
            return "\n".join(block).strip()
    return None


def extract_documented_methods(source: str) -> List[DocumentedMethod]:
    """Methods that carry a Javadoc with an @return tag, with that tag's text as the comment"""
    methods: List[DocumentedMethod] = []
    for doc in _JAVADOC_RE.finditer(source):
        comment = return_comment(doc.group(1))
        if comment is None:
            continue
        i = doc.end()
        while True:
            annotation = _ANNOTATION_RE.match(source, i)
            if not annotation or not annotation.group().strip():
                break
            i = annotation.end()

        open_paren = source.find("(", i)
        header_end = min((p for p in (source.find("{", i), source.find(";", i)) if p >= 0), default=-1)
        if open_paren < 0 or header_end < 0 or open_paren > header_end:
            continue
        name = _NAME_RE.search(source[i:open_paren])
        close_paren = _find_matching(source, open_paren, "(", ")")
        if not name or close_paren < 0:
            continue
        body_open = source.find("{", close_paren)
        semicolon = source.find(";", close_paren)
        if body_open < 0 or (0 <= semicolon < body_open):
            continue  # abstract or interface method
        body_close = _find_matching(source, body_open, "{", "}")
        if body_close < 0:
            continue
        methods.append(DocumentedMethod(
            name=name.group(1),
            arity=_arity(source[open_paren + 1:close_paren]),
            method=source[i:body_close + 1].strip(),
            comment=comment,
        ))
    return methods


def _normalize(text: str) -> str:
    return " ".join(text.split())


def pair_changes(old_source: str, new_source: str) -> List[Tuple[DocumentedMethod, DocumentedMethod]]:
    """Same (name, arity) in both versions, unique on each side, with both method and comment changed"""
    def index(methods: List[DocumentedMethod]) -> Dict[Tuple[str, int], DocumentedMethod]:
        keyed: Dict[Tuple[str, int], List[DocumentedMethod]] = {}
        for m in methods:
            keyed.setdefault((m.name, m.arity), []).append(m)
        return {k: v[0] for k, v in keyed.items() if len(v) == 1}

    old_index = index(extract_documented_methods(old_source))
    new_index = index(extract_documented_methods(new_source))
    pairs = []
    for key in sorted(old_index.keys() & new_index.keys()):
        before, after = old_index[key], new_index[key]
        if _normalize(before.method) != _normalize(after.method) and _normalize(before.comment) != _normalize(after.comment):
            pairs.append((before, after))
    return pairs


class MiningService:
    def __init__(self):
        self.git = settings.GIT_EXECUTABLE
        self.timeout = settings.GIT_TIMEOUT_SECONDS

    def _run(self, repo: Path, *args: str) -> str:
        try:
            result = subprocess.run(
                [self.git, "-C", str(repo), *args],
                capture_output=True,
                text=True,
                encoding="utf-8",
                errors="replace",
                check=True,
                timeout=self.timeout,
            )
        except FileNotFoundError:
            raise MiningError(f"git executable not found: {self.git}")
        except subprocess.TimeoutExpired:
            raise MiningError(f"git {' '.join(args[:2])} timed out after {self.timeout}s")
        except subprocess.CalledProcessError as e:
            raise MiningError(f"git {' '.join(args[:2])} failed: {e.stderr.strip()}")
        return result.stdout

    def commit_pairs(self, repo: Path) -> List[Tuple[str, str]]:
        log = self._run(repo, "log", "--reverse", "--no-merges", "--format=%H %P", "--", "*.java")
        pairs = []
        for line in log.splitlines():
            parts = line.split()
            if len(parts) == 2:
                pairs.append((parts[1], parts[0]))
        return pairs

    def _show(self, repo: Path, commit: str, path: str) -> Optional[str]:
        try:
            return self._run(repo, "show", f"{commit}:{path}")
        except MiningError as e:
            logger.warning(f"Cannot read {path} at {commit[:8]}: {e.detail}")
            return None

    def mine(self, repo_path: str, project: Optional[str] = None, limit: Optional[int] = None) -> Iterator[ChangeRecord]:
        repo = Path(repo_path)
        project = project or repo.resolve().name
        pairs = self.commit_pairs(repo)
        if limit:
            pairs = pairs[:limit]
        logger.info(f"Mining {len(pairs)} commits of {project}")

        emitted = 0
        for parent, commit in tqdm(pairs, desc=f"mining {project}", unit="commit", disable=None):
            files = self._run(repo, "diff", "--name-only", "--diff-filter=M", parent, commit, "--", "*.java")
            for path in files.splitlines():
                old_source = self._show(repo, parent, path)
                new_source = self._show(repo, commit, path)
                if old_source is None or new_source is None:
                    continue
                for before, after in pair_changes(old_source, new_source):
                    emitted += 1
                    yield ChangeRecord(
                        project=project,
                        commit_before=parent,
                        commit_after=commit,
                        m_old=before.method,
                        m_new=after.method,
                        c_old=before.comment,
                        c_new=after.comment,
                    )
        logger.info(f"Mined {emitted} change records from {project}")


mining_service = MiningService()
