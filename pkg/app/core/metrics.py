"""Sentence-level evaluation metrics over comment token streams.

All functions accept TokenSeq or plain lists of token strings. Scores are
computed on the tokens as given (lowercased subtokens, punctuation included).
"""
import math
from collections import Counter
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from nltk.stem.porter import PorterStemmer
from nltk.util import ngrams

from app.core.exceptions import ConfigurationError
from app.schemas.tokens import TokenSeq

TokensLike = Union[TokenSeq, Sequence[str]]

MAX_ORDER = 4
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5
METEOR_SEARCH_BUDGET = 50_000

_stemmer = PorterStemmer()


def _texts(seq: TokensLike) -> List[str]:
    return seq.texts() if isinstance(seq, TokenSeq) else list(seq)


def _counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(ngrams(tokens, n))


def _size(counter: Counter) -> int:
    return sum(counter.values())


def exact_match(pred: TokensLike, ref: TokensLike) -> bool:
    return _texts(pred) == _texts(ref)


def _brevity_penalty(pred_len: int, ref_len: int) -> float:
    if pred_len > ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / pred_len)


def _smoothed_geometric_mean(numerators: List[int], denominators: List[int]) -> float:
    """Add-one smoothing for orders >= 2 whose numerator is zero"""
    log_sum = 0.0
    for order, (num, den) in enumerate(zip(numerators, denominators), start=1):
        if num == 0:
            if order == 1:
                return 0.0
            num, den = 1, den + 1
        log_sum += math.log(num / den)
    return math.exp(log_sum / len(numerators))


def bleu4(pred: TokensLike, ref: TokensLike) -> float:
    hyp, gold = _texts(pred), _texts(ref)
    if not hyp:
        return 0.0
    numerators, denominators = [], []
    for n in range(1, MAX_ORDER + 1):
        numerators.append(_size(_counts(hyp, n) & _counts(gold, n)))
        denominators.append(max(len(hyp) - n + 1, 0))
    return _brevity_penalty(len(hyp), len(gold)) * _smoothed_geometric_mean(numerators, denominators)


def gleu(source: TokensLike, pred: TokensLike, ref: TokensLike) -> float:
    """Single-reference GLEU: n-grams kept from the source but absent from the reference are penalized"""
    src, hyp, gold = _texts(source), _texts(pred), _texts(ref)
    if not hyp:
        return 0.0
    numerators, denominators = [], []
    for n in range(1, MAX_ORDER + 1):
        h, r, s = _counts(hyp, n), _counts(gold, n), _counts(src, n)
        numerators.append(max(0, _size(h & r) - _size(h & (s - r))))
        denominators.append(max(len(hyp) - n + 1, 0))
    return _brevity_penalty(len(hyp), len(gold)) * _smoothed_geometric_mean(numerators, denominators)


def _f1(system: Counter, reference: Counter) -> float:
    good = _size(system & reference)
    precision = good / _size(system) if system else 1.0
    recall = good / _size(reference) if reference else 1.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def sari_components(source: TokensLike, pred: TokensLike, ref: TokensLike) -> Dict[str, float]:
    """Add / keep / delete F1 averaged over n = 1..4, each in [0, 1]"""
    src, hyp, gold = _texts(source), _texts(pred), _texts(ref)
    totals = {"add": 0.0, "keep": 0.0, "delete": 0.0}
    for n in range(1, MAX_ORDER + 1):
        s, c, r = _counts(src, n), _counts(hyp, n), _counts(gold, n)
        totals["keep"] += _f1(s & c, s & r)
        totals["delete"] += _f1(s - c, s - r)
        totals["add"] += _f1(c - s, r - s)
    return {k: v / MAX_ORDER for k, v in totals.items()}


def sari(source: TokensLike, pred: TokensLike, ref: TokensLike) -> float:
    components = sari_components(source, pred, ref)
    return 100.0 * sum(components.values()) / len(components)


@lru_cache(maxsize=65536)
def _stem(word: str) -> str:
    return _stemmer.stem(word)


Alignment = List[Tuple[int, int]]


def _staged_alignment(hyp: Sequence[str], gold: Sequence[str]) -> Alignment:
    """Leftmost exact matches, then leftmost stem matches among what is left"""
    used_h, used_r = set(), set()
    pairs: Alignment = []
    for same in (lambda a, b: a == b, lambda a, b: _stem(a) == _stem(b)):
        for i, word in enumerate(hyp):
            if i in used_h:
                continue
            for j, other in enumerate(gold):
                if j not in used_r and same(word, other):
                    pairs.append((i, j))
                    used_h.add(i)
                    used_r.add(j)
                    break
    return sorted(pairs)


def count_chunks(pairs: Alignment) -> int:
    chunks = 0
    previous: Optional[Tuple[int, int]] = None
    for i, j in sorted(pairs):
        if previous is None or i != previous[0] + 1 or j != previous[1] + 1:
            chunks += 1
        previous = (i, j)
    return chunks


def meteor_alignment(hyp: Sequence[str], gold: Sequence[str]) -> Alignment:
    """Maximal exact-then-stem alignment with the fewest chunks.

    Depth-first search over pred positions in order, bounded by the staged
    leftmost alignment and a node budget.
    """
    best = _staged_alignment(hyp, gold)
    target_total = len(best)
    target_exact = sum(1 for i, j in best if hyp[i] == gold[j])
    if target_total == 0:
        return best
    best_chunks = count_chunks(best)

    hyp_stems = [_stem(w) for w in hyp]
    gold_stems = [_stem(w) for w in gold]
    # matchable hyp positions at or after i, bounds how many matches are still reachable
    matchable = [0] * (len(hyp) + 1)
    gold_stem_set = set(gold_stems)
    for i in range(len(hyp) - 1, -1, -1):
        matchable[i] = matchable[i + 1] + (1 if hyp_stems[i] in gold_stem_set else 0)

    budget = [METEOR_SEARCH_BUDGET]
    used = [False] * len(gold)
    current: Alignment = []

    def search(i: int, chunks: int, exact: int, last: Optional[Tuple[int, int]]) -> None:
        nonlocal best, best_chunks
        if budget[0] <= 0 or chunks >= best_chunks:
            return
        budget[0] -= 1
        if len(current) + matchable[i] < target_total:
            return
        if i == len(hyp):
            if len(current) == target_total and exact == target_exact:
                best, best_chunks = list(current), chunks
            return
        candidates = [j for j in range(len(gold)) if not used[j] and gold_stems[j] == hyp_stems[i]]
        # exact candidates first, then stem-only
        candidates.sort(key=lambda j: (gold[j] != hyp[i], j))
        for j in candidates:
            extends = last is not None and last == (i - 1, j - 1)
            used[j] = True
            current.append((i, j))
            search(i + 1, chunks + (0 if extends else 1), exact + (1 if gold[j] == hyp[i] else 0), (i, j))
            current.pop()
            used[j] = False
        search(i + 1, chunks, exact, None)

    search(0, 0, 0, None)
    return sorted(best)


def meteor(pred: TokensLike, ref: TokensLike) -> float:
    hyp, gold = _texts(pred), _texts(ref)
    if not hyp or not gold:
        return 0.0
    alignment = meteor_alignment(hyp, gold)
    matches = len(alignment)
    if matches == 0:
        return 0.0
    precision = matches / len(hyp)
    recall = matches / len(gold)
    f_mean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (count_chunks(alignment) / matches) ** METEOR_BETA
    return f_mean * (1 - penalty)


METRIC_NAMES = ("xmatch", "bleu4", "meteor", "sari", "gleu")


def sentence_scores(source: TokensLike, pred: TokensLike, ref: TokensLike, names: Sequence[str] = METRIC_NAMES) -> Dict[str, float]:
    """Scores on the reporting scale: xmatch/bleu4/meteor/gleu x100, sari already in [0, 100]"""
    out: Dict[str, float] = {}
    for name in names:
        if name == "xmatch":
            out[name] = 100.0 if exact_match(pred, ref) else 0.0
        elif name == "bleu4":
            out[name] = 100.0 * bleu4(pred, ref)
        elif name == "meteor":
            out[name] = 100.0 * meteor(pred, ref)
        elif name == "sari":
            out[name] = sari(source, pred, ref)
        elif name == "gleu":
            out[name] = 100.0 * gleu(source, pred, ref)
        else:
            raise ConfigurationError(f"Unknown metric: {name}")
    return out
