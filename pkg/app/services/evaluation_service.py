import logging
import statistics
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from app.core.config import settings
from app.core.exceptions import ConfigurationError
from app.core.metrics import METRIC_NAMES, sentence_scores
from app.schemas.corpus import Example
from app.schemas.evaluation import BootstrapResult, EvaluationReport, ExampleScores, SystemSummary
from app.utils.helpers import format_table

logger = logging.getLogger(__name__)


def predicted_tokens(row: Mapping[str, Any]) -> List[str]:
    """Tokens of a prediction row: `tokens` for baselines, best candidate's parse for model output"""
    if "tokens" in row:
        return list(row["tokens"])
    candidates = row.get("candidates") or []
    if not candidates:
        return []
    return list(candidates[0].get("parsed") or [])


def parse_metric_names(text: Optional[str]) -> List[str]:
    if not text:
        return list(METRIC_NAMES)
    names = [n.strip().lower() for n in text.split(",") if n.strip()]
    unknown = [n for n in names if n not in METRIC_NAMES]
    if unknown:
        raise ConfigurationError(f"Unknown metrics: {', '.join(unknown)} (choose from {', '.join(METRIC_NAMES)})")
    return names


class EvaluationService:
    def __init__(self):
        self.workers = settings.DEFAULT_WORKERS

    def score_example(self, example: Example, prediction: Sequence[str], names: Sequence[str]) -> ExampleScores:
        c_old = example.c_old.texts()
        return ExampleScores(
            id=example.id,
            scores=sentence_scores(c_old, prediction, example.c_new.texts(), names),
            unchanged=list(prediction) == c_old,
        )

    def evaluate(
        self,
        examples: Sequence[Example],
        predictions: Mapping[str, Sequence[str]],
        names: Sequence[str] = METRIC_NAMES,
        name: str = "",
        workers: Optional[int] = None,
    ) -> EvaluationReport:
        """Mean sentence scores over examples; an example without a prediction scores as an empty one"""
        missing = [e.id for e in examples if e.id not in predictions]
        if missing:
            logger.warning(f"{len(missing)} examples have no prediction; scoring them as empty")

        n_jobs = workers or self.workers
        jobs = [(e, list(predictions.get(e.id, []))) for e in examples]
        if n_jobs > 1:
            per_example = Parallel(n_jobs=n_jobs, prefer="threads")(
                delayed(self.score_example)(e, p, names) for e, p in jobs
            )
        else:
            per_example = [self.score_example(e, p, names) for e, p in jobs]

        if not per_example:
            return EvaluationReport(name=name, scores={n: 0.0 for n in names})
        return EvaluationReport(
            name=name,
            count=len(per_example),
            scores={n: statistics.fmean(s.scores[n] for s in per_example) for n in names},
            unchanged=100.0 * statistics.fmean(1.0 if s.unchanged else 0.0 for s in per_example),
            per_example=per_example,
        )

    def summarize(self, name: str, runs: Sequence[EvaluationReport]) -> SystemSummary:
        """Mean ± sample standard deviation over runs (std is 0 for a single run)"""
        if not runs:
            raise ConfigurationError(f"No runs to summarize for {name!r}")
        names = list(runs[0].scores)
        ddof = 1 if len(runs) > 1 else 0
        table = np.array([[r.scores[n] for n in names] for r in runs], dtype=np.float64)
        unchanged = np.array([r.unchanged for r in runs], dtype=np.float64)
        return SystemSummary(
            name=name,
            runs=len(runs),
            count=runs[0].count,
            mean=dict(zip(names, table.mean(axis=0).tolist())),
            std=dict(zip(names, table.std(axis=0, ddof=ddof).tolist())),
            unchanged_mean=float(unchanged.mean()),
            unchanged_std=float(unchanged.std(ddof=ddof)),
        )

    def example_scores(self, runs: Sequence[EvaluationReport], metric: str) -> Dict[str, float]:
        """Per-example score averaged over runs, keyed by example id"""
        totals: Dict[str, float] = {}
        for run in runs:
            for s in run.per_example:
                totals[s.id] = totals.get(s.id, 0.0) + s.scores[metric]
        return {i: total / len(runs) for i, total in totals.items()}

    def paired_bootstrap(
        self,
        runs_a: Sequence[EvaluationReport],
        runs_b: Sequence[EvaluationReport],
        metric: str,
        samples: int = 1000,
        seed: int = 0,
    ) -> BootstrapResult:
        """Paired bootstrap over examples for "A scores higher than B".

        The p-value is the share of resampled test sets whose gain exceeds twice the
        observed gain; it is 1.0 when A does not beat B on the full set.
        """
        a = self.example_scores(runs_a, metric)
        b = self.example_scores(runs_b, metric)
        if set(a) != set(b):
            raise ConfigurationError("Systems were scored on different examples")
        if not a:
            raise ConfigurationError("Cannot bootstrap over an empty test set")
        if samples < 1:
            raise ConfigurationError("Bootstrap needs at least one sample")

        ids = sorted(a)
        gains = np.array([a[i] - b[i] for i in ids], dtype=np.float64)
        observed = float(gains.mean())
        rng = np.random.default_rng(seed)
        resampled = gains[rng.integers(0, len(gains), size=(samples, len(gains)))].mean(axis=1)
        p_value = float(np.mean(resampled > 2 * observed)) if observed > 0 else 1.0
        name_a = runs_a[0].name if runs_a else ""
        name_b = runs_b[0].name if runs_b else ""
        logger.debug(f"Bootstrap {name_a} vs {name_b} on {metric}: delta {observed:.3f}, p {p_value:.4f}")
        return BootstrapResult(
            metric=metric, system_a=name_a, system_b=name_b, delta=observed, p_value=p_value, samples=samples,
        )

    def format_summaries(self, summaries: Sequence[SystemSummary]) -> str:
        names = list(summaries[0].mean) if summaries else list(METRIC_NAMES)
        rows: List[Dict[str, Any]] = []
        for s in summaries:
            row: Dict[str, Any] = {"model": s.name, "runs": s.runs, "count": s.count}
            row.update({n: f"{s.mean[n]:.3f} ± {s.std[n]:.3f}" for n in names})
            row["unchanged"] = f"{s.unchanged_mean:.3f} ± {s.unchanged_std:.3f}"
            rows.append(row)
        return format_table(rows, ["model", "runs", "count", *names, "unchanged"])

    def format_report(self, reports: Sequence[EvaluationReport]) -> str:
        names = list(reports[0].scores) if reports else list(METRIC_NAMES)
        rows: List[Dict[str, Any]] = [
            {"model": r.name, "count": r.count, **r.scores, "unchanged": r.unchanged} for r in reports
        ]
        return format_table(rows, ["model", "count", *names, "unchanged"])

    def format_key_values(self, report: EvaluationReport) -> str:
        lines = [f"{n}={report.scores[n]:.3f}" for n in report.scores]
        lines.append(f"unchanged={report.unchanged:.3f}")
        lines.append(f"count={report.count}")
        return "\n".join(lines)

    def to_tsv(self, report: EvaluationReport) -> str:
        """One row per example, one column per metric"""
        names = list(report.scores)
        lines = ["\t".join(["id", *names, "unchanged"])]
        for s in report.per_example:
            lines.append("\t".join([s.id, *(f"{s.scores[n]:.4f}" for n in names), str(int(s.unchanged))]))
        return "\n".join(lines) + "\n"


evaluation_service = EvaluationService()
