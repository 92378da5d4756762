from typing import Dict, List

from pydantic import BaseModel, Field


class ExampleScores(BaseModel):
    id: str
    scores: Dict[str, float] = Field(default_factory=dict)
    unchanged: bool = False


class EvaluationReport(BaseModel):
    """Corpus-level means of sentence scores, on a 0-100 scale"""
    name: str = ""
    count: int = 0
    scores: Dict[str, float] = Field(default_factory=dict)
    unchanged: float = 0.0
    per_example: List[ExampleScores] = Field(default_factory=list, exclude=True)


class SystemSummary(BaseModel):
    """Mean and standard deviation of corpus scores over independently trained runs"""
    name: str
    runs: int
    count: int = 0
    mean: Dict[str, float] = Field(default_factory=dict)
    std: Dict[str, float] = Field(default_factory=dict)
    unchanged_mean: float = 0.0
    unchanged_std: float = 0.0


class BootstrapResult(BaseModel):
    metric: str
    system_a: str
    system_b: str
    delta: float
    p_value: float
    samples: int
