from enum import Enum
from typing import Dict, List, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field

from app.schemas.edits import EditSequence
from app.schemas.tokens import TokenSeq


class ChangeRecord(BaseModel):
    """One raw corpus line; accepts both the corpus field names and the extractor's long names"""
    model_config = ConfigDict(populate_by_name=True)

    id: Optional[str] = None
    project: str
    commit_before: str = ""
    commit_after: str = ""
    m_old: str = Field(validation_alias=AliasChoices("m_old", "method_before"))
    m_new: str = Field(validation_alias=AliasChoices("m_new", "method_after"))
    c_old: str = Field(validation_alias=AliasChoices("c_old", "comment_before"))
    c_new: str = Field(validation_alias=AliasChoices("c_new", "comment_after"))


class Example(BaseModel):
    model_config = ConfigDict(frozen=True)

    record: ChangeRecord
    m_old: TokenSeq
    m_new: TokenSeq
    c_old: TokenSeq
    c_new: TokenSeq
    m_edit: EditSequence
    c_edit: Optional[EditSequence] = None  # None while the comment is unchanged (removed by filtering)

    @property
    def id(self) -> str:
        return self.record.id or ""

    @property
    def project(self) -> str:
        return self.record.project


class RejectReason(str, Enum):
    RETURN_IRRELEVANT = "return_irrelevant"
    NAME_CHANGED = "name_changed"
    STYLISTIC = "stylistic"
    TRIVIAL = "trivial"
    DUPLICATE = "duplicate"


class Rejection(BaseModel):
    id: str
    reason: RejectReason


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"


class Partition(BaseModel):
    train: List[str] = Field(default_factory=list)
    valid: List[str] = Field(default_factory=list)
    test: List[str] = Field(default_factory=list)

    def ids(self, split: Split) -> List[str]:
        return getattr(self, split.value)


class LengthStats(BaseModel):
    mean: float = 0.0
    median: float = 0.0


class CorpusStats(BaseModel):
    examples: int = 0
    projects: int = 0
    m_old_length: LengthStats = Field(default_factory=LengthStats)
    m_new_length: LengthStats = Field(default_factory=LengthStats)
    c_old_length: LengthStats = Field(default_factory=LengthStats)
    c_new_length: LengthStats = Field(default_factory=LengthStats)
    method_similarity: float = 0.0
    comment_similarity: float = 0.0
    unique_code_tokens: int = 0
    unique_comment_tokens: int = 0
    edit_action_counts: Dict[str, int] = Field(default_factory=dict)
    edit_action_percentages: Dict[str, float] = Field(default_factory=dict)
    mean_edit_actions: float = 0.0
    rts_unchanged: float = 0.0
    rts_null_unchanged: float = 0.0


class RoundTripReport(BaseModel):
    checked: int = 0
    failures: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures
