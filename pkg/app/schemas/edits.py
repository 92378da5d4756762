from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class EditKind(str, Enum):
    INSERT = "Insert"
    DELETE = "Delete"
    REPLACE = "Replace"
    KEEP = "Keep"
    REPLACE_KEEP_BEFORE = "ReplaceKeepBefore"
    REPLACE_KEEP_AFTER = "ReplaceKeepAfter"
    INSERT_KEEP_BEFORE = "InsertKeepBefore"
    INSERT_KEEP_AFTER = "InsertKeepAfter"
    DELETE_KEEP_BEFORE = "DeleteKeepBefore"
    DELETE_KEEP_AFTER = "DeleteKeepAfter"

    @property
    def keeps_before(self) -> bool:
        return self.value.endswith("KeepBefore")

    @property
    def keeps_after(self) -> bool:
        return self.value.endswith("KeepAfter")

    @property
    def is_anchored(self) -> bool:
        return self.keeps_before or self.keeps_after


class EditFlavor(str, Enum):
    CODE = "code"
    COMMENT_CONDENSED = "comment_condensed"


class EditAction(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: EditKind
    old_span: List[str] = Field(default_factory=list)
    new_span: List[str] = Field(default_factory=list)


class EditSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    actions: List[EditAction] = Field(default_factory=list)
    flavor: EditFlavor = EditFlavor.COMMENT_CONDENSED

    def __len__(self) -> int:
        return len(self.actions)


class ParseReport(BaseModel):
    """Outcome of reading a flat token stream back into actions"""
    well_formed: bool
    consumed: int
    trailing: List[str] = Field(default_factory=list)
    error: Optional[str] = None


class ApplyReport(BaseModel):
    """Actions that could not be placed, or were placed at the first of several candidates"""
    skipped: List[int] = Field(default_factory=list)
    ambiguous: List[int] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.skipped and not self.ambiguous
