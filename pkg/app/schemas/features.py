from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

SUBTOKEN_INDEX_CAP = 7


class SpanMembership(str, Enum):
    INSERT = "insert"
    DELETE = "delete"
    REPLACE_NEW = "replace_new"
    REPLACE_OLD = "replace_old"
    KEEP = "keep"
    NONE = "none"


class VersionMatch(str, Enum):
    UNIQUE_OLD = "unique_old"
    UNIQUE_NEW = "unique_new"
    BOTH = "both"
    NONE = "none"


class PosTag(str, Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    ADJ = "ADJ"
    ADV = "ADV"
    DET = "DET"
    PREP = "PREP"
    PRON = "PRON"
    NUM = "NUM"
    PUNCT = "PUNCT"
    OTHER = "OTHER"


class FeatureRow(BaseModel):
    """Categorical features of one token; fields that do not apply to the row's side keep their neutral value"""
    model_config = ConfigDict(frozen=True)

    token: str

    # code side
    is_edit_keyword: bool = False
    is_java_keyword: bool = False
    is_operator: bool = False
    span_membership: SpanMembership = SpanMembership.NONE
    matches_comment_token: bool = False

    # comment side
    matches_inserted_code: bool = False
    matches_deleted_code: bool = False
    matches_replaced_code: bool = False
    appears_multiple: bool = False
    is_stop_word: bool = False
    pos_tag: PosTag = PosTag.OTHER
    return_stmt_match: VersionMatch = VersionMatch.NONE
    return_type_match: VersionMatch = VersionMatch.NONE

    # shared
    is_subtoken: bool = False
    subtoken_index: Optional[int] = Field(default=None, ge=0, le=SUBTOKEN_INDEX_CAP)


class FeatureSide(str, Enum):
    CODE = "code"
    COMMENT = "comment"


class FeatureMatrix(BaseModel):
    model_config = ConfigDict(frozen=True)

    side: FeatureSide
    rows: List[FeatureRow] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)
