from enum import Enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class InputRepr(str, Enum):
    M_NEW = "m_new"
    M_OLD_AND_M_NEW = "m_old_and_m_new"
    M_EDIT = "m_edit"


class OutputRepr(str, Enum):
    C_NEW = "c_new"
    C_EDIT = "c_edit"


class SourceRole(str, Enum):
    COMMENT = "comment"
    M_OLD = "m_old"
    M_NEW = "m_new"
    M_EDIT = "m_edit"


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    embedding_dim: int = Field(default=64, gt=0)
    encoder_hidden: int = Field(default=64, gt=0)
    encoder_layers: int = Field(default=2, gt=0)
    bidirectional: bool = True
    decoder_hidden: int = Field(default=128, gt=0)
    dropout: float = Field(default=0.6, ge=0.0, lt=1.0)
    batch_size: int = Field(default=100, gt=0)
    learning_rate: float = Field(default=0.001, gt=0.0)
    optimizer: Literal["adam"] = "adam"
    beam_width: int = Field(default=20, gt=0)
    early_stop_patience: int = Field(default=10, gt=0)
    input_repr: InputRepr = InputRepr.M_EDIT
    output_repr: OutputRepr = OutputRepr.C_EDIT

    use_features: bool = True
    use_comment_encoder: bool = True
    decoder_features: bool = False
    max_epochs: int = Field(default=100, gt=0)
    max_decode_length: int = Field(default=48, gt=0)
    min_token_count: int = Field(default=2, gt=0)
    seed: int = 0
    gradient_clip: float = Field(default=5.0, ge=0.0)

    def source_roles(self) -> List[SourceRole]:
        roles = [SourceRole.COMMENT] if self.use_comment_encoder else []
        if self.input_repr == InputRepr.M_NEW:
            roles.append(SourceRole.M_NEW)
        elif self.input_repr == InputRepr.M_OLD_AND_M_NEW:
            roles.extend([SourceRole.M_OLD, SourceRole.M_NEW])
        else:
            roles.append(SourceRole.M_EDIT)
        return roles


class Candidate(BaseModel):
    tokens: List[str] = Field(default_factory=list)
    token_ids: List[int] = Field(default_factory=list)
    beam_score: float  # length-normalized log-probability
    parsed: List[str] = Field(default_factory=list)
    well_formed: bool = True
    scores: Dict[str, float] = Field(default_factory=dict)
    combined: Optional[float] = None


class Prediction(BaseModel):
    id: str
    candidates: List[Candidate] = Field(default_factory=list)

    @property
    def best(self) -> Optional[Candidate]:
        return self.candidates[0] if self.candidates else None


class TrainingLogEntry(BaseModel):
    epoch: int
    train_loss: float
    valid_loss: Optional[float] = None
    improved: bool = False
    elapsed_seconds: float = 0.0
