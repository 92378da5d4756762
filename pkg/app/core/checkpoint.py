"""Model checkpoints as safetensors files; config and vocabularies ride in the header metadata."""
import json
import logging
from pathlib import Path
from typing import Tuple, Union

import torch
from pydantic import ValidationError
from safetensors import SafetensorError
from safetensors.torch import load_file, save_file
from safetensors import safe_open

from app.core.exceptions import CheckpointError
from app.core.network import CommentUpdateModel
from app.core.vocab import Vocabulary
from app.schemas.model import ModelConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


def save_checkpoint(
    path: Union[str, Path], model: CommentUpdateModel, code_vocab: Vocabulary, comment_vocab: Vocabulary
) -> None:
    # embeddings are shared between modules; safetensors refuses aliased storage
    tensors = {name: p.detach().to(torch.float32).contiguous().clone() for name, p in model.state_dict().items()}
    metadata = {
        "format_version": FORMAT_VERSION,
        "config": model.config.model_dump_json(),
        "code_vocab": json.dumps(code_vocab.to_list()),
        "comment_vocab": json.dumps(comment_vocab.to_list()),
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    save_file(tensors, str(path), metadata=metadata)
    logger.info(f"Saved checkpoint with {len(tensors)} tensors to {path}")


def read_metadata(path: Union[str, Path]) -> Tuple[ModelConfig, Vocabulary, Vocabulary]:
    try:
        with safe_open(str(path), framework="pt") as handle:
            metadata = handle.metadata() or {}
        config = ModelConfig.model_validate_json(metadata["config"])
        code_vocab = Vocabulary.from_list(json.loads(metadata["code_vocab"]))
        comment_vocab = Vocabulary.from_list(json.loads(metadata["comment_vocab"]))
    except (OSError, SafetensorError, KeyError, ValidationError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}")
    return config, code_vocab, comment_vocab


def load_checkpoint(path: Union[str, Path]) -> Tuple[CommentUpdateModel, Vocabulary, Vocabulary]:
    config, code_vocab, comment_vocab = read_metadata(path)
    model = CommentUpdateModel(config, len(code_vocab), len(comment_vocab))
    try:
        state = load_file(str(path))
        model.load_state_dict(state)
    except (OSError, SafetensorError, RuntimeError) as e:
        raise CheckpointError(f"Cannot load parameters from {path}: {e}")
    model.eval()
    return model, code_vocab, comment_vocab
