import copy
import logging
import random
import time
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import torch

from app.core import editlex
from app.core.batch import BatchBuilder, PreparedExample, Batch
from app.core.checkpoint import load_checkpoint, save_checkpoint
from app.core.exceptions import EmptyCorpus, VocabularyMissing
from app.core.network import CommentUpdateModel
from app.core.vocab import SPECIALS, Vocabulary
from app.schemas.corpus import Example
from app.schemas.model import ModelConfig, OutputRepr, TrainingLogEntry
from app.utils.helpers import write_jsonl

logger = logging.getLogger(__name__)


class ModelBundle(NamedTuple):
    model: CommentUpdateModel
    code_vocab: Vocabulary
    comment_vocab: Vocabulary

    @property
    def config(self) -> ModelConfig:
        return self.model.config

    def builder(self) -> BatchBuilder:
        return BatchBuilder(self.model.config, self.code_vocab, self.comment_vocab)


class TrainingResult(NamedTuple):
    bundle: ModelBundle
    log: List[TrainingLogEntry]
    best_loss: float


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


class TrainingService:
    def __init__(self):
        self.reserved = len(SPECIALS) + len(editlex.EDIT_KEYWORDS)

    def build_vocabularies(self, examples: Sequence[Example], config: ModelConfig) -> Tuple[Vocabulary, Vocabulary]:
        if not examples:
            raise EmptyCorpus("Cannot build vocabularies from an empty training set")
        code = Vocabulary.build(
            (seq for e in examples for seq in (e.m_old.texts(), e.m_new.texts())),
            min_count=config.min_token_count,
        )
        comment = Vocabulary.build(
            (seq for e in examples for seq in (e.c_old.texts(), e.c_new.texts())),
            min_count=config.min_token_count,
        )
        for name, vocab in (("code", code), ("comment", comment)):
            if len(vocab) <= self.reserved:
                raise VocabularyMissing(
                    f"No {name} token occurs at least {config.min_token_count} times in the training data"
                )
        return code, comment

    def build_model(self, config: ModelConfig, code_vocab: Vocabulary, comment_vocab: Vocabulary) -> CommentUpdateModel:
        torch.manual_seed(config.seed)
        return CommentUpdateModel(config, len(code_vocab), len(comment_vocab))

    def init_embeddings_from(self, bundle: ModelBundle, checkpoint_path: str) -> int:
        """Copy embedding rows of tokens shared with a trained generation model; returns rows copied"""
        source = load_checkpoint(checkpoint_path)
        source_model, source_code, source_comment = source
        if source_model.config.embedding_dim != bundle.config.embedding_dim:
            logger.warning("Embedding sizes differ; skipping embedding initialization")
            return 0
        copied = 0
        pairs = (
            (bundle.model.code_embedding, bundle.code_vocab, source_model.code_embedding, source_code),
            (bundle.model.comment_embedding, bundle.comment_vocab, source_model.comment_embedding, source_comment),
        )
        with torch.no_grad():
            for target, target_vocab, origin, origin_vocab in pairs:
                for token in target_vocab.to_list():
                    if token in origin_vocab and token not in SPECIALS:
                        target.weight[target_vocab.id(token)] = origin.weight[origin_vocab.id(token)]
                        copied += 1
        logger.info(f"Initialized {copied} embedding rows from {checkpoint_path}")
        return copied

    def trainable(self, examples: Sequence[Example], config: ModelConfig) -> List[Example]:
        if config.output_repr == OutputRepr.C_EDIT:
            kept = [e for e in examples if e.c_edit is not None]
            if len(kept) < len(examples):
                logger.warning(f"Dropped {len(examples) - len(kept)} examples without a comment change")
            return kept
        return list(examples)

    def batches(self, builder: BatchBuilder, prepared: Sequence[PreparedExample], batch_size: int,
                generator: Optional[torch.Generator] = None) -> List[Batch]:
        order = torch.randperm(len(prepared), generator=generator).tolist() if generator is not None else range(len(prepared))
        items = [prepared[i] for i in order]
        return [builder.collate(items[i:i + batch_size]) for i in range(0, len(items), batch_size)]

    def evaluate_loss(self, model: CommentUpdateModel, builder: BatchBuilder, prepared: Sequence[PreparedExample],
                      batch_size: int) -> float:
        model.eval()
        total, tokens = 0.0, 0
        with torch.no_grad():
            for batch in self.batches(builder, prepared, batch_size):
                log_probs = model.token_log_probs(batch)
                total -= float(log_probs.sum())
                tokens += int(batch.target_mask.sum())
        return total / max(tokens, 1)

    def train(
        self,
        train_examples: Sequence[Example],
        valid_examples: Sequence[Example],
        config: ModelConfig,
        log_path: Optional[str] = None,
        checkpoint_path: Optional[str] = None,
        init_embeddings_from: Optional[str] = None,
        stop_below: Optional[float] = None,
    ) -> TrainingResult:
        """Minimize target NLL with Adam; early-stop on validation loss (training loss when there is no validation set)"""
        seed_everything(config.seed)
        train_examples = self.trainable(train_examples, config)
        valid_examples = self.trainable(valid_examples, config)
        if not train_examples:
            raise EmptyCorpus("No training examples")

        code_vocab, comment_vocab = self.build_vocabularies(train_examples, config)
        bundle = ModelBundle(self.build_model(config, code_vocab, comment_vocab), code_vocab, comment_vocab)
        if init_embeddings_from:
            self.init_embeddings_from(bundle, init_embeddings_from)

        model = bundle.model
        builder = bundle.builder()
        train_prepared = builder.prepare_all(train_examples)
        valid_prepared = builder.prepare_all(valid_examples)
        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
        generator = torch.Generator().manual_seed(config.seed)

        log: List[TrainingLogEntry] = []
        best_loss = float("inf")
        best_state: Optional[Dict[str, torch.Tensor]] = None
        stale = 0
        started = time.monotonic()

        for epoch in range(1, config.max_epochs + 1):
            model.train()
            total, tokens = 0.0, 0
            for batch in self.batches(builder, train_prepared, config.batch_size, generator):
                optimizer.zero_grad()
                loss = model(batch)
                loss.backward()
                if config.gradient_clip > 0:
                    torch.nn.utils.clip_grad_norm_(model.parameters(), config.gradient_clip)
                optimizer.step()
                n = int(batch.target_mask.sum())
                total += float(loss) * n
                tokens += n
            train_loss = total / max(tokens, 1)

            valid_loss = self.evaluate_loss(model, builder, valid_prepared, config.batch_size) if valid_prepared else None
            monitored = valid_loss if valid_loss is not None else train_loss
            improved = monitored < best_loss
            if improved:
                best_loss, stale = monitored, 0
                best_state = copy.deepcopy(model.state_dict())
                if checkpoint_path:
                    save_checkpoint(checkpoint_path, model, code_vocab, comment_vocab)
            else:
                stale += 1

            entry = TrainingLogEntry(
                epoch=epoch, train_loss=train_loss, valid_loss=valid_loss,
                improved=improved, elapsed_seconds=time.monotonic() - started,
            )
            log.append(entry)
            logger.info(f"epoch {epoch}: train {train_loss:.4f}" + (f" valid {valid_loss:.4f}" if valid_loss is not None else ""))

            if stale >= config.early_stop_patience:
                logger.info(f"Early stopping after {epoch} epochs ({stale} epochs without improvement)")
                break
            if stop_below is not None and train_loss < stop_below:
                logger.info(f"Training loss {train_loss:.5f} below {stop_below}; stopping at epoch {epoch}")
                break

        if best_state is not None:
            model.load_state_dict(best_state)
        model.eval()
        if log_path:
            write_jsonl(log_path, log)
        return TrainingResult(bundle=bundle, log=log, best_loss=best_loss)

    def check_gradients(
        self,
        model: CommentUpdateModel,
        batch: Batch,
        eps: float = 1e-5,
        max_entries: Optional[int] = 25,
        abs_floor: float = 1e-5,
        seed: int = 0,
    ) -> Dict[str, float]:
        """Max relative error between autograd and central differences, per parameter tensor.

        Runs in double precision with dropout disabled; the batch must be collated as float64.
        """
        model.double()
        model.eval()
        model.zero_grad()
        model(batch).backward()

        generator = torch.Generator().manual_seed(seed)
        errors: Dict[str, float] = {}
        for name, param in model.named_parameters():
            analytic = param.grad.detach().view(-1).clone() if param.grad is not None else torch.zeros(param.numel(), dtype=param.dtype)
            flat = param.data.view(-1)
            indices = torch.randperm(flat.numel(), generator=generator).tolist()
            if max_entries is not None:
                indices = indices[:max_entries]
            worst = 0.0
            with torch.no_grad():
                for index in indices:
                    original = float(flat[index])
                    flat[index] = original + eps
                    plus = float(model(batch))
                    flat[index] = original - eps
                    minus = float(model(batch))
                    flat[index] = original
                    numeric = (plus - minus) / (2 * eps)
                    exact = float(analytic[index])
                    error = abs(exact - numeric) / max(abs(exact), abs(numeric), abs_floor)
                    worst = max(worst, error)
            errors[name] = worst
        return errors

    def load(self, path: str) -> ModelBundle:
        return ModelBundle(*load_checkpoint(path))

    def save(self, path: str, bundle: ModelBundle) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        save_checkpoint(path, bundle.model, bundle.code_vocab, bundle.comment_vocab)


training_service = TrainingService()
