"""
Training Loop
Adam with a step learning-rate decay, MPJPE loss over the full or future-only span,
seeded shuffling and per-epoch loss history.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
import torch

from config import settings
from src.data.motion import MotionSequence
from src.model.config import ConfigError
from src.model.network import Model

from .metrics import mpjpe_tensor

logger = logging.getLogger(__name__)

Pair = Tuple[MotionSequence, MotionSequence]


class LossSpan(Enum):
    FULL_SEQUENCE = "full_sequence"
    FUTURE_ONLY = "future_only"


class TrainingDivergedError(ValueError):
    """Non-finite loss; carries the 1-based epoch and 0-based batch index."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


@dataclass
class TrainConfig:
    lr: float = settings.LEARNING_RATE
    decay: float = settings.LR_DECAY
    decay_every: int = settings.LR_DECAY_EVERY
    batch_size: int = settings.BATCH_SIZE
    epochs: int = settings.EPOCHS
    seed: int = settings.SEED
    loss_span: LossSpan = LossSpan(settings.LOSS_SPAN)

    def validate(self) -> "TrainConfig":
        if not self.lr > 0 or not 0 < self.decay <= 1:
            raise ConfigError(f"train.lr must be positive and train.decay in (0, 1], got {self.lr}, {self.decay}")
        for name in ('decay_every', 'batch_size', 'epochs'):
            if getattr(self, name) < 1:
                raise ConfigError(f"train.{name} must be positive, got {getattr(self, name)}")
        return self


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    lr: float


def stack_pairs(pairs: Sequence[Pair], dtype: torch.dtype = torch.float64) -> Tuple[torch.Tensor, torch.Tensor]:
    """Observed (N, J, K, D) and full ground truth (N, J, K + L, D) tensors."""
    if not pairs:
        raise ValueError("dataset is empty")
    observed = np.stack([obs.values for obs, _ in pairs])
    truth = np.stack([np.concatenate([obs.values, fut.values], axis=1) for obs, fut in pairs])
    return torch.from_numpy(observed).to(dtype), torch.from_numpy(truth).to(dtype)


def train(model: Model, dataset: Sequence[Pair], cfg: TrainConfig) -> Tuple[Model, List[EpochRecord]]:
    """
    Train in place and return the model with its per-epoch history.

    Raises:
        TrainingDivergedError: a batch loss is NaN or infinite
    """
    cfg.validate()
    observed, truth = stack_pairs(dataset, model.cfg.dtype)
    if truth.shape[-2] != model.cfg.T or observed.shape[-3] != model.cfg.J:
        raise ConfigError(f"dataset shaped {tuple(truth.shape)} does not match model J={model.cfg.J} T={model.cfg.T}")
    start = model.cfg.K if cfg.loss_span == LossSpan.FUTURE_ONLY else 0

    torch.manual_seed(cfg.seed)
    generator = torch.Generator().manual_seed(cfg.seed)
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=cfg.lr, betas=settings.ADAM_BETAS, eps=settings.ADAM_EPS)
    scheduler = torch.optim.lr_scheduler.StepLR(optimizer, step_size=cfg.decay_every, gamma=cfg.decay)

    count = observed.shape[0]
    history = []
    logger.info(f"Training {len(params)} tensors on {count} samples for {cfg.epochs} epochs")
    model.train()
    for epoch in range(1, cfg.epochs + 1):
        lr = optimizer.param_groups[0]['lr']
        order = torch.randperm(count, generator=generator)
        total = 0.0
        for batch, begin in enumerate(range(0, count, cfg.batch_size)):
            index = order[begin:begin + cfg.batch_size]
            pred = model(observed[index])
            loss = mpjpe_tensor(pred[..., start:, :], truth[index][..., start:, :])
            value = float(loss.detach())
            if not np.isfinite(value):
                logger.error(f"Training diverged at epoch {epoch}, batch {batch}")
                raise TrainingDivergedError(epoch, batch, value)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += value * index.numel()
        scheduler.step()
        record = EpochRecord(epoch, total / count, lr)
        history.append(record)
        logger.info(f"epoch {epoch}: loss={record.loss:.6f} lr={lr:.6g}")
    model.eval()
    return model, history


def write_loss_csv(history: Sequence[EpochRecord], path: str) -> None:
    with open(path, 'w') as f:
        f.write("epoch,loss,lr\n")
        for record in history:
            f.write(f"{record.epoch},{record.loss:.17g},{record.lr:.17g}\n")
