"""
Model Checkpoints
torch.save container: format tag, version, model config and an ordered
parameter-path -> float64 tensor mapping.
"""

import logging
from collections import OrderedDict
from typing import Tuple

import torch

from .config import ConfigError, ModelConfig
from .network import Model, build_model

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 'stgc-checkpoint'
CHECKPOINT_VERSION = 1


def save_checkpoint(model: Model, path: str) -> None:
    parameters = OrderedDict(
        (name, param.detach().to(torch.float64).cpu().clone()) for name, param in model.named_parameters()
    )
    torch.save({
        'format': CHECKPOINT_FORMAT,
        'version': CHECKPOINT_VERSION,
        'config': model.cfg.to_dict(),
        'parameters': parameters,
    }, path)
    logger.info(f"Checkpoint saved to {path} ({len(parameters)} tensors)")


def load_checkpoint(path: str) -> Tuple[Model, ModelConfig]:
    """
    Rebuild the model from the stored config and restore every parameter exactly.

    Raises:
        ConfigError: wrong format/version, or parameter names/shapes that disagree with the config
    """
    payload = torch.load(path, map_location='cpu')
    if not isinstance(payload, dict) or payload.get('format') != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    if payload.get('version') != CHECKPOINT_VERSION:
        raise ConfigError(f"unsupported checkpoint version {payload.get('version')} in {path}")

    cfg = ModelConfig.from_dict(payload['config'])
    model = build_model(cfg)
    stored = payload['parameters']
    current = dict(model.named_parameters())

    missing = sorted(set(current) - set(stored))
    unexpected = sorted(set(stored) - set(current))
    if missing or unexpected:
        raise ConfigError(f"checkpoint parameters do not match model: missing {missing}, unexpected {unexpected}")

    with torch.no_grad():
        for name, param in current.items():
            value = stored[name]
            if tuple(value.shape) != tuple(param.shape):
                raise ConfigError(f"parameter {name} has shape {tuple(value.shape)}, model expects {tuple(param.shape)}")
            param.copy_(value.to(param.dtype))

    logger.info(f"Checkpoint loaded from {path}")
    return model, cfg
