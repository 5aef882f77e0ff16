"""
CLI Configuration
Flat `section.key=value` config files and `--set` overrides, typed by the dataclass field
each key lands in.
"""

import logging
import typing
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from config import gc_catalog, settings
from src.model.config import ConfigError, ModelConfig, Variant
from src.train_eval.evaluation import EVAL_MODES
from src.train_eval.trainer import TrainConfig

logger = logging.getLogger(__name__)

_TRUE = ('1', 'true', 'yes', 'on')
_FALSE = ('0', 'false', 'no', 'off')


@dataclass
class DataConfig:
    """Synthetic data generation or an MSEQ manifest."""
    preset: str = gc_catalog.DEFAULT_DATASET
    manifest: Optional[str] = None
    train_count: int = settings.SYNTH_TRAIN_COUNT
    test_count: int = settings.SYNTH_TEST_COUNT
    amplitude: float = settings.SYNTH_AMPLITUDE
    noise: float = settings.SYNTH_NOISE
    phase_lag: float = settings.SYNTH_PHASE_LAG
    seed: int = settings.SEED

    def validate(self) -> "DataConfig":
        try:
            gc_catalog.get_dataset_preset(self.preset)
        except KeyError as e:
            raise ConfigError(str(e.args[0])) from e
        if self.train_count < 1 or self.test_count < 1:
            raise ConfigError(f"data counts must be positive, got {self.train_count}, {self.test_count}")
        return self


@dataclass
class EvalConfig:
    horizons_ms: Tuple[int, ...] = settings.HORIZONS_MS
    mode: str = settings.EVAL_MODE
    batch_size: int = settings.BATCH_SIZE

    def validate(self) -> "EvalConfig":
        if self.mode not in EVAL_MODES:
            raise ConfigError(f"eval.mode must be one of {EVAL_MODES}, got {self.mode!r}")
        if not self.horizons_ms or self.batch_size < 1:
            raise ConfigError("eval needs at least one horizon and a positive batch size")
        return self


@dataclass
class BenchConfig:
    frames: Tuple[int, ...] = settings.BENCH_FRAMES
    channels: int = settings.BENCH_CHANNELS
    batch: int = settings.BENCH_BATCH
    joint_ratio: float = settings.BENCH_JOINT_RATIO
    repetitions: int = settings.BENCH_REPETITIONS
    warmup: int = settings.BENCH_WARMUP
    reduction: int = settings.REDUCTION_RATE

    def validate(self) -> "BenchConfig":
        if self.repetitions < 1 or self.warmup < 0:
            raise ConfigError(f"bench.repetitions must be positive, got {self.repetitions}")
        return self


@dataclass
class CliConfig:
    """Every section a subcommand may read, plus the run-level flags."""
    command: str = ''
    config_path: Optional[str] = None
    overrides: List[str] = field(default_factory=list)
    out: str = '.'
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    data: DataConfig = field(default_factory=DataConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def sections(self) -> Dict[str, object]:
        return {'model': self.model, 'train': self.train, 'data': self.data, 'eval': self.eval, 'bench': self.bench}

    def validate(self) -> "CliConfig":
        for section in self.sections().values():
            section.validate()
        return self

    def resolved(self) -> List[str]:
        """Every key as `section.key=value`, enums as their values."""
        lines = [f"command={self.command}", f"config={self.config_path}", f"out={self.out}"]
        for name, section in self.sections().items():
            for f in fields(section):
                value = getattr(section, f.name)
                if isinstance(value, Enum):
                    value = value.value
                elif isinstance(value, tuple):
                    value = ",".join(str(v) for v in value)
                lines.append(f"{name}.{f.name}={value}")
        return lines


def _coerce(text: str, hint, key: str):
    """Convert a raw string into the type annotated on the target field."""
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union and type(None) in args:
        if text.lower() in ('', 'none'):
            return None
        hint = next(a for a in args if a is not type(None))
        origin, args = typing.get_origin(hint), typing.get_args(hint)
    try:
        if origin in (tuple, Tuple):
            return tuple(_coerce(part.strip(), args[0], key) for part in text.split(',') if part.strip())
        if hint is bool:
            lowered = text.lower()
            if lowered not in _TRUE + _FALSE:
                raise ValueError(f"expected a boolean, got {text!r}")
            return lowered in _TRUE
        if hint is Variant:
            return Variant.parse(text)
        if isinstance(hint, type) and issubclass(hint, Enum):
            return hint(text.lower())
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
        return text
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from e


def apply_setting(cfg: CliConfig, assignment: str, source: str = '--set') -> None:
    """Apply one `section.key=value` assignment."""
    if '=' not in assignment:
        raise ConfigError(f"{source}: expected section.key=value, got {assignment!r}")
    key, value = (part.strip() for part in assignment.split('=', 1))
    section_name, _, name = key.partition('.')
    sections = cfg.sections()
    if section_name not in sections or not name:
        raise ConfigError(f"{source}: unknown section in {key!r}, expected one of {sorted(sections)}")
    section = sections[section_name]
    hints = typing.get_type_hints(type(section))
    if name not in hints or name not in {f.name for f in fields(section)}:
        raise ConfigError(f"{source}: unknown key {key!r}")
    setattr(section, name, _coerce(value, hints[name], key))


def parse_config_text(text: str, cfg: Optional[CliConfig] = None, source: str = '<config>') -> CliConfig:
    cfg = CliConfig() if cfg is None else cfg
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if line:
            apply_setting(cfg, line, f"{source}:{line_no}")
    return cfg


def apply_preset(cfg: CliConfig) -> None:
    """Copy the data preset's extents into the model and eval sections."""
    preset = gc_catalog.get_dataset_preset(cfg.data.preset)
    cfg.model.J = preset['joints']
    cfg.model.K = preset['observed']
    cfg.model.L = preset['predicted']
    cfg.eval.horizons_ms = tuple(preset['horizons_ms'])


def load_cli_config(command: str, config_path: Optional[str] = None, overrides: Sequence[str] = (),
                    out: str = '.', seed: Optional[int] = None) -> CliConfig:
    """
    Resolve a CliConfig: defaults, then the data preset, then the config file, then --set overrides,
    then --seed.

    Raises:
        ConfigError: unknown keys or values that fail validation
        OSError: unreadable config file
    """
    cfg = CliConfig(command=command, config_path=config_path, overrides=list(overrides), out=out)
    preset_lines = []
    if config_path:
        with open(config_path, 'r') as f:
            text = f.read()
        preset_lines = [l for l in text.splitlines() if l.split('#', 1)[0].strip().startswith('data.preset')]
    preset_lines += [o for o in overrides if o.strip().startswith('data.preset')]
    for line in preset_lines:
        apply_setting(cfg, line.split('#', 1)[0])
    cfg.data.validate()
    apply_preset(cfg)

    if config_path:
        parse_config_text(text, cfg, config_path)
    for override in overrides:
        apply_setting(cfg, override)
    if seed is not None:
        cfg.model.seed = cfg.train.seed = cfg.data.seed = seed
    return cfg.validate()
