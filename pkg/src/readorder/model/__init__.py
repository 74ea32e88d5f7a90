"""Pointer-style seq2seq reading order model."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import MODES, ModelConfig
from .decode import decode_page, decode_pages
from .network import ReadingOrderNet, pointer_logits
from .packing import (
    PackedSequence,
    SourcePack,
    bbox_buckets,
    build_mask,
    hash_word_id,
    pack_source,
    pack_training,
)
from .train import (
    Batch,
    TrainingDiverged,
    TrainResult,
    batch_loss,
    collate,
    teacher_forced_logits,
    train_model,
)

__all__ = [
    "MODES",
    "ModelConfig",
    "ReadingOrderNet",
    "PackedSequence",
    "SourcePack",
    "Batch",
    "TrainResult",
    "TrainingDiverged",
    "batch_loss",
    "bbox_buckets",
    "build_mask",
    "collate",
    "decode_page",
    "decode_pages",
    "hash_word_id",
    "load_checkpoint",
    "pack_source",
    "pack_training",
    "pointer_logits",
    "save_checkpoint",
    "teacher_forced_logits",
    "train_model",
]
