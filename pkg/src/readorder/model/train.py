"""Teacher-forced training of the pointer model."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from ..core import DataError, Page
from ..heuristic import heuristic_order
from .config import ModelConfig
from .network import ReadingOrderNet, pointer_logits
from .packing import PackedSequence, pack_training


class TrainingDiverged(RuntimeError):
    """Training loss stopped being finite."""


@dataclass
class Batch:
    word_ids: torch.Tensor  # (B, S+T)
    buckets: torch.Tensor  # (B, S+T, 4)
    positions: torch.Tensor  # (B, S+T)
    is_begin: torch.Tensor  # (B, S+T)
    allowed: torch.Tensor  # (B, S+T, S+T)
    targets: torch.Tensor  # (B, T), -100 on padding
    valid_source: torch.Tensor  # (B, S-1)
    n_source: int  # S, begin slot included


def collate(packed: Sequence[PackedSequence]) -> Batch:
    """Pad packed pages into segment-aligned tensors.

    The source segment (begin slot included) is padded to a common width S and
    the target segment to T, so target rows start at S for every sample.
    Position ids keep each sample's own contiguous packed layout. Padded rows
    may attend to the begin slot only, which keeps their softmax finite while
    no real row ever attends to a padded column.
    """
    batch = len(packed)
    s_width = 1 + max(p.n_src for p in packed)
    t_width = max(p.n_tgt for p in packed)
    total = s_width + t_width
    word_ids = np.zeros((batch, total), dtype=np.int64)
    buckets = np.zeros((batch, total, 4), dtype=np.int64)
    positions = np.zeros((batch, total), dtype=np.int64)
    is_begin = np.zeros((batch, total), dtype=bool)
    allowed = np.zeros((batch, total, total), dtype=bool)
    targets = np.full((batch, t_width), -100, dtype=np.int64)
    valid_source = np.zeros((batch, s_width - 1), dtype=bool)
    allowed[:, :, 0] = True
    for b, pack in enumerate(packed):
        ns = 1 + pack.n_src
        nt = pack.n_tgt
        word_ids[b, :ns] = pack.word_ids[:ns]
        word_ids[b, s_width : s_width + nt] = pack.word_ids[ns:]
        buckets[b, :ns] = pack.buckets[:ns]
        buckets[b, s_width : s_width + nt] = pack.buckets[ns:]
        positions[b, :ns] = pack.positions[:ns]
        positions[b, s_width : s_width + nt] = pack.positions[ns:]
        is_begin[b, 0] = True
        if nt:
            is_begin[b, s_width] = True
        allowed[b, :ns, :ns] = True
        allowed[b, s_width : s_width + nt, :ns] = True
        allowed[b, s_width : s_width + nt, s_width : s_width + nt] = np.tril(
            np.ones((nt, nt), dtype=bool)
        )
        targets[b, :nt] = pack.targets
        valid_source[b, : pack.n_src] = True
    return Batch(
        word_ids=torch.from_numpy(word_ids),
        buckets=torch.from_numpy(buckets),
        positions=torch.from_numpy(positions),
        is_begin=torch.from_numpy(is_begin),
        allowed=torch.from_numpy(allowed),
        targets=torch.from_numpy(targets),
        valid_source=torch.from_numpy(valid_source),
        n_source=s_width,
    )


def teacher_forced_logits(net: ReadingOrderNet, batch: Batch) -> torch.Tensor:
    """Pointer logits (B, T, S-1) for every target slot, padding at -inf."""
    hidden, embeddings = net(
        batch.word_ids, batch.buckets, batch.positions, batch.is_begin, batch.allowed
    )
    source_emb = embeddings[:, 1 : batch.n_source]
    target_hidden = hidden[:, batch.n_source :]
    logits = pointer_logits(target_hidden, source_emb)
    return logits.masked_fill(~batch.valid_source.unsqueeze(1), float("-inf"))


def batch_loss(net: ReadingOrderNet, batch: Batch) -> torch.Tensor:
    """Mean cross-entropy of the gold source indices over all target slots."""
    logits = teacher_forced_logits(net, batch)
    flat = logits.reshape(-1, logits.shape[-1])
    return F.cross_entropy(flat, batch.targets.reshape(-1), ignore_index=-100)


@dataclass
class TrainResult:
    model: ReadingOrderNet
    final_loss: float
    steps: int
    epoch_losses: list[float]


def train_model(
    pages: Sequence[Page],
    config: ModelConfig,
    *,
    epochs: int = 3,
    lr: float = 7e-5,
    warmup_steps: int = 500,
    batch_size: int = 8,
    shuffle_rate: float = 0.0,
    weight_decay: float = 0.01,
    grad_clip: float = 1.0,
    log: Callable[[str], None] | None = None,
) -> TrainResult:
    """Train from scratch; deterministic given config.seed and the arguments.

    Source tokens are presented in left-to-right/top-to-bottom order, except
    that each page is independently shuffled with probability ``shuffle_rate``
    each epoch (the gold targets are re-expressed against the shuffled
    arrangement).
    """
    if not pages:
        raise DataError("training needs at least one page")
    if not 0.0 <= shuffle_rate <= 1.0:
        raise DataError(f"shuffle_rate must be in [0, 1], got {shuffle_rate}")
    if epochs < 1 or batch_size < 1:
        raise DataError("epochs and batch_size must be >= 1")
    for page in pages:
        if len(page) > config.max_tokens_per_page:
            raise DataError(
                f"page {page.id!r} has {len(page)} tokens, over the "
                f"{config.max_tokens_per_page} limit"
            )

    torch.manual_seed(config.seed)
    net = ReadingOrderNet(config)
    net.train()
    data_rng = random.Random(config.seed)
    reading_orders = [heuristic_order(page.tokens) for page in pages]

    optimizer = torch.optim.AdamW(net.parameters(), lr=lr, weight_decay=weight_decay)
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer,
        lambda step: min(1.0, (step + 1) / warmup_steps) if warmup_steps > 0 else 1.0,
    )

    step = 0
    epoch_losses = []
    for epoch in range(epochs):
        order = list(range(len(pages)))
        data_rng.shuffle(order)
        losses = []
        for start in range(0, len(order), batch_size):
            chunk = order[start : start + batch_size]
            packs = []
            for idx in chunk:
                if shuffle_rate > 0.0 and data_rng.random() < shuffle_rate:
                    arrangement = list(range(len(pages[idx])))
                    data_rng.shuffle(arrangement)
                else:
                    arrangement = reading_orders[idx]
                packs.append(pack_training(pages[idx], config, arrangement))
            loss = batch_loss(net, collate(packs))
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDiverged(
                    f"loss {value} at step {step} (epoch {epoch}, lr {scheduler.get_last_lr()[0]:g})"
                )
            optimizer.zero_grad()
            loss.backward()
            if grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(net.parameters(), grad_clip)
            optimizer.step()
            scheduler.step()
            losses.append(value)
            step += 1
        epoch_losses.append(sum(losses) / len(losses))
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs}: mean loss {epoch_losses[-1]:.4f}")
    net.eval()
    return TrainResult(
        model=net, final_loss=epoch_losses[-1], steps=step, epoch_losses=epoch_losses
    )
