"""Training loop: per-epoch augmented corpora, geometric transforms,
best-validation checkpointing."""

from __future__ import annotations

from pathlib import Path

import torch
import torch.nn as nn
from torchvision import transforms

from .config import TrainConfig
from .data import (
    corpus_classes,
    manifest_loader,
    read_manifest,
    run_augment,
    split_rows,
)
from .models import build_model

CHECKPOINT_NAME = "model.pt"


def epoch_seed(base_seed: int, epoch: int) -> int:
    # Distinct augmentation stream per epoch, reproducible across runs.
    return (base_seed * 1_000_003 + epoch) & ((1 << 63) - 1)


def build_transforms(cfg: TrainConfig, training: bool):
    steps = []
    if training:
        if cfg.rotation:
            steps.append(transforms.RandomRotation(15))
        if cfg.scaling:
            steps.append(transforms.RandomAffine(degrees=0, scale=(0.85, 1.15)))
    steps += [
        transforms.Resize((cfg.image_size, cfg.image_size)),
        transforms.ToTensor(),
    ]
    return transforms.Compose(steps)


def _run_epoch(model, loader, optimizer, device) -> float:
    model.train()
    loss_fn = nn.CrossEntropyLoss()
    total_loss = 0.0
    for images, labels in loader:
        images, labels = images.to(device), labels.to(device)
        optimizer.zero_grad()
        loss = loss_fn(model(images), labels)
        loss.backward()
        optimizer.step()
        total_loss += loss.item() * len(labels)
    return total_loss / max(1, len(loader.dataset))


@torch.no_grad()
def _accuracy(model, loader, device) -> float:
    model.eval()
    correct = total = 0
    for images, labels in loader:
        preds = model(images.to(device)).argmax(dim=1).cpu()
        correct += int((preds == labels).sum())
        total += len(labels)
    return correct / max(1, total)


def train(cfg: TrainConfig, device: str = "cpu") -> Path:
    """Train per the config and return the best-validation checkpoint path.

    Every epoch regenerates the augmented training and validation images by
    invoking `semcodec augment` with an epoch-derived seed, then applies the
    geometric transforms and fine-tunes the model.
    """
    torch.manual_seed(cfg.seed)
    classes = corpus_classes(cfg.dataset)
    model = build_model(cfg.architecture, len(classes), cfg.pretrained).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_tf = build_transforms(cfg, training=True)
    val_tf = build_transforms(cfg, training=False)

    best_acc = -1.0
    checkpoint = out_dir / CHECKPOINT_NAME
    for epoch in range(cfg.epochs):
        epoch_dir = out_dir / f"epoch_{epoch:03d}"
        manifest = run_augment(cfg.dataset, epoch_dir,
                               seed=epoch_seed(cfg.seed, epoch),
                               quality=cfg.quality, schedule=cfg.schedule,
                               epoch=epoch, workers=cfg.augment_workers)
        rows = read_manifest(manifest)
        train_rows, val_rows = split_rows(rows, cfg.val_fraction)
        train_loader = manifest_loader(train_rows, epoch_dir, classes, train_tf,
                                       cfg.batch_size, shuffle=True,
                                       seed=epoch_seed(cfg.seed, epoch) + 1)
        val_loader = manifest_loader(val_rows, epoch_dir, classes, val_tf,
                                     cfg.batch_size, shuffle=False)

        loss = _run_epoch(model, train_loader, optimizer, device)
        acc = _accuracy(model, val_loader, device)
        print(f"epoch {epoch}: loss={loss:.4f} val_acc={acc:.3f}")
        if acc > best_acc:
            best_acc = acc
            torch.save({
                "architecture": cfg.architecture,
                "classes": classes,
                "image_size": cfg.image_size,
                "state_dict": model.state_dict(),
            }, checkpoint)
    print(f"best val_acc={best_acc:.3f} -> {checkpoint}")
    return checkpoint


def load_model(path, device: str = "cpu"):
    """Load a checkpoint; returns (model in eval mode, classes, image_size)."""
    blob = torch.load(path, map_location=device, weights_only=False)
    model = build_model(blob["architecture"], len(blob["classes"]))
    model.load_state_dict(blob["state_dict"])
    model.to(device).eval()
    return model, blob["classes"], blob["image_size"]
