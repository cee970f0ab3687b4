"""Model zoo: a compact CNN for desk-scale runs plus the paper-scale backbones."""

from __future__ import annotations

import torch.nn as nn


def small_cnn(num_classes: int) -> nn.Module:
    """Three conv stages and a spatial linear head; minutes to train on CPU.

    GroupNorm instead of BatchNorm: the training corpus is regenerated with
    a different distortion level every epoch, and batch running statistics
    captured at one level misnormalize the others at eval time. The head
    keeps an 8x8 spatial map rather than global pooling so shape and layout
    cues survive into the classifier.
    """
    def stage(cin, cout):
        return nn.Sequential(
            nn.Conv2d(cin, cout, kernel_size=3, stride=2, padding=1),
            nn.GroupNorm(8, cout),
            nn.ReLU(inplace=True),
        )

    return nn.Sequential(
        stage(3, 16),
        stage(16, 32),
        stage(32, 48),
        nn.AdaptiveAvgPool2d(8),
        nn.Flatten(),
        nn.Linear(48 * 8 * 8, num_classes),
    )


def build_model(architecture: str, num_classes: int, pretrained: bool = False) -> nn.Module:
    if architecture == "small_cnn":
        return small_cnn(num_classes)

    from torchvision import models

    if architecture == "mobilenet_v2":
        weights = models.MobileNet_V2_Weights.DEFAULT if pretrained else None
        model = models.mobilenet_v2(weights=weights)
        model.classifier[-1] = nn.Linear(model.classifier[-1].in_features,
                                         num_classes)
        return model
    if architecture == "resnet_50":
        weights = models.ResNet50_Weights.DEFAULT if pretrained else None
        model = models.resnet50(weights=weights)
        model.fc = nn.Linear(model.fc.in_features, num_classes)
        return model
    raise ValueError(f"unknown architecture: {architecture}")
