"""Lung-nodule CT segmentation pipeline (python surface of the native core)."""

from ._nodseg import (
    Model,
    __version__,
    build_manifest,
    dice_score,
    generate_circles,
    iou_score,
    split_manifest,
    window,
)

__all__ = [
    "Model",
    "__version__",
    "build_manifest",
    "dice_score",
    "generate_circles",
    "iou_score",
    "split_manifest",
    "window",
]
