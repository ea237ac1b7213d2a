"""Tumor-detection toolkit: preprocessing, K-means segmentation, IoU metrics,
augmentation and a small residual CNN, backed by a C++ core."""

from ._core import (
    ClusterModel,
    InvalidArgument,
    IoError,
    ParseError,
    ShapeError,
    TumorkitError,
    affine_warp,
    bce_loss,
    bilateral_filter,
    box_smooth,
    choose_elbow,
    derive_seed,
    elbow_scan,
    gaussian_smooth,
    hflip,
    iou,
    kmeans,
    preprocess,
    resize,
    resnet_mini_parameter_count,
    run_elbow,
    run_evaluate,
    run_segment,
    run_train,
    segment,
    synth,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
