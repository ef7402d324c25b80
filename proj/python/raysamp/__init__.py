"""Guided ray sampling for voxel radiance fields."""

from ._core import (
    DegenerateMapError,
    NumericalError,
    Sampler,
    adaptive_distribution,
    beta,
    clamp,
    compare,
    depth_std_map,
    fuse,
    normalize_map,
    pixel_std_map,
    psnr,
    render_ground_truth,
    run_cli,
    ssim,
    strategy_names,
    train,
)

__all__ = [
    "DegenerateMapError",
    "NumericalError",
    "Sampler",
    "adaptive_distribution",
    "beta",
    "clamp",
    "compare",
    "depth_std_map",
    "fuse",
    "normalize_map",
    "pixel_std_map",
    "psnr",
    "render_ground_truth",
    "run_cli",
    "ssim",
    "strategy_names",
    "train",
]
