"""Constructive width-bounded ReLU approximators and width-efficiency experiments."""

from .network import Layer, Network, concat, forward, forward_hidden, load, param_count, save
from .universal import (
    ApproximationPlan,
    Cube,
    approximate_function,
    build_block,
    build_universal,
    select_delta,
    trapezoid_oracle,
)
from .wide import build_wide_target, check_E0, grid_points, sample_E0, second_layer_values

__version__ = "0.1.0"

__all__ = [
    "ApproximationPlan",
    "Cube",
    "Layer",
    "Network",
    "approximate_function",
    "build_block",
    "build_universal",
    "build_wide_target",
    "check_E0",
    "concat",
    "forward",
    "forward_hidden",
    "grid_points",
    "load",
    "param_count",
    "sample_E0",
    "save",
    "second_layer_values",
    "select_delta",
    "trapezoid_oracle",
]
