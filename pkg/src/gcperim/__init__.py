"""Perimeter estimation from labelled uniform samples via graph cuts of
random geometric graphs."""

from .constants import (
    cap_volume,
    optimal_epsilon,
    rate_f,
    surface_tension,
    unit_ball_volume,
    variance_constant,
)
from .diagnostics import decompose, g1_variance
from .estimator import GraphPerimeterEstimator, ShapeLabeler
from .geometry import AxisSlab, Ball, Box, Domain, EmptySet, exact_perimeter, parse_shape
from .inference import confidence_interval, hypothesis_test, test_statistic
from .neighbor_graph import cut_count_grid, cut_count_naive, graph_perimeter
from .nonlocal_functional import bias_curve, nonlocal_perimeter, phi_bar
from .sampling import LabeledCloud, SampleConfig, label_cloud, make_cloud, sample_uniform, spawn_trial_seed

__version__ = "0.1.0"

__all__ = [
    "AxisSlab",
    "Ball",
    "Box",
    "Domain",
    "EmptySet",
    "GraphPerimeterEstimator",
    "LabeledCloud",
    "SampleConfig",
    "ShapeLabeler",
    "bias_curve",
    "cap_volume",
    "confidence_interval",
    "cut_count_grid",
    "cut_count_naive",
    "decompose",
    "exact_perimeter",
    "g1_variance",
    "graph_perimeter",
    "hypothesis_test",
    "label_cloud",
    "make_cloud",
    "nonlocal_perimeter",
    "optimal_epsilon",
    "parse_shape",
    "phi_bar",
    "rate_f",
    "sample_uniform",
    "spawn_trial_seed",
    "surface_tension",
    "test_statistic",
    "unit_ball_volume",
    "variance_constant",
]
