"""Euclidean distance degree of multiview varieties through an exact Chow ring
of the resolved camera map, with numerical homotopy cross-checks."""

from .cameras import CameraConfig, load_config, random_config, validate_general_position
from .chern import ClassVector, chern_total, pullback_hyperplane, pushforward_class
from .chow import ChowPresentation, build_presentation, degree, format_element, multiply, parse_element
from .mather import ed_degree, euler_obstruction, mather_class, polar_degrees, run_pipeline, self_intersection_E
from .report import EDReport, build_report

__all__ = [
    "CameraConfig",
    "ChowPresentation",
    "ClassVector",
    "EDReport",
    "build_presentation",
    "build_report",
    "chern_total",
    "degree",
    "ed_degree",
    "euler_obstruction",
    "format_element",
    "load_config",
    "mather_class",
    "multiply",
    "parse_element",
    "polar_degrees",
    "pullback_hyperplane",
    "pushforward_class",
    "random_config",
    "run_pipeline",
    "self_intersection_E",
    "validate_general_position",
]
