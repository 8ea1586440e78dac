"""Small-target detection for long-range infrared video.

Pipeline: optional bicubic upsampling, LIG intensity-gradient map, adaptive
top-fraction threshold, dilation + connected components with area rules,
brightest-component selection, SORT track association, and centroid-based
precision / recall / F1 scoring.
"""

__version__ = "0.1.0"

from .cc import Component, dilate, label_components, rule_filter, select_targets
from .core import BBox, DataError, Detection, Frame, PipelineConfig, SortParams, bbox_iou, centroid_distance
from .evaluation import GroundTruth, GTRecord, MetricsReport, compute_metrics, evaluate, match_frame
from .lig import LigParams, adaptive_threshold, binarize, compute_ig_map, local_gradient, local_intensity
from .sort import SortTracker, associate, bbox_to_measurement, measurement_to_bbox, predict, update
from .synth import ClutterSpec, Scenario, TargetSpec, generate_sequence
from .upsample import BicubicKernel, bicubic_upsample

__all__ = [
    "BBox",
    "BicubicKernel",
    "ClutterSpec",
    "Component",
    "DataError",
    "Detection",
    "Frame",
    "GTRecord",
    "GroundTruth",
    "LigParams",
    "MetricsReport",
    "PipelineConfig",
    "Scenario",
    "SortParams",
    "SortTracker",
    "TargetSpec",
    "adaptive_threshold",
    "associate",
    "bbox_iou",
    "bbox_to_measurement",
    "bicubic_upsample",
    "binarize",
    "centroid_distance",
    "compute_ig_map",
    "compute_metrics",
    "dilate",
    "evaluate",
    "generate_sequence",
    "label_components",
    "local_gradient",
    "local_intensity",
    "match_frame",
    "measurement_to_bbox",
    "predict",
    "rule_filter",
    "select_targets",
    "update",
]
