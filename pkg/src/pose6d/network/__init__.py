"""Learnable blocks: pyramid image encoders, point encoder, fusion, heads."""

from .backbone import CropTooSmallError, ImageTower, PyramidImageEncoder
from .fusion import ConcatFusion, PyramidFusion
from .heads import RegressionHead
from .model import ABLATIONS, NetworkConfig, PoseNet, parameter_count
from .pointnet import PointEncoder
from .refiner import PoseRefiner
from .segmentation import SegmentationHead

__all__ = [
    "ABLATIONS",
    "ConcatFusion",
    "CropTooSmallError",
    "ImageTower",
    "NetworkConfig",
    "ParameterCount" if False else "parameter_count",
    "PointEncoder",
    "PoseNet",
    "PoseRefiner",
    "PyramidFusion",
    "PyramidImageEncoder",
    "RegressionHead",
    "SegmentationHead",
]
