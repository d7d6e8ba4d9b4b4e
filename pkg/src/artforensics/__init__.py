"""Feature extraction and from-scratch classifiers for separating human-made
from AI-generated artwork."""

from artforensics.errors import (
    DecodeError,
    DegenerateLabels,
    EmptyDataset,
    InvalidInput,
    LabelError,
    ShapeError,
    StratificationError,
    UnsupportedModelFile,
)
from artforensics.features import FEATURE_NAMES, ExtractorConfig, extract_all

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "ExtractorConfig",
    "extract_all",
    "DecodeError",
    "DegenerateLabels",
    "EmptyDataset",
    "InvalidInput",
    "LabelError",
    "ShapeError",
    "StratificationError",
    "UnsupportedModelFile",
]
