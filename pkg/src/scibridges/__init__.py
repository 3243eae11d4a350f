"""Spinal cord injury tissue-bridge quantification.

Measures ventral/dorsal tissue bridges from cord and lesion masks, and
scores lesion segmentations. Rank statistics compare automatic with manual
bridge measurements.
"""

__version__ = "0.1.0"

from .bridges import BridgeMeasurement, BridgeReport, analyze_bridges, measure_bridges_slice, midsagittal_index
from .centerline import Centerline, extract_centerline, sagittal_angle
from .errors import (
    DegenerateInputError,
    DimensionalityError,
    EmptyInputError,
    GeometryMismatchError,
    NiftiFormatError,
    SampleSizeError,
    UnsupportedDtypeError,
    ValidationError,
    VolumeIOError,
)
from .metrics import LabeledComponents, LesionWiseMetrics, connected_components, dice, lesion_wise_counts
from .phantom import LesionBox, PhantomSpec, PhantomTruth, generate_phantom
from .preprocess import binarize, resample, zscore_normalize
from .stats import TestResult, chi2_sf, dagostino_pearson, kruskal_wallis
from .volume import BinaryMask, Volume3D, read_mask, read_nifti, reorient, write_nifti
