"""Implicit range searching over the image of an integer function."""

from .errors import (ArtifactError, BuildFailure, CapacityError, ChecksumError,
                     ConfigurationError, ImgSearchError, InputError, InsufficientDataError)
from .funcmodel import Box, GridFunction, linear_function
from .inversion import KeyFunction, build_dictionary_inverter, build_tradeoff_inverter
from .kernels import BACKEND_NAME
from .order_queries import build_order_index
from .range_index import build_count_index, build_range_index, build_report_index

__version__ = "0.1.0"

__all__ = [
    "ArtifactError", "BACKEND_NAME", "Box", "BuildFailure", "CapacityError", "ChecksumError",
    "ConfigurationError", "GridFunction", "ImgSearchError", "InputError",
    "InsufficientDataError", "KeyFunction", "build_count_index", "build_dictionary_inverter",
    "build_order_index", "build_range_index", "build_report_index", "build_tradeoff_inverter",
    "linear_function",
]
