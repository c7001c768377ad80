"""Reliability and coding models for 1S1R crossbar resistive memory.

The package maps device parameters and array position to per-cell write and
read binary asymmetric channels, derives capacity and read thresholds, and
evaluates BCH-based coding schemes that account for location-dependent error
rates.
"""
__version__ = "0.1.0"

from .params import (  # noqa: E402
    OPEN,
    ArrayGeometry,
    BacParams,
    CellLocation,
    DeviceParams,
    ParameterError,
    load_params,
    load_params_file,
)

__all__ = [
    "__version__", "OPEN", "ArrayGeometry", "BacParams", "CellLocation", "DeviceParams",
    "ParameterError", "load_params", "load_params_file",
]
