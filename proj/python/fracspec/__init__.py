"""Spectral fractional powers of divergence-form operators on a box."""

import json as _json

from ._core import (
    ConfigError,
    Decomposition,
    Error,
    Extension,
    Grid,
    InvalidArgument,
    NumericalError,
    Operator,
    __version__,
    conormal_constant,
    conormal_recover,
    dichotomy_sweep,
    estimate_T_star,
    extend,
    operator,
)
from . import _core


def run_config(path):
    """Run a YAML config; returns the manifest as a dict."""
    return _json.loads(_core._run_config(str(path)))


def validate_config(path):
    """Canonical YAML echo of a config (raises ConfigError when invalid)."""
    return _core._validate_config(str(path))
