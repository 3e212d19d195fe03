"""Inhomogeneous Khintchine toolkit: sequences, windows, measures and counting."""

import json

from ._core import *  # noqa: F401,F403
from ._core import KhintchineError, ResourceError, count_experiment as _count_experiment

__version__ = "0.1.0"


def count(measure, seq, **kwargs):
    """Run a counting experiment; returns (csv_text, summary_dict)."""
    csv_text, summary = _count_experiment(measure, seq, **kwargs)
    return csv_text, json.loads(summary)
