"""Exact simulation and analysis of binary circuits with delay channels."""

from ._kernels import BACKEND
from .timebase import NEG_INF, POS_INF, QTime, parse, format_time
from .signal import Signal, make_signal, make_pulse

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "NEG_INF",
    "POS_INF",
    "QTime",
    "Signal",
    "format_time",
    "make_pulse",
    "make_signal",
    "parse",
]
