"""Backend selection for the Z[sqrt 2] kernels.

The compiled ``_speedups`` module is used when importable; set
``SPFSIM_PURE=1`` to force the pure-Python reference.  Compiled calls that
overflow int64 are transparently retried on the pure path.
"""

import os

from . import _purekernels as pure

try:
    if os.environ.get("SPFSIM_PURE"):
        raise ImportError("pure backend forced")
    from . import _speedups as compiled
except ImportError:
    compiled = None

BACKEND = "compiled" if compiled is not None else "pure"

_NAMES = (
    "surd_sign",
    "surd_floor",
    "orbit_point",
    "max_gap_search",
    "sorted_orbit",
    "discrepancy_scan",
    "discrepancy_threshold_search",
)


def _guarded(name):
    fast = getattr(compiled, name)
    slow = getattr(pure, name)

    def call(*args):
        try:
            return fast(*args)
        except OverflowError:
            return slow(*args)

    call.__name__ = name
    call.__doc__ = slow.__doc__
    return call


if compiled is None:
    surd_sign = pure.surd_sign
    surd_floor = pure.surd_floor
    orbit_point = pure.orbit_point
    max_gap_search = pure.max_gap_search
    sorted_orbit = pure.sorted_orbit
    discrepancy_scan = pure.discrepancy_scan
    discrepancy_threshold_search = pure.discrepancy_threshold_search
else:
    surd_sign = _guarded("surd_sign")
    surd_floor = _guarded("surd_floor")
    orbit_point = _guarded("orbit_point")
    max_gap_search = _guarded("max_gap_search")
    sorted_orbit = _guarded("sorted_orbit")
    discrepancy_scan = _guarded("discrepancy_scan")
    discrepancy_threshold_search = _guarded("discrepancy_threshold_search")


def backends():
    """Map of backend name to kernel module, for tests and benchmarks."""
    found = {"pure": pure}
    if compiled is not None:
        found["compiled"] = compiled
    return found
