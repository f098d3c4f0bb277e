"""Gallager error-probability bounds, rate regions and diversity profiles for AWGN channels."""

__version__ = "0.1.0"

from .bounds import BoundResult, bound_sweep, master_bound
from .channel import ChannelPoint, Constellation, PowerConstraint, gaussian_input, make_points, make_psk
from .exponents import Region, RegionReport, e0, ex, region_report

__all__ = [
    "BoundResult",
    "ChannelPoint",
    "Constellation",
    "PowerConstraint",
    "Region",
    "RegionReport",
    "bound_sweep",
    "e0",
    "ex",
    "gaussian_input",
    "make_points",
    "make_psk",
    "master_bound",
    "region_report",
]
