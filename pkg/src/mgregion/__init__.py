"""Multiplexing-gain regions for mixed URLLC/eMBB traffic on cellular interference networks."""

from .netmodel import Topology, build_hex, build_wyner, hex_color_partition, hop_distance
from .traffic import ActivityRealization, ScenarioParams, Subnet, sample_activity, substream

__all__ = [
    "ActivityRealization",
    "ScenarioParams",
    "Subnet",
    "Topology",
    "build_hex",
    "build_wyner",
    "hex_color_partition",
    "hop_distance",
    "sample_activity",
    "substream",
]

__version__ = "0.1.0"
