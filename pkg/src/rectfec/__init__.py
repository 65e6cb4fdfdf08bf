"""Rectangular packet codes with minimum feedback repair."""
from .channel import ChannelConfig
from .codec import (
    CodeGrid,
    CodeParams,
    ConfigClass,
    Ordering,
    choose_dimensions,
    classify,
    decode_peel,
    encode,
    encode_block,
    ordering,
)
from .core import ErrorConfiguration, GridCoord, Packet, ResourceLimitError, Status, crc32, xor_packets
from .feedback import (
    CoordinatesGraph,
    CostFunction,
    FeedbackRepairSet,
    build_gadget,
    min_frs_unit,
    min_frs_weighted,
    packet_weight,
    repair_cost_formula,
)
from .protocol import BlockPolicy, reconstruct, run_block, run_stream
from .baseline import run_tcp_block

__version__ = "0.1.0"
