from .compress import Compressor, compress_ybe
from .freefermion import (
    HOPPING_ANGLE_SCALE,
    NotFreeFermionError,
    gate_one_body,
    one_body_of_circuit,
    resynthesize,
    turnover,
)
from .gates import (
    Circuit,
    CircuitError,
    Gate,
    circuit_unitary,
    cx,
    dumps,
    fswap,
    gate_unitary,
    loads,
    match_block,
    phase,
    phase_aligned_distance,
    rx,
    rz,
)
from .network import PairSchedule, pair_schedule, trotter_step
from .ybe import YbeError, merge_blocks, ybe_reflect

__all__ = [
    "Circuit",
    "CircuitError",
    "Compressor",
    "Gate",
    "HOPPING_ANGLE_SCALE",
    "NotFreeFermionError",
    "PairSchedule",
    "YbeError",
    "circuit_unitary",
    "compress_ybe",
    "cx",
    "dumps",
    "fswap",
    "gate_one_body",
    "gate_unitary",
    "loads",
    "match_block",
    "merge_blocks",
    "one_body_of_circuit",
    "pair_schedule",
    "phase",
    "phase_aligned_distance",
    "resynthesize",
    "rx",
    "rz",
    "trotter_step",
    "turnover",
    "ybe_reflect",
]
