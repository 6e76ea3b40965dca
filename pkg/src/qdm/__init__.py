"""Density-matrix register simulator: sparse gate construction, swap-based
controlled gates, angle-noise models and the multiplier workbench."""

from qdm.register import apply_unitary, index_to_tuple, pure_state, tuple_to_index
from qdm.gatebuild import build_controlled, build_gate_block, build_gate_kron
from qdm.permgate import apply_swaps, cnot_pairs, fredkin_pairs, toffoli_pairs

__version__ = "0.1.0"
