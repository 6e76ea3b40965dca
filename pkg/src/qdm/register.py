"""Basis-state bookkeeping and density-matrix helpers.

Basis states are labelled by bit tuples whose leftmost bit is qubit 1 and
whose rightmost bit is qubit n (the least significant bit).  Every index
exposed by this package is 1-based: the tuple ``(0, ..., 0)`` is row/column 1
and ``(1, ..., 1)`` is row/column ``2**n``.

A density matrix is a dense ``complex128`` array of shape ``(2**n, 2**n)``.
Gates are usually ``scipy.sparse`` matrices, but dense arrays are accepted.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "tuple_to_index",
    "index_to_tuple",
    "pure_state",
    "apply_unitary",
    "num_qubits",
    "check_qubit",
]


def check_qubit(q: int, n: int, what: str = "qubit") -> None:
    if not 1 <= q <= n:
        raise ValueError(f"{what} {q} out of range [1, {n}]")


def tuple_to_index(bits: Sequence[int]) -> int:
    """Return the 1-based row/column of a basis tuple.

    >>> tuple_to_index((1, 0, 1, 1))
    12
    """
    if len(bits) == 0:
        raise ValueError("basis tuple must hold at least one bit")
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"basis tuple entries must be 0 or 1, got {b!r}")
        value = (value << 1) | int(b)
    return value + 1


def index_to_tuple(idx: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`tuple_to_index` for an ``n``-qubit register."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= idx <= 2**n:
        raise ValueError(f"index {idx} out of range [1, {2**n}]")
    value = idx - 1
    return tuple((value >> (n - 1 - k)) & 1 for k in range(n))


def pure_state(idx: int, n: int) -> np.ndarray:
    """Density matrix of the basis state at 1-based index ``idx``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = 2**n
    if not 1 <= idx <= dim:
        raise ValueError(f"index {idx} out of range [1, {dim}]")
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[idx - 1, idx - 1] = 1.0
    return rho


def num_qubits(rho) -> int:
    """Qubit count of a square matrix whose side is a power of two."""
    rows, cols = rho.shape
    if rows != cols or rows < 2 or rows & (rows - 1):
        raise ValueError(f"expected a 2^n x 2^n matrix, got shape {rho.shape}")
    return rows.bit_length() - 1


def apply_unitary(rho: np.ndarray, gate) -> np.ndarray:
    """Return ``gate @ rho @ gate^dagger`` as a new dense array.

    ``gate`` may be a scipy sparse matrix or a dense array.  The input is
    never modified.
    """
    rho = np.asarray(rho)
    if gate.shape != rho.shape:
        raise ValueError(
            f"gate shape {gate.shape} does not match density matrix {rho.shape}"
        )
    if sp.issparse(gate):
        left = np.asarray(gate @ rho)
        # (G (G rho)^H)^H = G rho G^H without densifying the gate.
        return np.asarray(gate @ left.conj().T).conj().T
    gate = np.asarray(gate)
    return gate @ rho @ gate.conj().T
