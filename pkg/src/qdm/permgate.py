"""CNOT, Toffoli and Fredkin gates as row/column swaps.

These gates are permutation matrices, so conjugating a density matrix by one
only exchanges rows and columns.  The pair lists here name those exchanges
with 1-based indices, ``a < b``, sorted by ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qdm.register import check_qubit, num_qubits

__all__ = [
    "SwapPairList",
    "cnot_pairs",
    "toffoli_pairs",
    "fredkin_pairs",
    "apply_swaps",
]


@dataclass(frozen=True)
class SwapPairList:
    n: int
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def permutation(self) -> np.ndarray:
        """0-based permutation vector ``perm`` with ``perm[a-1] = b-1``."""
        perm = np.arange(2**self.n)
        if self.pairs:
            a, b = np.array(self.pairs).T - 1
            perm[a] = b
            perm[b] = a
        return perm


def _validate(n: int, qubits: list[int], minimum: int) -> None:
    if n < minimum:
        raise ValueError(f"gate needs at least {minimum} qubits, got n={n}")
    for q in qubits:
        check_qubit(q, n)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"control and target qubits overlap: {qubits}")


def _bit(n: int, q: int) -> int:
    return 1 << (n - q)


def _pairs(n: int, fixed_ones: int, low_pattern: int, flip: int) -> SwapPairList:
    """Pair every index whose ``fixed_ones`` bits are set and whose ``flip``
    bits read ``low_pattern`` with the index obtained by xoring ``flip``."""
    idx = np.arange(2**n)
    sel = ((idx & fixed_ones) == fixed_ones) & ((idx & flip) == low_pattern)
    a = idx[sel]
    b = a ^ flip
    lo = np.minimum(a, b) + 1
    hi = np.maximum(a, b) + 1
    order = np.argsort(lo, kind="stable")
    pairs = tuple(zip(lo[order].tolist(), hi[order].tolist()))
    return SwapPairList(n, pairs)


def cnot_pairs(n: int, control: int, target: int) -> SwapPairList:
    """Swap pairs of a CNOT.

    >>> cnot_pairs(4, 1, 2).pairs
    ((9, 13), (10, 14), (11, 15), (12, 16))
    """
    _validate(n, [control, target], 2)
    return _pairs(n, _bit(n, control), 0, _bit(n, target))


def toffoli_pairs(n: int, control1: int, control2: int, target: int) -> SwapPairList:
    _validate(n, [control1, control2, target], 3)
    ctrl = _bit(n, control1) | _bit(n, control2)
    return _pairs(n, ctrl, 0, _bit(n, target))


def fredkin_pairs(n: int, control: int, target1: int, target2: int) -> SwapPairList:
    """Swap pairs of a controlled swap of ``target1`` and ``target2``.

    Only tuples whose two target bits differ move; the pair joins the
    ``01`` and ``10`` patterns with every other bit equal.
    """
    _validate(n, [control, target1, target2], 3)
    flip = _bit(n, target1) | _bit(n, target2)
    return _pairs(n, _bit(n, control), _bit(n, target2), flip)


def apply_swaps(rho: np.ndarray, swaps: SwapPairList, inplace: bool = False) -> np.ndarray:
    """Exchange rows and columns of ``rho`` for each pair in ``swaps``.

    Equivalent to ``P rho P^T`` for the permutation matrix ``P`` but performs
    no arithmetic.  With ``inplace=True`` the caller's array is overwritten
    and returned; the caller must hold the only reference while this runs.
    """
    if num_qubits(rho) != swaps.n:
        raise ValueError(
            f"swap list is for {swaps.n} qubits, matrix has shape {rho.shape}"
        )
    if not swaps.pairs:
        return rho if inplace else rho.copy()
    a, b = np.array(swaps.pairs).T - 1
    if not inplace:
        perm = swaps.permutation()
        return rho[np.ix_(perm, perm)]
    rows_a = rho[a, :]
    rho[a, :] = rho[b, :]
    rho[b, :] = rows_a
    cols_a = rho[:, a]
    rho[:, a] = rho[:, b]
    rho[:, b] = cols_a
    return rho
