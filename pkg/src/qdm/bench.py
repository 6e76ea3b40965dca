"""Timing harness for gate construction and swap-vs-multiply CNOTs.

Only the construction or application call sits inside the timed region;
timings are summed over repetitions.  Before any timing is reported, both
paths of a comparison are checked to produce identical matrices.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from qdm.gatebuild import HADAMARD, NOT, build_controlled, build_gate_block, build_gate_kron
from qdm.permgate import apply_swaps, cnot_pairs
from qdm.register import apply_unitary

ALGORITHMS = {"kron": build_gate_kron, "block": build_gate_block}


class EquivalenceError(AssertionError):
    pass


@dataclass(frozen=True)
class GateBenchRow:
    n: int
    target: int
    algorithm: str
    reps: int
    seconds: float
    nnz: int


@dataclass(frozen=True)
class SwapBenchRow:
    n: int
    control: int
    target: int
    algorithm: str
    ops: int
    seconds: float


def bench_targets(n: int) -> list[int]:
    """Targets 1, 5, n/2, n-5 and n, clamped to ``[1, n]`` and deduplicated."""
    raw = (1, 5, n // 2, n - 5, n)
    return sorted({min(max(t, 1), n) for t in raw})


def _time_calls(fn, args, reps: int) -> float:
    total = 0.0
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(*args)
        total += time.perf_counter() - t0
    return total


def bench_gates(min_n: int, max_n: int, reps: int = 50, u=HADAMARD) -> list[GateBenchRow]:
    if min_n < 1 or max_n < min_n:
        raise ValueError(f"invalid qubit range {min_n}..{max_n}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rows = []
    for n in range(min_n, max_n + 1):
        for target in bench_targets(n):
            kron = build_gate_kron(u, n, target)
            block = build_gate_block(u, n, target)
            if kron.shape != block.shape or (kron != block).nnz:
                raise EquivalenceError(f"constructions differ at n={n}, target={target}")
            for name, fn in ALGORITHMS.items():
                seconds = _time_calls(fn, (u, n, target), reps)
                rows.append(GateBenchRow(n, target, name, reps, seconds, kron.nnz))
    return rows


def random_density_like(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(0, 1) entries, as complex128; not a valid state."""
    dim = 2**n
    return rng.uniform(0.0, 1.0, (dim, dim)).astype(np.complex128)


def bench_swap_vs_mult(
    n: int, ops: int = 1000, control: int = 2, target: int = 7, seed=0
) -> tuple[list[SwapBenchRow], bool]:
    """Apply ``ops`` CNOTs to one random matrix by swapping and by
    conjugating with the gate matrix.

    Each operation includes building its pair list or gate matrix.  Returns
    the two timing rows and whether the final matrices agree exactly.
    """
    if ops < 0:
        raise ValueError("ops must be >= 0")
    cnot_pairs(n, control, target)  # validates indices
    rng = np.random.default_rng(seed)
    start = random_density_like(n, rng)

    swapped = start.copy()
    t_swap = 0.0
    for _ in range(ops):
        t0 = time.perf_counter()
        apply_swaps(swapped, cnot_pairs(n, control, target), inplace=True)
        t_swap += time.perf_counter() - t0

    multiplied = start
    t_mult = 0.0
    for _ in range(ops):
        t0 = time.perf_counter()
        multiplied = apply_unitary(multiplied, build_controlled(NOT, n, [control], target))
        t_mult += time.perf_counter() - t0

    same = bool(np.array_equal(swapped, multiplied))
    rows = [
        SwapBenchRow(n, control, target, "swap", ops, t_swap),
        SwapBenchRow(n, control, target, "multiply", ops, t_mult),
    ]
    return rows, same
