"""2-bit x 2-bit reversible multiplier circuits on an 8-qubit register.

Register order (1-based qubit positions)::

    X  Y  Z  W  A0 A1 A2 A3
    1  2  3  4  5  6  7  8

The multiplier computes ``(2X + Y) * (2W + Z)`` into the ancillae with
``A0`` the least significant product bit, leaving X, Y, Z, W untouched.
Circuits are sequences of CNOT and Toffoli gates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from qdm import analysis
from qdm.gatebuild import build_controlled, conjugate_controlled
from qdm.montecarlo import chunk_sizes, make_seed_sequence, run_chunks
from qdm.noise import NOT_ANGLES, NoiseSpec, composed_gates, sample_angle_array
from qdm.register import apply_unitary, index_to_tuple, pure_state, tuple_to_index

__all__ = [
    "QUBIT_NAMES",
    "N_QUBITS",
    "INPUTS",
    "ANCILLAE",
    "GateSpec",
    "Circuit",
    "CircuitFormatError",
    "UnverifiedCircuitError",
    "REFERENCE_CIRCUIT",
    "multiplier_truth_table",
    "simulate_classical",
    "verify_multiplier",
    "default_pool",
    "canonical_form",
    "search_circuits",
    "parse_circuit",
    "format_circuit",
    "read_circuit",
    "write_circuit",
    "NoisyResult",
    "run_noisy_multiplier",
    "DEFAULT_INPUT",
    "DEFAULT_OUTPUT",
]

QUBIT_NAMES = ("X", "Y", "Z", "W", "A0", "A1", "A2", "A3")
N_QUBITS = 8
X, Y, Z, W, A0, A1, A2, A3 = range(1, 9)
INPUTS = (X, Y, Z, W)
ANCILLAE = (A0, A1, A2, A3)
_BY_NAME = {name: i + 1 for i, name in enumerate(QUBIT_NAMES)}

CNOT = "CNOT"
TOFFOLI = "TOFFOLI"

# X=1, Y=1, Z=1, W=0 with clear ancillae, and its ideal product 3 = A0 A1.
DEFAULT_INPUT = tuple_to_index((1, 1, 1, 0, 0, 0, 0, 0))
DEFAULT_OUTPUT = tuple_to_index((1, 1, 1, 0, 1, 1, 0, 0))


class CircuitFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class UnverifiedCircuitError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class GateSpec:
    """A CNOT (one control) or Toffoli (two controls) on the 8-qubit register."""

    target: int
    controls: tuple[int, ...]
    kind: str = field(compare=False)

    def __init__(self, kind: str, controls: Iterable[int], target: int):
        kind = kind.upper()
        controls = tuple(sorted(controls))
        expected = {CNOT: 1, TOFFOLI: 2}.get(kind)
        if expected is None:
            raise ValueError(f"unknown gate kind {kind!r}")
        if len(controls) != expected:
            raise ValueError(f"{kind} needs {expected} control(s), got {controls}")
        qubits = controls + (target,)
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"control and target qubits overlap: {qubits}")
        if any(not 1 <= q <= N_QUBITS for q in qubits):
            raise ValueError(f"qubit index out of range in {qubits}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "controls", controls)
        object.__setattr__(self, "target", target)

    @classmethod
    def cnot(cls, control: int, target: int) -> "GateSpec":
        return cls(CNOT, (control,), target)

    @classmethod
    def toffoli(cls, c1: int, c2: int, target: int) -> "GateSpec":
        return cls(TOFFOLI, (c1, c2), target)

    @property
    def qubits(self) -> frozenset:
        return frozenset(self.controls + (self.target,))

    def __str__(self) -> str:
        names = [QUBIT_NAMES[q - 1] for q in self.controls + (self.target,)]
        return " ".join([self.kind] + names)

    def __repr__(self) -> str:
        return f"GateSpec({str(self)!r})"


Circuit = tuple  # tuple[GateSpec, ...]

REFERENCE_CIRCUIT: Circuit = (
    GateSpec.toffoli(Y, Z, A0),
    GateSpec.toffoli(X, Z, A1),
    GateSpec.toffoli(Y, W, A1),
    GateSpec.toffoli(X, W, A2),
    GateSpec.toffoli(A0, A2, A3),
    GateSpec.cnot(A3, A2),
)


def multiplier_truth_table() -> dict:
    """Map ``(x, y, w, z)`` to the product bits ``(a0, a1, a2, a3)``."""
    table = {}
    for x, y, w, z in itertools.product((0, 1), repeat=4):
        p = (2 * x + y) * (2 * w + z)
        table[(x, y, w, z)] = tuple((p >> k) & 1 for k in range(4))
    return table


def simulate_classical(circuit: Sequence[GateSpec], bits: Sequence[int]) -> tuple:
    """Apply each gate's basis-state action: the target flips iff every
    control bit is 1."""
    state = list(bits)
    if len(state) != N_QUBITS:
        raise ValueError(f"expected {N_QUBITS} bits, got {len(state)}")
    for g in circuit:
        if all(state[c - 1] for c in g.controls):
            state[g.target - 1] ^= 1
    return tuple(state)


def verify_multiplier(circuit: Sequence[GateSpec]) -> bool:
    for (x, y, w, z), product in multiplier_truth_table().items():
        inputs = (x, y, z, w)
        out = simulate_classical(circuit, inputs + (0, 0, 0, 0))
        if out != inputs + product:
            return False
    return True


def default_pool() -> list[GateSpec]:
    """Toffolis and CNOTs with any controls and an ancilla target."""
    pool = []
    for t in ANCILLAE:
        others = [q for q in range(1, N_QUBITS + 1) if q != t]
        for c1, c2 in itertools.combinations(others, 2):
            pool.append(GateSpec.toffoli(c1, c2, t))
        for c in others:
            pool.append(GateSpec.cnot(c, t))
    return pool


def canonical_form(circuit: Sequence[GateSpec]) -> Circuit:
    """Lexicographically least reordering reachable by swapping adjacent
    gates on disjoint qubits.

    Built greedily: at each step take the smallest gate that has no
    overlapping gate ahead of it in the remaining sequence.
    """
    rest = list(circuit)
    out = []
    while rest:
        ready = [
            i
            for i, g in enumerate(rest)
            if all(not (rest[j].qubits & g.qubits) for j in range(i))
        ]
        i = min(ready, key=lambda k: rest[k])
        out.append(rest.pop(i))
    return tuple(out)


def _input_masks() -> dict[int, int]:
    # bit k of a mask is the qubit's value on the k-th of the 16 inputs
    masks = {q: 0 for q in INPUTS}
    for k, (x, y, z, w) in enumerate(itertools.product((0, 1), repeat=4)):
        for q, v in zip(INPUTS, (x, y, z, w)):
            if v:
                masks[q] |= 1 << k
    return masks


def _goal_masks() -> tuple[int, ...]:
    goal = [0, 0, 0, 0]
    for k, (x, y, z, w) in enumerate(itertools.product((0, 1), repeat=4)):
        p = (2 * x + y) * (2 * w + z)
        for b in range(4):
            if (p >> b) & 1:
                goal[b] |= 1 << k
    return tuple(goal)


def search_circuits(
    max_gates: int,
    pool: Optional[Sequence[GateSpec]] = None,
    dedup: bool = True,
) -> list[Circuit]:
    """All irredundant multiplier circuits of at most ``max_gates`` gates.

    Depth-first search over the ancilla truth tables (16-bit masks, one per
    ancilla).  Branches are cut when more ancillae are wrong than gates
    remain, and ``(state, gates left)`` pairs already shown to be dead are
    skipped.  Sequences containing a gate that acts trivially on all 16
    inputs, or an immediately repeated gate, are not generated.  Inputs are
    never targets.

    With ``dedup`` the result holds one :func:`canonical_form` per class,
    sorted.
    """
    if max_gates < 1:
        raise ValueError("max_gates must be >= 1")
    pool = list(default_pool() if pool is None else pool)
    if not pool:
        raise ValueError("gate pool is empty")
    if any(g.target not in ANCILLAE for g in pool):
        raise ValueError("pool gates must target ancillae")

    inputs = _input_masks()
    goal = _goal_masks()
    full = (1 << 16) - 1
    moves = [(g, g.target - A0, g.controls) for g in pool]
    found: list[Circuit] = []
    dead: set = set()
    path: list[GateSpec] = []

    def control_mask(state, controls):
        m = full
        for c in controls:
            m &= inputs[c] if c in inputs else state[c - A0]
        return m

    def dfs(state, remaining) -> bool:
        hit = state == goal
        if hit:
            found.append(tuple(path))
        if remaining == 0 or (state, remaining) in dead:
            return hit
        if sum(a != b for a, b in zip(state, goal)) > remaining:
            return hit
        any_hit = hit
        for g, slot, controls in moves:
            if path and path[-1] == g:
                continue
            m = control_mask(state, controls)
            if not m:
                continue
            nxt = list(state)
            nxt[slot] ^= m
            path.append(g)
            if dfs(tuple(nxt), remaining - 1):
                any_hit = True
            path.pop()
        if not any_hit:
            dead.add((state, remaining))
        return any_hit

    dfs((0, 0, 0, 0), max_gates)
    if not dedup:
        return found
    return sorted({canonical_form(c) for c in found})


def parse_circuit(text: str) -> Circuit:
    """Parse ``TOFFOLI c1 c2 t`` / ``CNOT c t`` lines; ``#`` starts a comment."""
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *names = line.split()
        kind = kind.upper()
        if kind not in (CNOT, TOFFOLI):
            raise CircuitFormatError(f"unknown gate {kind!r}", lineno)
        try:
            qubits = [_BY_NAME[name.upper()] for name in names]
        except KeyError as exc:
            raise CircuitFormatError(f"unknown qubit {exc.args[0]!r}", lineno) from None
        try:
            gates.append(GateSpec(kind, qubits[:-1], qubits[-1] if qubits else 0))
        except ValueError as exc:
            raise CircuitFormatError(str(exc), lineno) from None
    return tuple(gates)


def format_circuit(circuit: Sequence[GateSpec], comment: str = "") -> str:
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines += [str(g) for g in circuit]
    return "\n".join(lines) + "\n"


def read_circuit(path) -> Circuit:
    return parse_circuit(Path(path).read_text(encoding="utf-8"))


def write_circuit(path, circuit: Sequence[GateSpec], comment: str = "") -> None:
    Path(path).write_text(format_circuit(circuit, comment), encoding="utf-8")


@dataclass
class NoisyResult:
    """Averaged output of the noisy multiplier and its distance to the ideal
    output.

    ``support`` lists the 1-based basis states the circuit can reach from the
    input; ``diagonal_samples[s, k]`` is sample ``s``'s diagonal entry at
    ``support[k]``.
    """

    mean_rho: np.ndarray
    support: tuple[int, ...]
    report: analysis.MetricReport
    diagonal_samples: np.ndarray
    input_index: int
    ideal_index: int

    @property
    def target_samples(self) -> np.ndarray:
        """Per-sample probability of the ideal output."""
        return self.samples_at(self.ideal_index)

    def samples_at(self, index: int) -> np.ndarray:
        return self.diagonal_samples[:, self.support.index(index)]

    def entry(self, row: int, col: int) -> complex:
        return complex(self.mean_rho[row - 1, col - 1])


ENGINES = ("subspace", "sparse")
# complex entries per batched work array (~64 MiB)
_BATCH_ENTRIES = 1 << 22


def _noisy_nots(angles: np.ndarray) -> np.ndarray:
    theta0, phi0 = NOT_ANGLES
    return composed_gates(theta0 + angles[..., 0], phi0 + angles[..., 1])


def _run_sparse(circuit, angles, input_index):
    """Reference path: build each noisy controlled gate as a sparse matrix
    and conjugate the full density matrix, one sample at a time."""
    nots = _noisy_nots(angles)
    start = pure_state(input_index, N_QUBITS)
    basis = np.array(_support(circuit, input_index)) - 1
    acc = np.zeros_like(start)
    rows = []
    for s in range(len(angles)):
        rho = start
        for k, g in enumerate(circuit):
            gate = build_controlled(nots[s, k], N_QUBITS, g.controls, g.target)
            rho = apply_unitary(rho, gate)
        acc += rho
        rows.append(rho.diagonal()[basis].real)
    return acc, np.array(rows)


def _run_subspace(circuit, angles, input_index):
    """Same products restricted to the basis states the circuit can reach
    from the input, many samples at a time.  Every other entry of the full
    matrix is exactly zero for any angles."""
    nots = _noisy_nots(angles)
    basis = np.array(_support(circuit, input_index)) - 1
    m = basis.size
    start = np.zeros((m, m), dtype=np.complex128)
    pos = int(np.searchsorted(basis, input_index - 1))
    start[pos, pos] = 1.0
    batch = max(1, _BATCH_ENTRIES // (m * m))
    acc = np.zeros((m, m), dtype=np.complex128)
    diag = np.empty((len(angles), m))
    for lo in range(0, len(angles), batch):
        us = nots[lo : lo + batch]
        rho = np.repeat(start[None], len(us), axis=0)
        for k, g in enumerate(circuit):
            conjugate_controlled(rho, us[:, k], N_QUBITS, g.controls, g.target, basis, inplace=True)
        acc += rho.sum(axis=0)
        diag[lo : lo + len(us)] = np.diagonal(rho, axis1=1, axis2=2).real
    full = np.zeros((2**N_QUBITS,) * 2, dtype=np.complex128)
    full[np.ix_(basis, basis)] = acc
    return full, diag


def _ideal_index(circuit, input_index: int) -> int:
    bits = index_to_tuple(input_index, N_QUBITS)
    return tuple_to_index(simulate_classical(circuit, bits))


def _support(circuit, input_index: int) -> tuple[int, ...]:
    """Basis states reachable when each gate independently fires or not."""
    states = {index_to_tuple(input_index, N_QUBITS)}
    for g in circuit:
        nxt = set()
        for bits in states:
            nxt.add(bits)
            if all(bits[c - 1] for c in g.controls):
                flipped = list(bits)
                flipped[g.target - 1] ^= 1
                nxt.add(tuple(flipped))
        states = nxt
    return tuple(sorted(tuple_to_index(b) for b in states))


def run_noisy_multiplier(
    circuit: Sequence[GateSpec],
    spec: NoiseSpec,
    samples: int,
    seed=0,
    input_index: int = DEFAULT_INPUT,
    threads: int = 1,
    chunk: int = 500,
    engine: str = "subspace",
) -> NoisyResult:
    """Average the circuit's output over ``samples`` noisy runs.

    Every gate becomes a controlled NOT whose NOT is a freshly perturbed
    ``composed_gate(pi/2, pi)``; controls are exact.  Each sample conjugates
    the full 256x256 density matrix gate by gate.

    ``engine="sparse"`` builds every gate with :func:`build_controlled` and
    conjugates the full matrix with :func:`apply_unitary`.  The default
    ``"subspace"`` engine applies the same gates with
    :func:`conjugate_controlled` on the reachable basis states only, many
    samples at a time.  Both consume the same random draws.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    circuit = tuple(circuit)
    if not verify_multiplier(circuit):
        raise UnverifiedCircuitError("circuit does not implement the multiplier")
    if samples < 1:
        raise ValueError("samples must be >= 1")

    sizes = chunk_sizes(samples, chunk)
    streams = make_seed_sequence(seed).spawn(len(sizes))

    if not 1 <= input_index <= 2**N_QUBITS:
        raise ValueError(f"input index {input_index} out of range")
    ideal_index = _ideal_index(circuit, input_index)
    runner = _run_subspace if engine == "subspace" else _run_sparse

    def work(i):
        rng = np.random.default_rng(streams[i])
        angles = sample_angle_array(spec, rng, (sizes[i], len(circuit)))
        return runner(circuit, angles, input_index)

    parts = run_chunks(work, len(sizes), threads)
    total = np.zeros((2**N_QUBITS,) * 2, dtype=np.complex128)
    for acc, _ in parts:
        total += acc
    mean_rho = total / samples
    diagonals = np.concatenate([d for _, d in parts])
    support = _support(circuit, input_index)

    ideal = pure_state(ideal_index, N_QUBITS)
    table = [(r, c, complex(mean_rho[r - 1, c - 1])) for c in support for r in support]
    report = analysis.MetricReport(
        trace_distance=analysis.trace_distance(mean_rho, ideal),
        fidelity=analysis.fidelity(mean_rho, ideal),
        support=table,
    )
    return NoisyResult(mean_rho, support, report, diagonals, input_index, ideal_index)


def expected_target_probability(variance: float, fired: int) -> float:
    """Gaussian-noise expectation of the ideal-output entry when ``fired``
    gates act on the input: each contributes ``E[cos^2 d] = (1 + e^(-2 var)) / 2``."""
    return ((1 + math.exp(-2 * variance)) / 2) ** fired
