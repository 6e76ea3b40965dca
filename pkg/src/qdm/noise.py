"""Angle-error models and the Hadamard degradation experiment.

Hadamard and NOT are both synthesised as a phase shift followed by a
rotation, ``rotation(theta) @ phase_shift(phi)``:

=========  =========  =======
gate       theta      phi
=========  =========  =======
Hadamard   pi/4       pi
NOT        pi/2       pi
=========  =========  =======

An operational error adds an independent random offset to each of the two
angles every time a gate is instantiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qdm.montecarlo import chunk_sizes, make_seed_sequence, run_chunks

__all__ = [
    "GAUSSIAN",
    "LOGNORMAL",
    "NoiseSpec",
    "AngleSample",
    "DecayResult",
    "rotation",
    "phase_shift",
    "composed_gate",
    "sample_angles",
    "sample_angle_array",
    "noisy_gate",
    "composed_gates",
    "run_hadamard_decay",
    "HADAMARD_ANGLES",
    "NOT_ANGLES",
]

GAUSSIAN = "gaussian"
LOGNORMAL = "lognormal"

HADAMARD_ANGLES = (math.pi / 4, math.pi)
NOT_ANGLES = (math.pi / 2, math.pi)

# sigma of the underlying normal giving the shifted lognormal a variance of 0.1
LOGNORMAL_SIGMA = 0.296
LOGNORMAL_OFFSET = 1.045


@dataclass(frozen=True)
class NoiseSpec:
    """Distribution of the additive angle error.

    ``gaussian``: ``Normal(mu, sigma)``.
    ``lognormal``: ``LogNormal(mu, sigma) - offset``.
    """

    family: str
    mu: float = 0.0
    sigma: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.family not in (GAUSSIAN, LOGNORMAL):
            raise ValueError(f"unknown noise family {self.family!r}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.family == GAUSSIAN and self.offset != 0:
            raise ValueError("gaussian noise takes no offset")

    @classmethod
    def gaussian(cls, variance: float = 0.1) -> "NoiseSpec":
        return cls(GAUSSIAN, mu=0.0, sigma=math.sqrt(variance))

    @classmethod
    def lognormal(
        cls, sigma: float = LOGNORMAL_SIGMA, offset: float = LOGNORMAL_OFFSET
    ) -> "NoiseSpec":
        return cls(LOGNORMAL, mu=0.0, sigma=sigma, offset=offset)

    @classmethod
    def centered_lognormal(cls, variance: float) -> "NoiseSpec":
        """Lognormal with ``mu=0`` whose shifted draws have mean 0 and the
        given variance (``var = (e^(s^2) - 1) e^(s^2)``)."""
        if not variance > 0:
            raise ValueError("variance must be positive")
        # solve w^2 - w - variance = 0 for w = e^(s^2)
        w = (1 + math.sqrt(1 + 4 * variance)) / 2
        sigma = math.sqrt(math.log(w))
        return cls(LOGNORMAL, mu=0.0, sigma=sigma, offset=math.sqrt(w))

    @classmethod
    def from_name(cls, family: str, variance: float = 0.1) -> "NoiseSpec":
        """The default spec of a family at a given variance.

        At variance 0.1 the lognormal family uses the fixed (0.296, 1.045)
        parameterisation; other variances are solved exactly.
        """
        if family == GAUSSIAN:
            return cls.gaussian(variance)
        if family == LOGNORMAL:
            if math.isclose(variance, 0.1):
                return cls.lognormal()
            return cls.centered_lognormal(variance)
        raise ValueError(f"unknown noise family {family!r}")

    def draw(self, rng: np.random.Generator, size=None):
        if self.family == GAUSSIAN:
            return rng.normal(self.mu, self.sigma, size)
        return rng.lognormal(self.mu, self.sigma, size) - self.offset


@dataclass(frozen=True)
class AngleSample:
    delta_theta: float
    delta_phi: float


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def phase_shift(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=np.complex128)


def composed_gate(theta: float, phi: float) -> np.ndarray:
    """``rotation(theta) @ phase_shift(phi)``: phase first, then rotation."""
    return rotation(theta) @ phase_shift(phi)


def composed_gates(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Vectorised :func:`composed_gate` over arrays of angles.

    Returns shape ``theta.shape + (2, 2)``.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    e = np.exp(1j * phi)
    out = np.empty(np.broadcast(theta, phi).shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s * e
    out[..., 1, 0] = s
    out[..., 1, 1] = c * e
    return out


def sample_angle_array(spec: NoiseSpec, rng: np.random.Generator, shape=()) -> np.ndarray:
    """Angle errors of shape ``shape + (2,)``; ``[..., 0]`` is the theta
    error and ``[..., 1]`` the phi error.  One fresh draw per entry."""
    return spec.draw(rng, tuple(shape) + (2,))


def sample_angles(spec: NoiseSpec, rng: np.random.Generator) -> AngleSample:
    d_theta, d_phi = sample_angle_array(spec, rng)
    return AngleSample(float(d_theta), float(d_phi))


def noisy_gate(
    ideal_theta: float, ideal_phi: float, spec: NoiseSpec, rng: np.random.Generator
) -> np.ndarray:
    """A freshly perturbed instance of ``composed_gate(theta, phi)``."""
    d = sample_angles(spec, rng)
    return composed_gate(ideal_theta + d.delta_theta, ideal_phi + d.delta_phi)


@dataclass
class DecayResult:
    """Output of :func:`run_hadamard_decay`.

    ``steps`` are the application counts at which the ``|0..0><0..0|`` entry
    was recorded; ``samples[t, k]`` is trial ``t``'s real value at
    ``steps[k]``.
    """

    spec: NoiseSpec
    n: int
    steps: np.ndarray
    samples: np.ndarray
    imag_max: np.ndarray = field(repr=False)

    @property
    def means(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def at(self, step: int) -> np.ndarray:
        (k,) = np.flatnonzero(self.steps == step)
        return self.samples[:, k]


def _apply_single_qubit(rho: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Conjugate a batch of density matrices by per-batch 2x2 ops on qubit
    ``q`` (1-based).  ``rho``: (B, 2^n, 2^n); ``u``: (B, 2, 2)."""
    batch = rho.shape[0]
    left = 2 ** (q - 1)
    right = 2 ** (n - q)
    r = rho.reshape(batch, left, 2, right, left, 2, right)
    r = np.einsum("bij,bajcdke->baicdke", u, r)
    r = np.einsum("baicdke,blk->baicdle", r, u.conj())
    return r.reshape(batch, 2**n, 2**n)


def decay_from_angles(angles: np.ndarray, n: int):
    """Run the decay protocol on pre-drawn angle errors.

    ``angles`` has shape ``(trials, applications, n, 2)``.  Returns
    ``(values, imag)`` arrays of shape ``(trials, applications // 2)``.
    """
    trials, apps = angles.shape[:2]
    dim = 2**n
    rho = np.zeros((trials, dim, dim), dtype=np.complex128)
    rho[:, 0, 0] = 1.0
    theta0, phi0 = HADAMARD_ANGLES
    values = np.empty((trials, apps // 2))
    imag = np.empty((trials, apps // 2))
    for a in range(apps):
        for q in range(1, n + 1):
            u = composed_gates(theta0 + angles[:, a, q - 1, 0], phi0 + angles[:, a, q - 1, 1])
            rho = _apply_single_qubit(rho, u, q, n)
        if a % 2 == 1:
            values[:, a // 2] = rho[:, 0, 0].real
            imag[:, a // 2] = np.abs(rho[:, 0, 0].imag)
    return values, imag


def run_hadamard_decay(
    n: int,
    applications: int,
    trials: int,
    spec: NoiseSpec,
    seed=0,
    threads: int = 1,
    chunk: int = 1000,
) -> DecayResult:
    """Repeatedly apply noisy Hadamards to every qubit of ``|0..0>``.

    One application puts an independently perturbed Hadamard on each of the
    ``n`` qubits.  The ``(1, 1)`` entry is recorded after every even
    application.  Trials are split into chunks of ``chunk`` with one spawned
    random stream each, so the result depends only on ``seed`` and
    ``chunk``, never on ``threads``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if applications < 2 or applications % 2:
        raise ValueError("applications must be a positive even count")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    sizes = chunk_sizes(trials, chunk)
    streams = make_seed_sequence(seed).spawn(len(sizes))

    def work(i):
        rng = np.random.default_rng(streams[i])
        angles = sample_angle_array(spec, rng, (sizes[i], applications, n))
        return decay_from_angles(angles, n)

    parts = run_chunks(work, len(sizes), threads)
    values = np.concatenate([p[0] for p in parts])
    imag = np.concatenate([p[1] for p in parts])
    steps = np.arange(2, applications + 1, 2)
    return DecayResult(spec, n, steps, values, imag.max(axis=0))
