"""Distances between density matrices and the significance tests used to
compare experiment outcomes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

__all__ = [
    "MetricReport",
    "TestResult",
    "hermitian_eigh",
    "trace_distance",
    "fidelity",
    "anova_one_way",
    "ztest_one_sided",
    "normal_sf",
    "f_sf",
]

HERMITIAN_TOL = 1e-8
PSD_TOL = 1e-8


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    power: Optional[float] = None


@dataclass
class MetricReport:
    trace_distance: float
    fidelity: float
    support: list  # (row, col, complex value), 1-based


def _check_pair(rho, sigma):
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.shape != sigma.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    for m in (rho, sigma):
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("input is not Hermitian")
    return rho, sigma


def hermitian_eigh(a: np.ndarray):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.

    Symmetrises first so roundoff asymmetry does not leak into LAPACK.
    """
    a = np.asarray(a)
    a = (a + a.conj().T) / 2
    return np.linalg.eigh(a)


def trace_distance(rho, sigma) -> float:
    """``0.5 * sum |eig(rho - sigma)|``."""
    rho, sigma = _check_pair(rho, sigma)
    w, _ = hermitian_eigh(rho - sigma)
    return float(0.5 * np.sum(np.abs(w)))


def _purity(m: np.ndarray) -> float:
    # Tr(m^2) for Hermitian m
    return float(np.vdot(m, m).real)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = hermitian_eigh(m)
    if w[0] < -PSD_TOL:
        raise ValueError(f"matrix has eigenvalue {w[0]:.3g} < 0")
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared).

    If either argument is pure the result is ``sqrt(Tr(rho sigma))``, which
    needs no matrix square root.
    """
    rho, sigma = _check_pair(rho, sigma)
    for a, b in ((rho, sigma), (sigma, rho)):
        if abs(_purity(b) - 1) < 1e-12 and abs(np.trace(b).real - 1) < 1e-12:
            overlap = float(np.vdot(b, a).real)  # Tr(b^H a) = Tr(b a)
            if overlap < -PSD_TOL:
                raise ValueError("negative overlap; input is not PSD")
            return min(1.0, math.sqrt(max(overlap, 0.0)))
    root = _psd_sqrt(rho)
    w, _ = hermitian_eigh(root @ sigma @ root)
    if w[0] < -PSD_TOL:
        raise ValueError("input is not PSD")
    return float(np.sum(np.sqrt(np.clip(w, 0, None))))


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2))


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail of the F(d1, d2) distribution via the incomplete beta."""
    if f <= 0:
        return 1.0
    return float(special.betainc(d2 / 2, d1 / 2, d2 / (d2 + d1 * f)))


def anova_one_way(groups: Sequence[Sequence[float]]) -> TestResult:
    groups = [np.asarray(g, dtype=float) for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(g.size < 2 for g in groups):
        raise ValueError("every group needs at least two samples")
    k = len(groups)
    total = sum(g.size for g in groups)
    grand = sum(g.sum() for g in groups) / total
    ss_between = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean()) ** 2).sum() for g in groups)
    if ss_within == 0:
        raise ValueError("zero within-group variance; F is undefined")
    d1, d2 = k - 1, total - k
    f = (ss_between / d1) / (ss_within / d2)
    return TestResult(float(f), f_sf(f, d1, d2))


def ztest_one_sided(sample_a, sample_b, alpha: float = 0.05) -> TestResult:
    """Large-sample z test of ``mean(a) < mean(b)``.

    ``power`` is the normal-approximation power of the test at the observed
    mean difference and level ``alpha``.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 30 or b.size < 30:
        raise ValueError("large-sample z test needs at least 30 values per sample")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    diff = b.mean() - a.mean()
    if se == 0:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    else:
        z = diff / se
    z_alpha = -special.ndtri(alpha)
    power = normal_sf(z_alpha - z) if math.isfinite(z) else float(z > 0)
    return TestResult(float(z), normal_sf(z), float(power))
