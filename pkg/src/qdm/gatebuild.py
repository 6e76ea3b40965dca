"""Full-register sparse gates built from a 2x2 operation.

Two constructions of ``I_(2^(t-1)) (x) U (x) I_(2^(n-t))`` are provided and
kept as separate entry points so they can be timed against each other:

* :func:`build_gate_kron` - Kronecker products with sparse identities.
* :func:`build_gate_block` - four scaled identity blocks concatenated into a
  2x2 block matrix, then block-diagonal doubling once per qubit above the
  target.

Both return CSR matrices with explicit zeros removed, so they compare equal
entry for entry.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np
import scipy.sparse as sp

from qdm.register import check_qubit

__all__ = [
    "NOT",
    "HADAMARD",
    "IDENTITY",
    "as_op",
    "build_gate_kron",
    "build_gate_block",
    "build_controlled",
    "controlled_pairs",
    "conjugate_controlled",
]

NOT = np.array([[0, 1], [1, 0]], dtype=np.complex128)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
IDENTITY = np.eye(2, dtype=np.complex128)


def as_op(u) -> np.ndarray:
    """Coerce a 2x2 operation to a complex128 array."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        raise ValueError(f"single-qubit operation must be 2x2, got {u.shape}")
    return u


def _speye(size: int):
    return sp.identity(size, dtype=np.complex128, format="csr")


def _finish(gate) -> sp.csr_matrix:
    gate = sp.csr_matrix(gate, dtype=np.complex128)
    gate.eliminate_zeros()
    gate.sort_indices()
    return gate


def build_gate_kron(u, n: int, target: int) -> sp.csr_matrix:
    """Embed ``u`` on qubit ``target`` of ``n`` by Kronecker products."""
    u = sp.csr_matrix(as_op(u))
    check_qubit(target, n, "target")
    if n == 1:
        return _finish(u)
    if target == n:
        gate = sp.kron(_speye(2 ** (n - 1)), u)
    elif target == 1:
        gate = sp.kron(u, _speye(2 ** (n - 1)))
    else:
        gate = sp.kron(_speye(2 ** (target - 1)), u)
        gate = sp.kron(gate, _speye(2 ** (n - target)))
    return _finish(gate)


def build_gate_block(u, n: int, target: int) -> sp.csr_matrix:
    """Embed ``u`` on qubit ``target`` of ``n`` by block concatenation."""
    u = as_op(u)
    check_qubit(target, n, "target")
    dims = n - target
    length = 2**dims
    eye = _speye(length)
    upleft = u[0, 0] * eye
    upright = u[0, 1] * eye
    downleft = u[1, 0] * eye
    downright = u[1, 1] * eye
    gate = sp.bmat([[upleft, upright], [downleft, downright]], format="csr")
    for _ in range(2, target + 1):
        # None blocks become empty sparse blocks of the same size.
        gate = sp.bmat([[gate, None], [None, gate]], format="csr")
    return _finish(gate)


def build_controlled(u, n: int, controls: Iterable[int], target: int) -> sp.csr_matrix:
    """Embed ``u`` on ``target``, firing only when every control qubit is 1.

    This is the projector sum ``sum_p P_p (x) I + P_11..1 (x) U``: basis states
    with any control bit 0 get an exact identity row, and the 2x2 block
    ``u`` acts on the target bit of the remaining states.  Entries are written
    directly rather than summed, so the identity rows are exactly 1.
    """
    u = as_op(u)
    controls = sorted(set(controls))
    check_qubit(target, n, "target")
    for c in controls:
        check_qubit(c, n, "control")
    if target in controls:
        raise ValueError(f"target {target} is also a control")
    if not controls:
        return build_gate_kron(u, n, target)

    dim = 2**n
    idx = np.arange(dim)
    cmask = 0
    for c in controls:
        cmask |= 1 << (n - c)
    tbit = 1 << (n - target)
    fires = (idx & cmask) == cmask

    idle = idx[~fires]
    active = idx[fires]
    row_bit = (active & tbit) != 0
    partner = active ^ tbit
    # active row r couples to column r (same target bit) and its partner.
    rows = np.concatenate([idle, active, active])
    cols = np.concatenate([idle, active, partner])
    vals = np.concatenate(
        [
            np.ones(idle.size, dtype=np.complex128),
            np.where(row_bit, u[1, 1], u[0, 0]),
            np.where(row_bit, u[1, 0], u[0, 1]),
        ]
    )
    gate = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
    return _finish(gate)


def controlled_pairs(n: int, controls: Iterable[int], target: int):
    """0-based row indices ``(a, b)`` coupled by a controlled single-qubit
    gate: ``a`` has every control set and target bit 0, ``b = a | target``."""
    controls = sorted(set(controls))
    check_qubit(target, n, "target")
    for c in controls:
        check_qubit(c, n, "control")
    if target in controls:
        raise ValueError(f"target {target} is also a control")
    idx = np.arange(2**n)
    cmask = 0
    for c in controls:
        cmask |= 1 << (n - c)
    tbit = 1 << (n - target)
    a = idx[((idx & cmask) == cmask) & ((idx & tbit) == 0)]
    return a, a | tbit


def conjugate_controlled(
    rho: np.ndarray,
    u: np.ndarray,
    n: int,
    controls,
    target: int,
    basis: np.ndarray | None = None,
    inplace: bool = False,
) -> np.ndarray:
    """``S rho S^dagger`` for ``S = build_controlled(u, n, controls, target)``
    without forming ``S``.

    ``rho`` has shape ``(..., m, m)`` and ``u`` shape ``(..., 2, 2)``;
    leading axes broadcast, so a batch of density matrices can each get
    their own ``u``.  By default ``m = 2^n``.  If ``basis`` (sorted 0-based
    indices) is given, ``rho`` is the block of the full matrix on those
    indices and every row/column outside it must be zero throughout; pairs
    with one end outside ``basis`` then act on zero rows and are skipped.

    Rows and columns not coupled by the gate are left bit for bit.  With
    ``inplace=True`` the caller's complex128 array is updated and returned.
    """
    a, b = controlled_pairs(n, controls, target)
    if basis is not None:
        basis = np.asarray(basis)
        if rho.shape[-1] != basis.size:
            raise ValueError("rho does not match the basis size")
        ia = np.searchsorted(basis, a)
        ib = np.searchsorted(basis, b)
        ia_ok = (ia < basis.size) & (basis[np.minimum(ia, basis.size - 1)] == a)
        ib_ok = (ib < basis.size) & (basis[np.minimum(ib, basis.size - 1)] == b)
        both = ia_ok & ib_ok
        a, b = ia[both], ib[both]
    elif rho.shape[-1] != 2**n:
        raise ValueError(f"rho shape {rho.shape} does not match n={n}")
    if inplace:
        if rho.dtype != np.complex128:
            raise TypeError("in-place update needs a complex128 array")
        out = rho
    else:
        out = np.array(rho, dtype=np.complex128, copy=True)
    if a.size == 0:
        return out
    u = np.asarray(u, dtype=np.complex128)
    u00, u01 = u[..., 0, 0, None, None], u[..., 0, 1, None, None]
    u10, u11 = u[..., 1, 0, None, None], u[..., 1, 1, None, None]
    ra, rb = out[..., a, :], out[..., b, :]
    out[..., a, :] = u00 * ra + u01 * rb
    out[..., b, :] = u10 * ra + u11 * rb
    ca, cb = out[..., :, a], out[..., :, b]
    out[..., :, a] = ca * u00.conj() + cb * u01.conj()
    out[..., :, b] = ca * u10.conj() + cb * u11.conj()
    return out
