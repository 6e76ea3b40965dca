import numpy as np
import pytest
import scipy.sparse as sp

from oracles import dense_embed, projector_sum_controlled, random_density, random_unitary
from qdm.gatebuild import (
    HADAMARD,
    NOT,
    build_controlled,
    build_gate_block,
    build_gate_kron,
    conjugate_controlled,
    controlled_pairs,
)
from qdm.permgate import apply_swaps, cnot_pairs, toffoli_pairs
from qdm.register import apply_unitary

BUILDERS = [build_gate_kron, build_gate_block]


def exactly_equal(a, b):
    return a.shape == b.shape and (a != b).nnz == 0


def swapped(perm_pairs, dim):
    p = np.eye(dim)
    for a, b in perm_pairs:
        p[[a - 1, b - 1]] = p[[b - 1, a - 1]]
    return p


@pytest.mark.parametrize("build", BUILDERS)
def test_single_qubit_is_u(build):
    np.testing.assert_array_equal(build(HADAMARD, 1, 1).toarray(), HADAMARD)


@pytest.mark.parametrize("build", BUILDERS)
def test_not_embeddings(build):
    np.testing.assert_array_equal(build(NOT, 2, 1).toarray(), swapped([(1, 3), (2, 4)], 4))
    np.testing.assert_array_equal(build(NOT, 2, 2).toarray(), swapped([(1, 2), (3, 4)], 4))


@pytest.mark.parametrize("build", BUILDERS)
def test_against_dense_kron(build, rng):
    u = random_unitary(rng)
    for n in range(1, 6):
        for t in range(1, n + 1):
            np.testing.assert_allclose(build(u, n, t).toarray(), dense_embed(u, n, t), atol=0)


def test_block_small_cases(rng):
    u = random_unitary(rng)
    assert exactly_equal(build_gate_block(u, 3, 3), build_gate_kron(u, 3, 3))
    np.testing.assert_array_equal(build_gate_block(u, 3, 3).toarray(), np.kron(np.eye(4), u))
    np.testing.assert_array_equal(build_gate_block(u, 3, 1).toarray(), np.kron(u, np.eye(4)))


def test_equivalence_exact(rng):
    us = [NOT, HADAMARD] + [random_unitary(rng) for _ in range(3)]
    for n in range(1, 8):
        for t in range(1, n + 1):
            for u in us:
                assert exactly_equal(build_gate_kron(u, n, t), build_gate_block(u, n, t))


@pytest.mark.parametrize("n", range(2, 11))
def test_nnz_law(n):
    for t in range(1, n + 1):
        assert build_gate_kron(HADAMARD, n, t).nnz == 2 ** (n + 1)
        assert build_gate_block(HADAMARD, n, t).nnz == 2 ** (n + 1)


def test_unitarity(rng):
    for n in (4, 7, 10):
        u = random_unitary(rng)
        g = build_gate_block(u, n, n // 2)
        err = (g.conj().T @ g - sp.identity(2**n)).toarray()
        assert np.abs(err).max() < 1e-10


@pytest.mark.parametrize("build", BUILDERS + [lambda u, n, t: build_controlled(u, n, [], t)])
@pytest.mark.parametrize("target", [0, 4])
def test_target_out_of_range(build, target):
    with pytest.raises(ValueError):
        build(HADAMARD, 3, target)


def test_bad_operator_shape():
    with pytest.raises(ValueError):
        build_gate_kron(np.eye(3), 2, 1)


def test_controlled_examples():
    np.testing.assert_array_equal(build_controlled(NOT, 2, [1], 2).toarray(), swapped([(3, 4)], 4))
    tof = build_controlled(NOT, 4, [2, 3], 4).toarray()
    np.testing.assert_array_equal(tof, swapped([(7, 8), (15, 16)], 16))
    assert exactly_equal(build_controlled(HADAMARD, 3, [], 2), build_gate_kron(HADAMARD, 3, 2))


def test_controlled_against_projector_sum(rng):
    u = random_unitary(rng)
    for n, controls, target in [(2, [2], 1), (3, [1, 3], 2), (4, [4], 1), (5, [1, 2, 5], 3)]:
        np.testing.assert_allclose(
            build_controlled(u, n, controls, target).toarray(),
            projector_sum_controlled(u, n, controls, target),
            atol=1e-15,
        )


def test_controlled_identity_rows_exact(rng):
    u = random_unitary(rng)
    n, controls = 5, [2, 4]
    g = build_controlled(u, n, controls, 1).tocsr()
    for i in range(2**n):
        bits = [(i >> (n - q)) & 1 for q in controls]
        if not all(bits):
            row = g.getrow(i)
            assert row.nnz == 1 and row.indices[0] == i and row.data[0] == 1.0


@pytest.mark.parametrize("controls, target", [([2], 2), ([1, 3], 3), ([5], 1)])
def test_controlled_invalid(controls, target):
    with pytest.raises(ValueError):
        build_controlled(NOT, 4, controls, target)


def test_controlled_not_matches_swaps(rng):
    for n in range(2, 7):
        rho = random_density(rng, 2**n)
        c, t = rng.choice(np.arange(1, n + 1), 2, replace=False)
        by_gate = apply_unitary(rho, build_controlled(NOT, n, [c], t))
        np.testing.assert_array_equal(by_gate, apply_swaps(rho, cnot_pairs(n, c, t)))


def test_controlled_pairs_matches_toffoli_swaps():
    a, b = controlled_pairs(4, [2, 3], 4)
    assert list(zip(a + 1, b + 1)) == list(toffoli_pairs(4, 2, 3, 4))


def test_conjugate_controlled_matches_sparse(rng):
    n = 5
    rho = random_density(rng, 2**n)
    for controls, target in [([1], 3), ([2, 5], 4), ([], 2)]:
        u = random_unitary(rng)
        ref = apply_unitary(rho, build_controlled(u, n, controls, target))
        np.testing.assert_allclose(conjugate_controlled(rho, u, n, controls, target), ref, atol=1e-14)


def test_conjugate_controlled_batch_and_inplace(rng):
    n = 3
    rhos = np.stack([random_density(rng, 8) for _ in range(4)])
    us = np.stack([random_unitary(rng) for _ in range(4)])
    expected = np.stack(
        [apply_unitary(r, build_controlled(u, n, [1], 3)) for r, u in zip(rhos, us)]
    )
    work = rhos.copy()
    out = conjugate_controlled(work, us, n, [1], 3, inplace=True)
    assert out is work
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_conjugate_controlled_on_basis_block(rng):
    # a state living on basis {0, 1, 4, 5} of 3 qubits; control 1 never fires
    # on index 0/1 and target 3 pairs 0<->1 and 4<->5
    n = 3
    basis = np.array([0, 1, 4, 5])
    block = random_density(rng, 4)
    full = np.zeros((8, 8), dtype=complex)
    full[np.ix_(basis, basis)] = block
    u = random_unitary(rng)
    ref = apply_unitary(full, build_controlled(u, n, [1], 3))
    got = conjugate_controlled(block, u, n, [1], 3, basis=basis)
    np.testing.assert_allclose(got, ref[np.ix_(basis, basis)], atol=1e-14)
