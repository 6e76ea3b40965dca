import itertools

import numpy as np
import pytest

from qdm.multiplier import (
    A0,
    A1,
    A2,
    A3,
    DEFAULT_INPUT,
    DEFAULT_OUTPUT,
    REFERENCE_CIRCUIT,
    W,
    X,
    Y,
    Z,
    CircuitFormatError,
    GateSpec,
    UnverifiedCircuitError,
    canonical_form,
    default_pool,
    expected_target_probability,
    format_circuit,
    multiplier_truth_table,
    parse_circuit,
    read_circuit,
    run_noisy_multiplier,
    search_circuits,
    simulate_classical,
    verify_multiplier,
    write_circuit,
)
from qdm.noise import NoiseSpec

TINY = NoiseSpec.gaussian(1e-24)
NOISY = NoiseSpec.gaussian(0.1)

REFERENCE_TEXT = """\
TOFFOLI Y Z A0
TOFFOLI X Z A1
TOFFOLI Y W A1
TOFFOLI X W A2
TOFFOLI A0 A2 A3
CNOT A3 A2
"""


def test_truth_table():
    t = multiplier_truth_table()
    assert len(t) == 16
    assert t[(1, 1, 0, 1)] == (1, 1, 0, 0)
    assert t[(1, 1, 1, 1)] == (1, 0, 0, 1)
    assert t[(0, 0, 0, 0)] == (0, 0, 0, 0)
    for (x, y, w, z), bits in t.items():
        assert sum(b << k for k, b in enumerate(bits)) == (2 * x + y) * (2 * w + z)


def test_default_indices():
    assert DEFAULT_INPUT == 225 and DEFAULT_OUTPUT == 237


def test_simulate_classical():
    # x=1 y=1 z=1 w=0: 3 * 1 = 3 -> A0 = A1 = 1
    assert simulate_classical(REFERENCE_CIRCUIT, (1, 1, 1, 0, 0, 0, 0, 0)) == (1, 1, 1, 0, 1, 1, 0, 0)
    # 3 * 3 = 9 -> A0 = A3 = 1
    assert simulate_classical(REFERENCE_CIRCUIT, (1, 1, 1, 1, 0, 0, 0, 0)) == (1, 1, 1, 1, 1, 0, 0, 1)
    assert simulate_classical((), (0,) * 8) == (0,) * 8
    with pytest.raises(ValueError):
        simulate_classical(REFERENCE_CIRCUIT, (0,) * 4)


def test_verify():
    assert verify_multiplier(REFERENCE_CIRCUIT)
    assert not verify_multiplier(REFERENCE_CIRCUIT[:-1])
    assert not verify_multiplier(())


def test_gate_spec_validation():
    assert GateSpec.toffoli(Z, Y, A0).controls == (Y, Z)
    for bad in [("CNOT", (1, 2), 5), ("TOFFOLI", (1,), 5), ("CNOT", (5,), 5), ("SWAP", (1,), 2), ("CNOT", (0,), 5)]:
        with pytest.raises(ValueError):
            GateSpec(*bad)


def test_canonical_form():
    g1, g2 = GateSpec.toffoli(X, W, A2), GateSpec.toffoli(Y, Z, A0)
    # disjoint, so either order gives the same class
    assert canonical_form([g1, g2]) == canonical_form([g2, g1]) == (g2, g1)
    # overlapping gates keep their order
    h1, h2 = GateSpec.toffoli(A0, A2, A3), GateSpec.cnot(A3, A2)
    assert canonical_form([h1, h2]) == (h1, h2)
    assert canonical_form(canonical_form(REFERENCE_CIRCUIT)) == canonical_form(REFERENCE_CIRCUIT)
    assert verify_multiplier(canonical_form(REFERENCE_CIRCUIT))


def test_pool_targets_ancillae():
    pool = default_pool()
    assert len(pool) == len(set(pool)) == 4 * (21 + 7)
    assert all(g.target in (A0, A1, A2, A3) for g in pool)


def test_search_too_short():
    assert search_circuits(1) == []
    assert search_circuits(5) == []


def test_search_six():
    found = search_circuits(6)
    assert found
    assert canonical_form(REFERENCE_CIRCUIT) in found
    assert all(verify_multiplier(c) and len(c) == 6 for c in found)
    assert found == sorted(found) and len(set(found)) == len(found)
    assert all(canonical_form(c) == c for c in found)


def test_search_raw_results_verify():
    raw = search_circuits(6, dedup=False)
    assert all(verify_multiplier(c) for c in raw)
    assert {canonical_form(c) for c in raw} == set(search_circuits(6))


def test_search_invalid():
    with pytest.raises(ValueError):
        search_circuits(0)
    with pytest.raises(ValueError):
        search_circuits(3, pool=[GateSpec.cnot(A0, X)])


def test_parse_and_format_round_trip(tmp_path):
    assert parse_circuit(REFERENCE_TEXT) == REFERENCE_CIRCUIT
    assert format_circuit(REFERENCE_CIRCUIT) == REFERENCE_TEXT
    path = tmp_path / "ref.txt"
    write_circuit(path, REFERENCE_CIRCUIT, comment="reference\nsix gates")
    assert path.read_text().startswith("# reference\n# six gates\n")
    assert read_circuit(path) == REFERENCE_CIRCUIT


def test_parse_comments_and_case():
    text = "# header\n\ncnot a3 a2  # trailing\n"
    assert parse_circuit(text) == (GateSpec.cnot(A3, A2),)


@pytest.mark.parametrize(
    "text, line",
    [
        ("TOFFOLI Y Z A0\nFOO X A0\n", 2),
        ("CNOT X B7\n", 1),
        ("\n\nCNOT X Y Z\n", 3),
        ("TOFFOLI X X A1\n", 1),
        ("CNOT\n", 1),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(CircuitFormatError) as info:
        parse_circuit(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_noise_free_limit():
    res = run_noisy_multiplier(REFERENCE_CIRCUIT, TINY, 20)
    assert res.ideal_index == DEFAULT_OUTPUT
    assert res.entry(237, 237) == pytest.approx(1, abs=1e-12)
    assert res.report.trace_distance == pytest.approx(0, abs=1e-9)
    assert res.report.fidelity == pytest.approx(1, abs=1e-9)


def test_engines_agree():
    a = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 12, seed=5, engine="sparse")
    b = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 12, seed=5, engine="subspace")
    np.testing.assert_allclose(a.mean_rho, b.mean_rho, atol=1e-14)
    np.testing.assert_allclose(a.diagonal_samples, b.diagonal_samples, atol=1e-14)


def test_sparse_engine_properties():
    res = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 30, seed=2, engine="sparse")
    rho = res.mean_rho
    assert abs(np.trace(rho) - 1) < 1e-8
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    mask = np.ones(rho.shape, bool)
    idx = np.array(res.support) - 1
    mask[np.ix_(idx, idx)] = False
    assert np.abs(rho[mask]).max() <= 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-10


def test_support_and_ideal():
    res = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 10, seed=0)
    assert res.support == (225, 229, 233, 237)
    # column-major over the support
    assert [(r, c) for r, c, _ in res.report.support[:5]] == [(225, 225), (229, 225), (233, 225), (237, 225), (225, 229)]


def test_error_grows_with_noise():
    small = run_noisy_multiplier(REFERENCE_CIRCUIT, NoiseSpec.gaussian(0.01), 2000, seed=1)
    big = run_noisy_multiplier(REFERENCE_CIRCUIT, NoiseSpec.gaussian(0.1), 2000, seed=1)
    assert small.report.trace_distance < big.report.trace_distance
    assert small.report.fidelity > big.report.fidelity


def test_diagonal_dominance():
    res = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 2000, seed=4)
    p = res.entry(237, 237).real
    assert p > 0.5
    others = [res.entry(i, i).real for i in res.support if i != 237]
    assert p > max(others)
    assert p == pytest.approx(expected_target_probability(0.1, 2), abs=0.02)


def test_determinism_and_threads():
    a = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 1200, seed=9, chunk=500)
    b = run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 1200, seed=9, chunk=500, threads=3)
    np.testing.assert_array_equal(a.mean_rho, b.mean_rho)
    np.testing.assert_array_equal(a.diagonal_samples, b.diagonal_samples)
    assert a.diagonal_samples.shape == (1200, 4)
    np.testing.assert_allclose(a.target_samples.mean(), a.entry(237, 237).real, atol=1e-12)


def test_rejects_bad_input():
    with pytest.raises(UnverifiedCircuitError):
        run_noisy_multiplier(REFERENCE_CIRCUIT[:-1], NOISY, 5)
    with pytest.raises(ValueError):
        run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 0)
    with pytest.raises(ValueError):
        run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 5, engine="gpu")
    with pytest.raises(ValueError):
        run_noisy_multiplier(REFERENCE_CIRCUIT, NOISY, 5, input_index=257)


def test_all_inputs_reach_ideal_in_noise_free_limit():
    for bits in itertools.product((0, 1), repeat=4):
        idx = int("".join(map(str, bits)) + "0000", 2) + 1
        res = run_noisy_multiplier(REFERENCE_CIRCUIT, TINY, 2, input_index=idx)
        assert res.entry(res.ideal_index, res.ideal_index) == pytest.approx(1, abs=1e-12)
