import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphtrack.graphcore import EdgeIndexing, degree_map_norm_sq, edge_count
from graphtrack import fileio

import oracles


def test_edge_count():
    assert edge_count(2) == 1
    assert edge_count(3) == 3
    assert edge_count(10) == 45


def test_slot_of_first_and_last_pairs():
    idx = EdgeIndexing(3)
    assert idx.slot_of(0, 1) == 0
    assert idx.slot_of(1, 2) == 2


def test_slot_pair_round_trip_exhaustive():
    idx = EdgeIndexing(10)
    for slot, (i, j) in enumerate(oracles.enumerate_pairs(10)):
        assert idx.slot_of(i, j) == slot
        assert idx.pair_of(slot) == (i, j)
    assert idx.pair_of(idx.slot_of(2, 5)) == (2, 5)


@given(st.integers(2, 40), st.data())
@settings(max_examples=60, deadline=None)
def test_slot_pair_round_trip_property(n, data):
    idx = EdgeIndexing(n)
    i = data.draw(st.integers(0, n - 2))
    j = data.draw(st.integers(i + 1, n - 1))
    assert idx.pair_of(idx.slot_of(i, j)) == (i, j)


def test_slot_of_rejects_bad_pairs():
    idx = EdgeIndexing(4)
    with pytest.raises(ValueError):
        idx.slot_of(2, 2)
    with pytest.raises(ValueError):
        idx.slot_of(3, 1)
    with pytest.raises(ValueError):
        idx.slot_of(0, 4)


def test_min_nodes():
    with pytest.raises(ValueError):
        EdgeIndexing(1)


def test_degrees_triangle_and_empty():
    idx = EdgeIndexing(3)
    assert np.allclose(idx.degrees([1, 1, 1]), [2, 2, 2])
    assert np.allclose(idx.degrees([0, 0, 0]), [0, 0, 0])


def test_degrees_matches_dense_row_sums():
    idx = EdgeIndexing(4)
    rng = np.random.default_rng(0)
    w = rng.uniform(size=idx.r)
    dense = idx.adjacency(w)
    assert np.allclose(idx.degrees(w), dense.sum(axis=1))


def test_degrees_length_mismatch():
    with pytest.raises(ValueError):
        EdgeIndexing(4).degrees(np.ones(5))


def test_degree_adjoint_examples():
    idx = EdgeIndexing(3)
    assert np.allclose(idx.degree_adjoint([1, 0, 0]), [1, 1, 0])
    assert np.allclose(idx.degree_adjoint([1, 1, 1]), [2, 2, 2])


def test_degree_adjoint_matches_dense():
    idx = EdgeIndexing(5)
    rng = np.random.default_rng(1)
    u = rng.standard_normal(5)
    smat = oracles.dense_degree_map(5)
    assert np.allclose(idx.degree_adjoint(u), smat.T @ u)


def test_degree_adjoint_length_mismatch():
    with pytest.raises(ValueError):
        EdgeIndexing(3).degree_adjoint(np.ones(4))


def test_adjointness_inner_products():
    rng = np.random.default_rng(2)
    for n in (3, 5, 8, 12):
        idx = EdgeIndexing(n)
        for _ in range(20):
            w = rng.standard_normal(idx.r)
            u = rng.standard_normal(n)
            lhs = idx.degrees(w) @ u
            rhs = w @ idx.degree_adjoint(u)
            assert abs(lhs - rhs) < 1e-10


def test_laplacian_single_edge():
    lap = EdgeIndexing(2).laplacian([1.0])
    assert np.allclose(lap, [[1, -1], [-1, 1]])


def test_laplacian_rows_sum_to_zero():
    idx = EdgeIndexing(7)
    rng = np.random.default_rng(3)
    w = rng.uniform(size=idx.r)
    assert np.allclose(idx.laplacian(w) @ np.ones(7), 0.0)


def test_laplacian_psd():
    idx = EdgeIndexing(6)
    rng = np.random.default_rng(4)
    for _ in range(10):
        w = rng.uniform(size=idx.r)
        eig = np.linalg.eigvalsh(idx.laplacian(w))
        assert eig.min() >= -1e-10


def test_total_variation_constant_signal():
    idx = EdgeIndexing(5)
    rng = np.random.default_rng(5)
    w = rng.uniform(size=idx.r)
    assert idx.total_variation(w, np.full(5, 3.7)) == pytest.approx(0.0, abs=1e-12)


def test_total_variation_single_edge():
    assert EdgeIndexing(2).total_variation([1.0], [1.0, 0.0]) == pytest.approx(1.0)


def test_total_variation_equals_quadratic_form():
    idx = EdgeIndexing(8)
    rng = np.random.default_rng(6)
    for _ in range(10):
        w = rng.uniform(size=idx.r)
        x = rng.standard_normal(8)
        quad = x @ idx.laplacian(w) @ x
        assert abs(idx.total_variation(w, x) - quad) < 1e-10


def test_operator_norm_identity_power_iteration():
    for n in (3, 7, 20, 35, 50):
        est = oracles.power_iteration_norm_sq(n)
        assert abs(est - degree_map_norm_sq(n)) / degree_map_norm_sq(n) < 1e-6


def test_aggregate_smoothness_identity():
    # sum of per-signal energies == half the entrywise l1 norm of Z*W == z'w
    idx = EdgeIndexing(9)
    rng = np.random.default_rng(7)
    w = rng.uniform(size=idx.r)
    signals = rng.standard_normal((25, 9))
    total = sum(idx.total_variation(w, x) for x in signals)

    dissim = np.zeros((9, 9))
    for i in range(9):
        for j in range(9):
            dissim[i, j] = np.sum((signals[:, i] - signals[:, j]) ** 2)
    hadamard = 0.5 * np.abs(dissim * idx.adjacency(w)).sum()
    z = dissim[np.triu_indices(9, k=1)]
    assert abs(total - hadamard) < 1e-8 * max(1.0, abs(total))
    assert abs(total - z @ w) < 1e-8 * max(1.0, abs(total))


def test_edge_csv_round_trip(tmp_path):
    idx = EdgeIndexing(6)
    rng = np.random.default_rng(8)
    w = rng.uniform(size=idx.r)
    w[rng.uniform(size=idx.r) < 0.5] = 0.0
    path = tmp_path / "edges.csv"
    fileio.write_edge_csv(path, idx, w)
    w_back, idx_back = fileio.read_edge_csv(path, n=6)
    assert idx_back.n == 6
    assert np.array_equal(w, w_back)


def test_edge_csv_rejects_bad_order(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("i,j,weight\n2,1,0.5\n")
    with pytest.raises(ValueError):
        fileio.read_edge_csv(path)


def test_signal_csv_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    signals = rng.standard_normal((11, 4))
    path = tmp_path / "signals.csv"
    fileio.write_signal_csv(path, signals)
    assert np.array_equal(fileio.read_signal_csv(path), signals)
