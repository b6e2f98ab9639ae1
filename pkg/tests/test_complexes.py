"""Complex construction, discrete operators, norms, and Betti numbers."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, CORPUS_IDS, NAMED, NAMED_IDS, all_degrees, spectrum_of
from hodgeheat import (
    Cochain,
    betti_numbers,
    build_complex,
    coboundary,
    codifferential,
    hodge_laplacian,
    inner_product,
    lp_norm,
    weighted_adjoint,
)
from hodgeheat import library as lib


class TestBuildComplex:
    def test_single_edge(self):
        K = build_complex({"edges": [(0, 1)]})
        assert K.vertex_count == 2
        assert K.n_simplices(1) == 1
        assert K.simplices[1] == ((0, 1),)

    def test_c3_closure_adds_vertices(self):
        K = build_complex({"edges": [(0, 1), (1, 2), (0, 2)]})
        assert K.vertex_count == 3
        assert K.max_degree == 1

    def test_filled_triangle_against_subset_oracle(self):
        # Oracle: the closure of a single triangle is every nonempty subset.
        K = build_complex({"triangles": [(0, 1, 2)]})
        for ell in range(3):
            expected = sorted(itertools.combinations((0, 1, 2), ell + 1))
            assert list(K.simplices[ell]) == expected

    def test_duplicate_simplex_rejected_with_tuple(self):
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            build_complex({"edges": [(0, 1), (1, 0)]})

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError, match="weight"):
            build_complex({"edges": [(0, 1)], "weights": {1: [0.0]}})

    def test_repeated_vertex_rejected(self):
        with pytest.raises(ValueError, match="repeats"):
            build_complex({"edges": [(1, 1)]})

    def test_weights_follow_simplices_through_sorting(self):
        K = build_complex({"edges": [(1, 2), (0, 1)], "weights": {1: [5.0, 7.0]}})
        assert K.simplices[1] == ((0, 1), (1, 2))
        assert list(K.weight_vector(1)) == [7.0, 5.0]

    def test_closure_added_faces_get_unit_weight(self):
        K = build_complex({"triangles": [(0, 1, 2)], "weights": {2: [3.0]}})
        assert list(K.weight_vector(2)) == [3.0]
        assert list(K.weight_vector(1)) == [1.0, 1.0, 1.0]

    @given(st.lists(
        st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5)).filter(
            lambda t: len(set(t)) == 3
        ),
        min_size=1, max_size=8, unique_by=lambda t: tuple(sorted(t)),
    ))
    @settings(max_examples=60, deadline=None)
    def test_closure_property(self, triangles):
        K = build_complex({"triangles": triangles})
        for ell in range(1, K.max_degree + 1):
            lower = set(K.simplices[ell - 1])
            for s in K.simplices[ell]:
                for face in itertools.combinations(s, ell):
                    assert face in lower
        for level in K.simplices:
            assert len(set(level)) == len(level)
        for w in K.weights:
            assert np.all(w > 0)


class TestCoboundary:
    def test_interval_incidence(self):
        D = coboundary(lib.interval(), 0).entries
        assert D.shape == (1, 2)
        assert list(D[0]) == [-1.0, 1.0]

    def test_c3_rows_from_edge_boundaries(self):
        # Oracle: each edge (u, v) has dσ row +1 at v, -1 at u.
        K = lib.cycle_complex(3)
        D = coboundary(K, 0).entries
        for row, (u, v) in enumerate(K.simplices[1]):
            expected = np.zeros(3)
            expected[K.index_of(0, (u,))] = -1.0
            expected[K.index_of(0, (v,))] = 1.0
            assert np.array_equal(D[row], expected)

    @pytest.mark.parametrize("name,K", CORPUS, ids=CORPUS_IDS)
    def test_dd_is_exactly_zero(self, name, K):
        for ell in range(K.max_degree - 1):
            d_lo = coboundary(K, ell).entries
            d_hi = coboundary(K, ell + 1).entries
            assert np.array_equal(d_hi @ d_lo, np.zeros((d_hi.shape[0], d_lo.shape[1])))

    def test_degree_out_of_range(self):
        with pytest.raises(ValueError):
            coboundary(lib.interval(), 1)


class TestCodifferential:
    def test_unit_weights_is_transpose(self):
        K = lib.cycle_complex(4)
        assert np.array_equal(codifferential(K, 1).entries, coboundary(K, 0).entries.T)

    def test_interval_edge_to_vertices(self):
        K = lib.interval()
        out = codifferential(K, 1).apply(Cochain(1, [1.0]))
        assert list(out.values) == [-1.0, 1.0]

    @pytest.mark.parametrize("name,K", NAMED, ids=NAMED_IDS)
    def test_adjointness_100_random_pairs(self, name, K):
        rng = np.random.default_rng(7)
        for ell in range(K.max_degree):
            d = coboundary(K, ell).entries
            delta = codifferential(K, ell + 1).entries
            w_lo, w_hi = K.weight_vector(ell), K.weight_vector(ell + 1)
            U = rng.uniform(-1, 1, size=(len(w_lo), 100))
            V = rng.uniform(-1, 1, size=(len(w_hi), 100))
            lhs = np.einsum("ik,i,ik->k", d @ U, w_hi, V)
            rhs = np.einsum("jk,j,jk->k", U, w_lo, delta @ V)
            scale = max(np.max(np.abs(lhs)), 1.0)
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            codifferential(lib.interval(), 0)


class TestHodgeLaplacian:
    def test_interval_matches_graph_laplacian_oracle(self):
        A = hodge_laplacian(lib.interval(), 0).entries
        assert np.array_equal(A, np.array([[1.0, -1.0], [-1.0, 1.0]]))
        assert np.allclose(np.linalg.eigvalsh(A), [0.0, 2.0])

    def test_c3_eigenvalues_oracle(self):
        A = hodge_laplacian(lib.cycle_complex(3), 0).entries
        oracle = 2.0 * np.eye(3) - (np.ones((3, 3)) - np.eye(3))
        assert np.array_equal(A, oracle)
        assert np.allclose(np.linalg.eigvalsh(A), [0.0, 3.0, 3.0])

    def test_filled_triangle_degree1_is_three_identity(self):
        A = hodge_laplacian(lib.filled_triangle(), 1).entries
        assert np.allclose(A, 3.0 * np.eye(3))

    @pytest.mark.parametrize("name,K", CORPUS, ids=CORPUS_IDS)
    def test_psd_and_weighted_symmetry(self, name, K):
        for ell in all_degrees(K):
            op = hodge_laplacian(K, ell)
            assert op.symmetric
            w = K.weight_vector(ell)
            adj = weighted_adjoint(op.entries, w, w)
            assert np.linalg.norm(op.entries - adj) <= 1e-12 * max(
                np.linalg.norm(op.entries), 1e-300
            )
            sqrt_w = np.sqrt(w)
            sym = (op.entries * sqrt_w[:, None]) / sqrt_w[None, :]
            evals = np.linalg.eigvalsh((sym + sym.T) / 2)
            assert evals.min() >= -1e-10


class TestBetti:
    def test_known_homotopy_types(self):
        assert betti_numbers(lib.cycle_complex(3)) == [1, 1]
        assert betti_numbers(lib.filled_triangle()) == [1, 0, 0]
        assert betti_numbers(lib.simplex_boundary(3)) == [1, 0, 1]
        assert betti_numbers(lib.flat_torus(6, 6)) == [1, 2, 1]

    @pytest.mark.parametrize("name,K", CORPUS, ids=CORPUS_IDS)
    def test_kernel_dimension_matches_betti(self, name, K):
        betti = betti_numbers(K)
        for ell in all_degrees(K):
            s = spectrum_of(name, K, ell)
            assert s.kernel_dim == betti[ell]


class TestLpNorm:
    def test_zero_cochain_all_p(self):
        K = lib.interval()
        zero = K.zero_cochain(0)
        for p in (1, 1.5, 2, 7, math.inf):
            assert lp_norm(K, zero, p) == 0.0

    def test_euclidean_three_four_five(self):
        K = lib.interval()
        assert lp_norm(K, Cochain(0, [3.0, 4.0]), 2) == pytest.approx(5.0, abs=1e-14)

    def test_weighted_l1(self):
        K = build_complex({"vertices": [0, 1], "weights": {0: [2.0, 1.0]}})
        assert lp_norm(K, Cochain(0, [1.0, 1.0]), 1) == pytest.approx(3.0, abs=1e-14)

    def test_p_below_one_rejected(self):
        with pytest.raises(ValueError):
            lp_norm(lib.interval(), Cochain(0, [1.0, 2.0]), 0.5)

    @given(
        st.lists(st.floats(-10, 10), min_size=4, max_size=4),
        st.floats(1.0, 8.0),
        st.floats(0.0, 8.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_holder_consistency(self, values, p, extra):
        K = lib.path_complex(5)
        omega = Cochain(1, values)
        q = p + extra
        total = K.total_weight(1)
        lhs = lp_norm(K, omega, p)
        rhs = total ** (1.0 / p - 1.0 / q) * lp_norm(K, omega, q)
        assert lhs <= rhs * (1 + 1e-10) + 1e-12

    def test_holder_against_sup_norm(self):
        K = lib.path_complex(5)
        rng = np.random.default_rng(3)
        omega = Cochain(1, rng.uniform(-1, 1, 4))
        total = K.total_weight(1)
        for p in (1.0, 2.0, 3.5):
            bound = total ** (1.0 / p) * lp_norm(K, omega, math.inf)
            assert lp_norm(K, omega, p) <= bound * (1 + 1e-12)


class TestOperatorMatrix:
    def test_apply_checks_degree(self):
        K = lib.interval()
        with pytest.raises(ValueError):
            coboundary(K, 0).apply(Cochain(1, [1.0]))

    def test_inner_product_requires_equal_degree(self):
        K = lib.interval()
        with pytest.raises(ValueError):
            inner_product(K, Cochain(0, [1.0, 0.0]), Cochain(1, [1.0]))
