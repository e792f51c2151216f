import numpy as np
import pytest

from graphtv import graphs as G
from graphtv import spectral as S


def dense_laplacian(g):
    D = G.incidence(g)
    return (D.T @ D).toarray()


class TestPathEigenpairs:
    def test_two_point_spectrum(self):
        lam, _ = S.path_eigenpairs(2)
        assert np.allclose(sorted(lam), [0.0, 2.0])

    def test_zero_mode(self):
        for N in (2, 5, 9):
            lam, V = S.path_eigenpairs(N)
            assert lam[0] == 0.0
            assert np.allclose(V[:, 0], 1.0 / np.sqrt(N))

    def test_diagonalizes_tridiagonal(self):
        N = 16
        lam, V = S.path_eigenpairs(N)
        L = dense_laplacian(G.build_path(N))
        assert np.max(np.abs(L @ V - V * lam[None, :])) <= 1e-9
        assert np.max(np.abs(V.T @ V - np.eye(N))) <= 1e-12


class TestCirculantEigenvalues:
    def test_cycle_four(self):
        vals = S.circulant_eigenvalues(4, 1)
        # dense oracle: eigensolve of the C4 Laplacian
        oracle = np.linalg.eigvalsh(dense_laplacian(G.build_cycle_power(4, 1)))
        assert np.allclose(sorted(vals), oracle, atol=1e-12)
        assert np.allclose(sorted(vals), [0, 2, 2, 4])

    def test_zero_mode(self):
        for n, k in [(5, 1), (8, 3), (12, 5)]:
            assert S.circulant_eigenvalues(n, k)[0] == 0.0

    def test_matches_dense_eigensolve(self):
        for n, k in [(6, 2), (9, 2), (10, 4)]:
            vals = np.sort(S.circulant_eigenvalues(n, k))
            oracle = np.linalg.eigvalsh(dense_laplacian(G.build_cycle_power(n, k)))
            assert np.max(np.abs(vals - oracle)) <= 1e-9


class TestPseudoinverse:
    def test_star_explicit_entries(self):
        # proof-level closed form: s[i, j] = -(n-1)/n on the leaf of edge j,
        # 1/n elsewhere
        for n in (3, 6, 11):
            Sm = S.pseudoinverse_columns_dense(G.incidence(G.build_star(n)))
            expected = np.full((n, n - 1), 1.0 / n)
            for j in range(n - 1):
                expected[j + 1, j] = -(n - 1) / n
            assert np.max(np.abs(Sm - expected)) <= 1e-10

    def test_augmented_path_is_cumsum(self):
        Dt = G.build_augmented_path(6)
        Sm = S.pseudoinverse_columns_dense(Dt)
        assert np.max(np.abs(Sm - np.tril(np.ones((6, 6))))) <= 1e-10

    def test_k3_column_norms(self):
        Sm = S.pseudoinverse_columns_dense(G.incidence(G.build_complete(3)))
        norms = np.linalg.norm(Sm, axis=0)
        assert np.allclose(norms, np.sqrt(2.0) / 3.0, atol=1e-12)

    def test_moore_penrose_identity(self):
        for g in (G.build_path(7), G.build_star(6), G.build_grid(2, 3)):
            D = G.incidence(g).toarray()
            Sm = S.pseudoinverse_columns_dense(D)
            assert np.max(np.abs(D @ Sm @ D - D)) <= 1e-8

    def test_columns_orthogonal_to_ones(self):
        for g in (G.build_complete(6), G.build_cycle_power(8, 2)):
            Sm = S.pseudoinverse_columns_dense(G.incidence(g))
            assert np.max(np.abs(Sm.T @ np.ones(g.n))) <= 1e-9

    def test_size_cap(self):
        with pytest.raises(ValueError, match="structured"):
            S.pseudoinverse_columns_dense(G.incidence(G.build_path(10)), size_cap=5)


def _rho_independent(g):
    """Independent route: per-column minimum-norm normal-equations solve."""
    D = G.incidence(g).toarray()
    L = D.T @ D
    best = 0.0
    for j in range(D.shape[0]):
        s, *_ = np.linalg.lstsq(L, D[j], rcond=None)
        best = max(best, float(np.linalg.norm(s)))
    return best


class TestRho:
    def test_star_closed_form(self):
        for n in (3, 10, 25):
            rho = S.rho_dense(G.incidence(G.build_star(n)))
            assert abs(rho - np.sqrt((n * n - n) / n**2)) <= 1e-10

    def test_augmented_path_sqrt_n(self):
        for N in (2, 5, 20):
            rho = S.rho_dense(G.build_augmented_path(N))
            assert abs(rho - np.sqrt(N)) <= 1e-10

    def test_complete_sqrt2_over_n(self):
        for n in (3, 8, 20):
            rho = S.rho_dense(G.incidence(G.build_complete(n)))
            assert abs(rho * n - np.sqrt(2.0)) <= 1e-9

    @pytest.mark.parametrize("g", [
        G.build_path(9), G.build_grid(2, 4), G.build_star(12),
        G.build_cycle_power(10, 3), G.build_erdos_renyi(16, 0.3, seed=1),
    ], ids=lambda g: g.family)
    def test_dense_matches_independent_route(self, g):
        assert abs(S.rho_dense(G.incidence(g)) - _rho_independent(g)) <= 1e-7

    def test_gram_route_matches(self):
        for g in (G.build_grid(2, 5), G.build_erdos_renyi(25, 0.25, seed=2)):
            a = S.rho_dense(G.incidence(g))
            b = S.rho_dense_gram(g)
            assert abs(a - b) <= 1e-10

    @pytest.mark.parametrize("N", [2, 3, 4, 6, 8])
    def test_structured_matches_dense_2d(self, N):
        dense = S.rho_dense(G.incidence(G.build_grid(2, N)))
        structured = S.rho_structured_grid(2, N)
        assert abs(dense - structured) <= 1e-8

    def test_structured_matches_dense_3d(self):
        dense = S.rho_dense(G.incidence(G.build_grid(3, 3)))
        assert abs(dense - S.rho_structured_grid(3, 3)) <= 1e-8

    def test_structured_one_dimensional(self):
        dense = S.rho_dense(G.incidence(G.build_path(12)))
        assert abs(dense - S.rho_structured_grid(1, 12)) <= 1e-10

    def test_hypercube_bounded_by_one(self):
        for d in range(1, 11):
            assert S.rho_structured_grid(d, 2) <= 1.0 + 1e-12

    def test_spectral_gap_bound_holds(self):
        for g in (G.build_path(8), G.build_grid(2, 4), G.build_complete(9),
                  G.build_star(9), G.build_cycle_power(9, 2),
                  G.build_random_regular(12, 3, seed=5)):
            D = G.incidence(g)
            rho = S.rho_dense(D)
            lam2, bound = S.spectral_gap(D)
            assert rho <= bound + 1e-9


class TestKappa:
    def test_empty_set_convention(self):
        assert S.kappa_lower_bound(5, 0) == 1.0
        assert S.kappa_exact_bruteforce(G.incidence(G.build_path(4)), []) == 1.0

    def test_lower_bound_values(self):
        assert S.kappa_lower_bound(4, 100) == pytest.approx(0.25)
        assert S.kappa_lower_bound(9, 4) == pytest.approx(0.25)

    def test_single_edge(self):
        D = G.incidence(G.build_grid(2, 3))
        for e in (0, 3, 7):
            assert S.kappa_exact_bruteforce(D, [e]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)

    def test_path3_both_edges(self):
        D = G.incidence(G.build_path(3))
        # 4 sign patterns; the worst is (+1, -1) giving ||(1,-2,1)|| = sqrt(6)
        assert S.kappa_exact_bruteforce(D, [0, 1]) == pytest.approx(1 / np.sqrt(3), abs=1e-12)

    def test_exact_dominates_lower_bound_random_pairs(self):
        rng = np.random.default_rng(2024)
        graphs = [G.build_path(10), G.build_grid(2, 4), G.build_star(12),
                  G.build_complete(7), G.build_cycle_power(10, 2),
                  G.build_erdos_renyi(14, 0.35, seed=8)]
        checked = 0
        while checked < 100:
            g = graphs[int(rng.integers(len(graphs)))]
            D = G.incidence(g)
            t = int(rng.integers(1, 13))
            T = rng.choice(g.m, size=min(t, g.m), replace=False)
            exact = S.kappa_exact_bruteforce(D, T)
            bound = S.kappa_lower_bound(G.max_degree(g), len(T))
            assert exact >= bound - 1e-12
            checked += 1

    def test_duplicate_edges_collapse(self):
        D = G.incidence(G.build_path(3))
        assert S.kappa_exact_bruteforce(D, [0, 1, 1, 0]) == \
            S.kappa_exact_bruteforce(D, [0, 1])

    def test_size_cap(self):
        D = G.incidence(G.build_complete(10))
        with pytest.raises(ValueError):
            S.kappa_exact_bruteforce(D, list(range(21)))


class TestSpectralGap:
    def test_complete(self):
        lam2, _ = S.spectral_gap(G.incidence(G.build_complete(7)))
        assert lam2 == pytest.approx(7.0, abs=1e-9)

    def test_two_point_path(self):
        lam2, _ = S.spectral_gap(G.incidence(G.build_path(2)))
        assert lam2 == pytest.approx(2.0, abs=1e-12)

    def test_cycle_six(self):
        lam2, _ = S.spectral_gap(G.incidence(G.build_cycle_power(6, 1)))
        # circulant formula at m=1, k=1
        assert lam2 == pytest.approx(2 - 2 * np.cos(2 * np.pi / 6), abs=1e-9)


class TestReports:
    def test_dense_report_fields(self):
        rep = S.spectral_report(G.build_star(10))
        assert rep.graph_n == 10 and rep.graph_m == 9
        assert rep.rho == pytest.approx(np.sqrt(0.9), abs=1e-10)
        assert rep.rho_method == "dense_pseudoinverse"
        assert rep.eigenvalues is not None
        assert abs(rep.eigenvalues[0]) <= 1e-9  # Laplacian kernel
        assert rep.spectral_gap > 0
        d = rep.to_json_dict()
        assert set(d) == {"n", "m", "rho", "rho_method", "lambda2",
                          "kappa_lower_bound", "family"}

    def test_structured_report(self):
        rep = S.spectral_report(G.build_grid(2, 8), method="structured")
        assert rep.rho_method == "eigensum_structured"
        dense = S.spectral_report(G.build_grid(2, 8), method="dense")
        assert rep.rho == pytest.approx(dense.rho, abs=1e-8)
        assert rep.spectral_gap == pytest.approx(dense.spectral_gap, abs=1e-9)

    def test_structured_rejects_other_families(self):
        with pytest.raises(ValueError, match="structured"):
            S.spectral_report(G.build_star(5), method="structured")
