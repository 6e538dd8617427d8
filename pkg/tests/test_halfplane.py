import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadic_paraproducts import halfplane as hp
from dyadic_paraproducts.campaign import C0_QPM_HNU, FORWARD_FACTOR
from dyadic_paraproducts.dyadic_core import DyadicIndex, Tree
from dyadic_paraproducts.paraproducts import composition_gram_closed
from dyadic_paraproducts.symbols import Symbol, generate, nu_table, scale

from conftest import random_pair, symbol_pairs, symbols

ROOT = DyadicIndex(0, 0)
SQ2 = math.sqrt(2)


def positive_symbol(depth, seed):
    b = generate("random", depth, seed=seed)
    return Symbol(depth, np.abs(b.values) + 1e-3)


def internal_nodes(depth):
    return [J for J in Tree(depth).nodes if J.level < depth]


def weighted_gram(H, depth, weight):
    """``G[j, i] = <H_i, H_j>`` in the tile inner product with ``weight``."""
    area = 0.5 * Tree(depth).lengths ** 2
    return H.conj().T @ (H * (area * weight)[:, None])


def leaf_atom(depth=2):
    values = np.zeros(Tree(depth).size)
    values[DyadicIndex(2, 0).index] = 1
    return Symbol(depth, values)


class TestIndicators:
    def test_cube_root_is_all_ones(self):
        np.testing.assert_array_equal(hp.cube(ROOT, 3), np.ones(15))

    def test_signed_cube_leaf_is_zero(self):
        assert not np.any(hp.signed_cube(DyadicIndex(3, 2), 3))

    def test_signed_cube_excludes_own_tile(self):
        J = DyadicIndex(1, 1)
        f = hp.signed_cube(J, 3)
        assert f[J.index] == 0
        assert f[DyadicIndex(2, 2).index] == -1 and f[DyadicIndex(3, 7).index] == 1

    def test_indicator_dispatch(self):
        J = DyadicIndex(1, 0)
        np.testing.assert_array_equal(hp.indicator("cube", J, 2), hp.cube(J, 2))
        with pytest.raises(ValueError):
            hp.indicator("disc", J, 2)
        with pytest.raises(ValueError):
            hp.tile(DyadicIndex(4, 0), 2)

    @pytest.mark.parametrize("depth", [2, 3, 5, 8])
    def test_signed_cube_norm_on_finite_tree(self, depth):
        # the finite tree truncates the cube: ||1_{Q±(J)}||^2 = |J|^2/2 (1 - 2^-(D-l))
        for J in internal_nodes(depth)[:7]:
            expected = J.length / SQ2 * math.sqrt(1 - 2.0 ** -(depth - J.level))
            assert hp.norm(hp.signed_cube(J, depth), depth) == pytest.approx(expected)

    def test_signed_cube_norm_quarter_at_depth2(self):
        # one level of truncation: the value coincides with |J|/2
        J = DyadicIndex(1, 0)
        assert hp.norm(hp.signed_cube(J, 2), 2) == pytest.approx(J.length / 2)

    def test_signed_cube_norm_tends_to_area_value(self):
        J = DyadicIndex(1, 0)
        assert hp.norm(hp.signed_cube(J, 20), 20) == pytest.approx(J.length / SQ2, rel=1e-6)

    def test_normalized_tile_unit_norm(self):
        for I in Tree(3).nodes:
            assert hp.norm(hp.normalized_tile(I, 3), 3) == pytest.approx(1.0)

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            hp.normalized_signed_cube(ROOT, 2, "volume")


class TestMultipliers:
    def test_identity(self):
        f = np.arange(7.0)
        np.testing.assert_array_equal(hp.apply_M(generate("constant", 2), 0, f), f)

    def test_tile_example(self):
        a = generate("random", 2, seed=1)
        I = DyadicIndex(2, 1)
        out = hp.apply_M(a, 0.5, hp.tile(I, 2))
        assert out[I.index] == pytest.approx(0.5 * a[I])
        assert np.count_nonzero(out) == 1

    @given(symbol_pairs(max_depth=3), st.floats(-2, 2), st.floats(-2, 2))
    def test_composition(self, pair, s, t):
        a, c = pair
        f = np.linspace(-1, 1, a.tree.size)
        left = hp.apply_M(a, s, hp.apply_M(c, t, f))
        right = hp.apply_M(a.values * c.values, s + t, f)
        np.testing.assert_allclose(left, right, rtol=1e-10, atol=1e-10)


class TestU:
    @pytest.mark.parametrize("depth", [2, 4])
    def test_tile_to_signed_cube(self, depth):
        for J in internal_nodes(depth):
            np.testing.assert_allclose(
                hp.apply_U(hp.tile(J, depth), "area"), hp.signed_cube(J, depth), atol=1e-14
            )
            np.testing.assert_allclose(
                hp.apply_U(hp.tile(J, depth), "half"), SQ2 * hp.signed_cube(J, depth), atol=1e-14
            )

    def test_leaf_tile_maps_to_zero(self):
        assert not np.any(hp.apply_U(hp.tile(DyadicIndex(3, 4), 3)))

    @given(st.integers(1, 5), st.integers(0, 2**31))
    def test_linear(self, depth, seed):
        rng = np.random.default_rng(seed)
        n = Tree(depth).size
        f, g = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
        np.testing.assert_allclose(hp.apply_U(f + g), hp.apply_U(f) + hp.apply_U(g), atol=1e-12)

    @given(st.integers(1, 5), st.integers(0, 2**31), st.sampled_from(["half", "area"]))
    def test_adjoint(self, depth, seed, convention):
        rng = np.random.default_rng(seed)
        n = Tree(depth).size
        f, g = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
        lhs = hp.inner(hp.apply_U(f, convention), g, depth)
        rhs = hp.inner(f, hp.apply_U_adjoint(g, convention), depth)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestTransplantGram:
    def test_unit_symbols(self, unit_pair):
        G = hp.t_gram_closed(*unit_pair).toarray()
        np.testing.assert_allclose(G[3:7, 0], [2 * SQ2, -2 * SQ2, -2 * SQ2, 2 * SQ2], atol=1e-12)
        np.testing.assert_allclose(hp.t_gram_direct(*unit_pair).toarray(), G, atol=1e-12)

    @pytest.mark.parametrize("depth", [0, 1])
    def test_shallow_trees_vanish(self, depth):
        b, d = random_pair(depth, 2)
        assert not np.any(hp.t_gram_closed(b, d).toarray())
        np.testing.assert_allclose(hp.t_gram_direct(b, d).toarray(), 0, atol=1e-15)

    @given(symbol_pairs(max_depth=5))
    def test_twice_conjugate_paraproduct_gram(self, pair):
        b, d = pair
        P = composition_gram_closed(b, d).toarray()
        T = hp.t_gram_closed(b, d).toarray()
        np.testing.assert_allclose(T, 2 * np.conj(P), atol=1e-12 * max(1.0, np.abs(P).max()))

    @pytest.mark.parametrize("seed", range(3))
    def test_real_symbols_give_factor_two(self, seed):
        b, d = random_pair(4, seed, distribution="normal")
        P = composition_gram_closed(b, d).toarray()
        np.testing.assert_allclose(hp.t_gram_closed(b, d).toarray(), 2 * P, atol=1e-12)

    @given(symbol_pairs(min_depth=2, max_depth=6))
    def test_direct_matches_closed(self, pair):
        b, d = pair
        T = hp.t_gram_closed(b, d).toarray()
        err = np.abs(hp.t_gram_direct(b, d).toarray() - T).max()
        assert err <= 1e-10 * max(np.abs(T).max(), 1e-300)

    def test_area_convention_drops_the_factor(self):
        b, d = random_pair(4, 1)
        T = hp.t_gram_direct(b, d, "area").toarray()
        np.testing.assert_allclose(T, np.conj(composition_gram_closed(b, d).toarray()), atol=1e-12)

    def test_zero_subtree_rows_vanish(self):
        b, d = random_pair(4, 0)
        values = b.values.copy()
        J = DyadicIndex(1, 1)
        mask = hp.cube(J, 4).astype(bool)
        values[mask] = 0
        G = hp.t_gram_direct(Symbol(4, values), d).toarray()
        np.testing.assert_allclose(G[mask], 0, atol=1e-15)

    def test_depth_mismatch(self):
        with pytest.raises(ValueError):
            hp.t_gram_closed(generate("zero", 2), generate("zero", 3))
        with pytest.raises(ValueError):
            hp.t_gram_direct(generate("zero", 2), generate("zero", 3))


class TestWeightedBases:
    @pytest.mark.parametrize("depth", range(0, 7))
    def test_h_mu_orthonormal(self, depth):
        H = np.stack([hp.h_mu(I, depth) for I in Tree(depth).nodes], axis=1)
        gram = weighted_gram(H, depth, hp.mu_weight(depth))
        np.testing.assert_allclose(gram, np.eye(Tree(depth).size), atol=1e-12)

    @pytest.mark.parametrize("depth", range(1, 7))
    def test_H_nu_orthonormal(self, depth):
        b = positive_symbol(depth, depth)
        H = np.stack([hp.weighted_basis(b, "H_nu", J) for J in internal_nodes(depth)], axis=1)
        gram = weighted_gram(H, depth, hp.nu_weight(b))
        np.testing.assert_allclose(gram, np.eye(H.shape[1]), atol=1e-10)

    @given(symbols(min_depth=1, max_depth=4))
    def test_H_nu_mean_zero(self, b):
        b = Symbol(b.depth, np.abs(b.values) + 0.1)
        for J in internal_nodes(b.depth):
            total = hp.inner(hp.H_nu(b, J), hp.cube(J, b.depth), b.depth, hp.nu_weight(b))
            assert abs(total) <= 1e-10

    def test_tree_masses_give_half_identity(self):
        # building H_nu from nu(J±) instead of the cube masses halves the Gram matrix
        depth = 4
        b = positive_symbol(depth, 7)
        t = nu_table(b)
        cols = []
        for J in internal_nodes(depth):
            minus, plus = J.children()
            m_minus, m_plus = t.nu[minus.index], t.nu[plus.index]
            m_tilde = math.sqrt(m_plus * m_minus / (m_plus + m_minus))
            cols.append(m_tilde * (-hp.cube(plus, depth) / m_plus + hp.cube(minus, depth) / m_minus))
        gram = weighted_gram(np.stack(cols, axis=1), depth, hp.nu_weight(b))
        np.testing.assert_allclose(gram, 0.5 * np.eye(len(cols)), atol=1e-12)

    def test_literal_cube_mass_uses_half_nu(self):
        b = positive_symbol(3, 0)
        np.testing.assert_allclose(hp.cube_masses(b), 0.5 * nu_table(b).nu)

    def test_degenerate(self):
        with pytest.raises(hp.DegenerateWeightError):
            hp.H_nu(leaf_atom(), ROOT)
        with pytest.raises(hp.DegenerateWeightError):
            hp.H_nu(generate("constant", 2), DyadicIndex(2, 0))
        with pytest.raises(ValueError):
            hp.weighted_basis(generate("constant", 2), "H_w", ROOT)

    def test_h_mu_dispatch(self):
        np.testing.assert_array_equal(
            hp.weighted_basis(generate("constant", 2), "h_mu", ROOT), hp.h_mu(ROOT, 2)
        )


class TestQpmHnu:
    def test_outside_cases_vanish(self):
        b = positive_symbol(4, 3)
        assert hp.inner_qpm_hnu(b, DyadicIndex(1, 0), DyadicIndex(2, 1)) == pytest.approx(0)
        assert hp.inner_qpm_hnu(b, DyadicIndex(2, 0), DyadicIndex(1, 1)) == pytest.approx(0)
        assert hp.qpm_hnu_case_formula(b, DyadicIndex(1, 0), DyadicIndex(2, 1)) == 0
        assert hp.qpm_hnu_case_formula(b, DyadicIndex(2, 0), DyadicIndex(1, 1)) == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_constant_ratio(self, seed):
        depth = 5
        b = positive_symbol(depth, seed)
        for J in internal_nodes(depth):
            for K in Tree(depth).nodes:
                if not J.strictly_contains(K) or K.level == depth:
                    continue
                ratio = hp.inner_qpm_hnu(b, K, J) / hp.qpm_hnu_case_formula(b, K, J)
                assert ratio == pytest.approx(C0_QPM_HNU, rel=1e-10)
                ratio = hp.inner_qpm_hnu(b, K, J, "area") / hp.qpm_hnu_case_formula(b, K, J)
                assert ratio == pytest.approx(1.0, rel=1e-10)

    def test_diagonal_case(self):
        b = positive_symbol(4, 1)
        J = DyadicIndex(1, 1)
        ratio = hp.inner_qpm_hnu(b, J, J) / hp.qpm_hnu_case_formula(b, J, J)
        assert ratio == pytest.approx(-2 * SQ2)


class TestForwardBackward:
    @pytest.mark.parametrize("depth", range(1, 6))
    def test_forward_identity(self, depth):
        b, d = random_pair(depth, depth)
        for I in Tree(depth).nodes:
            v, _ = hp.forward_testing(b, d, I)
            e = hp.forward_testing_expansion(d, I)
            np.testing.assert_allclose(v, FORWARD_FACTOR * e, atol=1e-12)
            v, _ = hp.forward_testing(b, d, I, "area")
            np.testing.assert_allclose(v, hp.forward_testing_expansion(d, I, "area"), atol=1e-12)

    def test_forward_leaf_and_zero(self):
        b, d = random_pair(3, 1)
        v, n = hp.forward_testing(b, d, DyadicIndex(3, 5))
        assert not np.any(v) and n == 0
        v, n = hp.forward_testing(b, generate("zero", 3), ROOT)
        assert not np.any(v) and n == 0

    def test_backward_atom_example(self):
        assert hp.backward_testing(leaf_atom(), generate("constant", 2), ROOT) == pytest.approx(2.0)

    def test_backward_symmetric_symbol(self):
        d = generate("random", 3, seed=4)
        assert hp.backward_testing(generate("constant", 3), d, ROOT) == pytest.approx(0, abs=1e-12)

    def test_backward_degenerate(self):
        with pytest.raises(hp.DegenerateWeightError):
            hp.backward_testing(generate("zero", 2), generate("constant", 2), ROOT)

    @given(
        symbol_pairs(min_depth=2, max_depth=4),
        st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False),
        st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False),
    )
    def test_backward_homogeneity(self, pair, lam_b, lam_d):
        b, d = pair
        if nu_table(b).nu[0] == 0:
            return
        base = hp.backward_testing(b, d, ROOT)
        got = hp.backward_testing(scale(b, lam_b), scale(d, lam_d), ROOT)
        assert got == pytest.approx(abs(lam_d) ** 2 * abs(lam_b) ** 4 * base, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("convention,factor", [("half", 2.0), ("area", 0.5)])
    def test_backward_vector_norm(self, convention, factor):
        b, d = random_pair(4, 2)
        for I in internal_nodes(4):
            v = hp.backward_testing_vector(b, d, I, convention)
            measured = hp.norm(v, 4, hp.mu_weight(4)) ** 2
            assert measured == pytest.approx(factor * hp.backward_testing(b, d, I), rel=1e-10)


class TestTileJson:
    def test_roundtrip(self):
        f = np.zeros(15, dtype=complex)
        f[[0, 4, 9]] = [1 + 2j, -3, 0.5j]
        obj = hp.tiles_to_json(f)
        assert obj["depth"] == 3 and len(obj["entries"]) == 3
        np.testing.assert_array_equal(hp.tiles_from_json(obj), f)
