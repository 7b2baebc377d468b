import numpy as np
import pytest
from scipy import special
from hypothesis import given, settings, strategies as st

from convexp import kernels as kn
from convexp import spectral as sp
from convexp.field import NumericalDomainError, delta, fft
from convexp.lift import bipartite_block_matrix, dense_expm, lift, unlift

from conftest import crandn

EPS = 1e-6


def central_difference(fn, K, a):
    e = np.zeros(K.shape)
    e[a] = EPS
    return (fn(K + e) - fn(K - e)) / (2 * EPS)


class TestConv:
    def test_delta_identity(self, rng):
        f = crandn(rng, (5, 4))
        np.testing.assert_allclose(sp.conv(delta((5, 4)), f), f, atol=1e-15)

    def test_laplacian_kills_constants(self):
        L = kn.builtin_kernel("laplacian2d", (8, 8))
        assert np.max(np.abs(sp.conv(L, np.full((8, 8), 3.0)))) <= 1e-14

    def test_matches_wrapped_sum_7(self, rng):
        K, f = crandn(rng, 7), crandn(rng, 7)
        direct = np.array([sum(K[j] * f[(x - j) % 7] for j in range(7)) for x in range(7)])
        np.testing.assert_allclose(sp.conv(K, f), direct, rtol=0, atol=1e-12 * np.max(np.abs(direct)))
        np.testing.assert_allclose(sp.conv_direct(K, f), direct, rtol=0, atol=1e-12 * np.max(np.abs(direct)))

    def test_orientation(self):
        # K[+1] pulls from the left neighbour
        K = kn.embed(kn.KernelCore({(1,): 1.0}), (5,))
        f = np.arange(5.0)
        np.testing.assert_allclose(sp.conv(K, f).real, np.roll(f, 1), atol=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            sp.conv(np.zeros(4), np.zeros(5))

    def test_spectral_kernel_apply(self, rng):
        K, f = crandn(rng, (6, 6)), crandn(rng, (6, 6))
        S = sp.SpectralKernel.of(K)
        np.testing.assert_allclose(S.apply(f), sp.conv_direct(K, f), atol=1e-12)
        np.testing.assert_allclose(S.kernel(), K, atol=1e-14)


class TestAnalytic:
    def test_exp_zero_is_delta(self):
        np.testing.assert_array_equal(sp.conv_exp(np.zeros((4, 4))), delta((4, 4)))

    def test_heat_kernel_second_moment(self):
        L = kn.builtin_kernel("laplacian2d", (64, 64))
        G = sp.conv_exp(L, 4.0)
        np.testing.assert_allclose(sp.second_moments(G).real, [8.0, 8.0], rtol=0, atol=1e-6)
        assert abs(G.sum() - 1) <= 1e-12

    def test_heat_kernel_against_dense_oracle_8x8(self):
        L = kn.builtin_kernel("laplacian2d", (8, 8))
        dense = dense_expm(lift(L), 4.0)
        np.testing.assert_allclose(sp.conv_exp(L, 4.0), unlift(dense, (8, 8)), rtol=0, atol=1e-12)

    def test_exp_i_pi(self):
        np.testing.assert_allclose(sp.conv_exp(1j * np.pi * delta(6)), -delta(6), atol=1e-15)

    def test_user_function(self):
        K = kn.random_real((5,), seed=3)
        # g(z) = z^2 + 1 corresponds to conv(K, K) + delta
        got = sp.apply_analytic(K, lambda z: z**2 + 1)
        np.testing.assert_allclose(got, sp.conv_direct(K, K) + delta(5), atol=1e-13)

    def test_overflow_is_numerical_error(self):
        with pytest.raises(NumericalDomainError):
            sp.conv_exp(1e4 * delta(8))

    def test_translation_generator(self):
        # exp(3 D) with D = (-1/2, 0, 1/2) moves a delta's centre of mass to +3.
        # The discrete kernel is the Bessel sequence J_n(3); its peak is at n = 2, not 3.
        D = kn.embed(kn.CENTRAL_DIFF_1D, (64,))
        out = sp.conv(sp.conv_exp(D, 3.0), delta(64)).real
        assert abs(out.sum() - 1) <= 1e-6
        assert abs(sp.first_moments(out)[0].real - 3.0) <= 1e-6
        n = kn.offsets((64,))[0]
        np.testing.assert_allclose(out, special.jv(n, 3.0), rtol=0, atol=1e-12)
        assert int(np.argmax(out[:32])) == 2
        np.testing.assert_allclose(out, unlift(dense_expm(lift(D), 3.0), (64,)).real, atol=1e-12)


class TestGroupLaws:
    def test_one_parameter_group_16(self, rng):
        K = crandn(rng, 16, 0.3)
        lhs = sp.conv(sp.conv_exp(K, 0.4), sp.conv_exp(K, 1.1))
        assert np.max(np.abs(lhs - sp.conv_exp(K, 1.5))) <= 1e-12

    def test_unitary_preserves_norm_12x12(self, rng):
        K = kn.random_anti_hermitian((12, 12), seed=5)
        f = crandn(rng, (12, 12))
        out = sp.conv(sp.conv_exp(K), f)
        assert abs(np.linalg.norm(out) / np.linalg.norm(f) - 1) <= 1e-10

    def test_unitary_multipliers(self):
        K = kn.random_anti_hermitian((20, 20), seed=6)
        assert np.max(np.abs(np.abs(fft(sp.conv_exp(K, 2.5))) - 1)) <= 1e-12

    def test_inverse(self):
        K = kn.random_anti_hermitian((9, 7), seed=7)
        out = sp.conv(sp.conv_exp(K, 2.0), sp.conv_exp(K, -2.0))
        assert np.max(np.abs(out - delta(K.shape))) <= 1e-11


def scaled_err(got, want):
    """Max error measured against max(1, |want|); exp of a general kernel can grow."""
    return np.max(np.abs(got - want)) / max(1.0, float(np.max(np.abs(want))))


@settings(max_examples=30, deadline=None)
@given(
    shape=st.lists(st.integers(1, 8), min_size=1, max_size=2).map(tuple),
    seed=st.integers(0, 2**32 - 1),
    s=st.floats(-2, 2),
    t=st.floats(-2, 2),
)
def test_exp_laws(shape, seed, s, t):
    rng = np.random.default_rng(seed)
    K1, K2 = crandn(rng, shape, 0.3), crandn(rng, shape, 0.3)
    d = delta(shape)
    add = sp.conv(sp.conv_exp(K1, s), sp.conv_exp(K1, t))
    assert scaled_err(add, sp.conv_exp(K1, s + t)) <= 1e-11
    hom = sp.conv(sp.conv_exp(K1), sp.conv_exp(K2))
    assert scaled_err(hom, sp.conv_exp(K1 + K2)) <= 1e-11
    A = kn.anti_hermitian_from_real(rng.standard_normal(shape))
    assert np.max(np.abs(sp.conv(sp.conv_exp(A, t), sp.conv_exp(A, -t)) - d)) <= 1e-11
    # cos/sin of a complex multiplier grow like cosh(Im); the sum cancels that growth
    U = 0.3 * rng.standard_normal(shape)
    c, sn = sp.conv_cos(U, t), sp.conv_sin(U, t)
    cc = sp.conv(c, c)
    assert np.max(np.abs(cc + sp.conv(sn, sn) - d)) <= 1e-12 * max(1.0, float(np.max(np.abs(cc))))


class TestTrig:
    def test_zero(self):
        np.testing.assert_array_equal(sp.conv_cos(np.zeros(5)), delta(5))
        np.testing.assert_array_equal(sp.conv_sin(np.zeros(5)), np.zeros(5))

    def test_scaled_delta_is_rotation(self):
        theta = 0.7
        K = theta * delta((4, 4))
        np.testing.assert_allclose(sp.conv_cos(K), np.cos(theta) * delta((4, 4)), atol=1e-15)
        np.testing.assert_allclose(sp.conv_sin(K), np.sin(theta) * delta((4, 4)), atol=1e-15)

    def test_pythagorean_random_real(self):
        K = kn.random_real((16,), seed=11)
        c, s = sp.conv_cos(K), sp.conv_sin(K)
        assert np.max(np.abs(sp.conv(c, c) + sp.conv(s, s) - delta(16))) <= 1e-12


class TestDerivatives:
    def test_zero_kernel_gives_shifted_delta(self):
        np.testing.assert_allclose(sp.deriv_exp_kernel(np.zeros(8), 2), delta(8, at=(2,)), atol=1e-15)

    def test_zero_shift_is_exp(self, rng):
        K = crandn(rng, 10, 0.3)
        np.testing.assert_array_equal(sp.deriv_exp_kernel(K, 0), sp.conv_exp(K))

    @pytest.mark.parametrize("seed", range(3))
    def test_exp_matches_finite_differences(self, seed):
        K = kn.random_complex((16,), seed=seed, scale=0.3)
        for a in range(16):
            fd = central_difference(sp.conv_exp, K, (a,))
            assert np.max(np.abs(fd - sp.deriv_exp_kernel(K, a))) <= 1e-6

    def test_exp_2d_and_time(self):
        K = kn.random_anti_hermitian((5, 4), seed=3)
        t = 1.7
        for a in [(0, 0), (1, 3), (4, 2)]:
            fd = central_difference(lambda k: sp.conv_exp(k, t), K, a)
            assert np.max(np.abs(fd - sp.deriv_exp_kernel(K, a, t))) <= 1e-6

    def test_trig_at_zero(self):
        dcos, dsin = sp.deriv_trig_kernels(np.zeros(6), 0)
        np.testing.assert_allclose(dsin, delta(6), atol=1e-15)
        np.testing.assert_allclose(dcos, np.zeros(6), atol=1e-15)

    @pytest.mark.parametrize("seed", range(3))
    def test_trig_match_finite_differences(self, seed):
        K = kn.random_real((12,), seed=seed)
        for a in range(12):
            dcos, dsin = sp.deriv_trig_kernels(K, a)
            assert np.max(np.abs(central_difference(sp.conv_cos, K, (a,)) - dcos)) <= 1e-6
            assert np.max(np.abs(central_difference(sp.conv_sin, K, (a,)) - dsin)) <= 1e-6

    def test_dsin_is_translated_cos(self):
        K = kn.random_real((12,), seed=4)
        _, dsin = sp.deriv_trig_kernels(K, 5)
        np.testing.assert_array_equal(dsin, np.roll(sp.conv_cos(K), 5))

    def test_real_parametrization_chain_rule(self):
        U = kn.random_real((9,), seed=5).real
        t = 0.8
        fn = lambda u: sp.conv_exp(kn.anti_hermitian_from_real(u), t)  # noqa: E731
        for a in range(9):
            fd = central_difference(fn, U, (a,))
            assert np.max(np.abs(fd - sp.deriv_exp_real_param(U, a, t))) <= 1e-6

    def test_real_parametrization_nyquist(self):
        U = kn.random_real((8,), seed=6).real
        fd = central_difference(lambda u: sp.conv_exp(kn.anti_hermitian_from_real(u)), U, (4,))
        assert np.max(np.abs(fd - sp.deriv_exp_real_param(U, 4))) <= 1e-6


class TestBipartite:
    def test_symmetric_reduces_to_cos_sin(self):
        L = kn.builtin_kernel("laplacian2d", (16, 16))
        b = sp.bipartite_exp(L, 0.9)
        np.testing.assert_allclose(b.xx, sp.conv_cos(L, 0.9), rtol=0, atol=1e-13)
        np.testing.assert_allclose(b.pp, sp.conv_cos(L, 0.9), rtol=0, atol=1e-13)
        np.testing.assert_allclose(b.xp, sp.conv_sin(L, 0.9), rtol=0, atol=1e-13)
        np.testing.assert_allclose(b.px, -b.xp, rtol=0, atol=1e-13)

    def test_zero(self):
        b = sp.bipartite_exp(np.zeros(6))
        np.testing.assert_allclose(b.xx, delta(6), atol=1e-16)
        np.testing.assert_allclose(b.pp, delta(6), atol=1e-16)
        np.testing.assert_array_equal(b.xp, 0)
        np.testing.assert_array_equal(b.px, 0)

    def test_matches_dense_generator(self):
        K = kn.random_real((10,), seed=8)
        assert not kn.is_symmetric(K)
        t = 1.3
        gen = np.block([[np.zeros((10, 10)), lift(K).real], [-lift(kn.flip(K)).real, np.zeros((10, 10))]])
        M = bipartite_block_matrix(sp.bipartite_exp(K, t))
        assert np.max(np.abs(M - dense_expm(gen, t))) <= 1e-8

    def test_rejects_complex(self):
        with pytest.raises(ValueError, match="real"):
            sp.bipartite_exp(1j * delta(4))

    @pytest.mark.parametrize("shape", [(50,), (7, 7), (5, 10)])
    def test_orthogonal(self, shape):
        for K in (kn.random_real(shape, seed=1), kn.symmetric_part(kn.random_real(shape, seed=2))):
            M = bipartite_block_matrix(sp.bipartite_exp(K, 2.0)).real
            assert np.max(np.abs(M.T @ M - np.eye(M.shape[0]))) <= 1e-10

    def test_norm_preserved_large(self, rng):
        K = kn.random_real((96, 80), seed=3)
        b = sp.bipartite_exp(K, 1.0)
        x, p = rng.standard_normal((96, 80)), rng.standard_normal((96, 80))
        x2, p2 = b.apply(x, p)
        before = np.sqrt(np.sum(x**2) + np.sum(p**2))
        after = np.sqrt(np.sum(np.abs(x2) ** 2) + np.sum(np.abs(p2) ** 2))
        assert abs(after / before - 1) <= 1e-10

    def test_global_rotation(self):
        b = sp.rotation_delta((4,), 0.3)
        np.testing.assert_allclose(b.xx, np.cos(0.3) * delta(4), atol=1e-16)
        np.testing.assert_allclose(b.xp, np.sin(0.3) * delta(4), atol=1e-16)
        np.testing.assert_allclose(b.px, -np.sin(0.3) * delta(4), atol=1e-16)
