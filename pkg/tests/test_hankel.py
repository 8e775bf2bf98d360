import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynsamp.errors import ConfigError
from dynsamp.hankel import (HankelPair, SpectralStack, antidiagonal_average,
                            build_hankel, build_stack, cadzow_denoise, factorization_residual,
                            node_vectors, numerical_rank, truncate_rank)
from dynsamp.signal import (FiniteSequence, MeasurementSet, State, add_spectral_noise,
                            poisson_spectrum, random_admissible_instance, synthesize, trial_rng)

from conftest import random_complex


class TestBuildStack:
    def test_matches_closed_form(self, cosine_ms, cosine_pair):
        stack = build_stack(cosine_ms, 0.3, 3)
        for l in range(6):
            assert stack.values[l] == pytest.approx(poisson_spectrum(*cosine_pair, 3, l, 0.3), abs=1e-12)

    def test_zero_measurements(self):
        ms = MeasurementSet(3, 6, [FiniteSequence(0, [0.0])] * 6)
        assert not np.any(build_stack(ms, 0.2, 3).values)

    def test_shape(self, cosine_ms):
        assert build_stack(cosine_ms, 0.3, 3).values.shape == (6,)

    @pytest.mark.parametrize("L", [2, 4])
    def test_window_out_of_range(self, cosine_ms, L):
        with pytest.raises(ConfigError):
            build_stack(cosine_ms, 0.3, L)


class TestBuildHankel:
    def test_direct_definition(self):
        v = np.array([1, 2, 3, 4], dtype=complex)
        hp = build_hankel(SpectralStack(0.1, 1, 4, 2, v))
        np.testing.assert_array_equal(hp.Hfull, [[1, 2, 3], [2, 3, 4]])
        np.testing.assert_array_equal(hp.H0, [[1, 2], [2, 3]])
        np.testing.assert_array_equal(hp.H1, [[2, 3], [3, 4]])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 4))
    def test_structure(self, seed, m, extra):
        N = 2 * m + extra
        L = m + extra // 2
        v = random_complex(np.random.default_rng(seed), N)
        hp = build_hankel(SpectralStack(0.2, m, N, L, v))
        assert hp.Hfull.shape == (N - L, L + 1)
        i, j = np.indices(hp.Hfull.shape)
        np.testing.assert_array_equal(hp.Hfull, v[i + j])
        np.testing.assert_array_equal(hp.H1, hp.Hfull[:, 1:])

    def test_csv_export(self, tmp_path, cosine_ms):
        hp = build_hankel(build_stack(cosine_ms, 0.3, 3))
        path = tmp_path / "h.csv"
        hp.to_csv(path)
        assert len(path.read_text().strip().splitlines()) == 3


class TestFactorization:
    def test_cosine_example(self, cosine_ms, cosine_pair):
        hp = build_hankel(build_stack(cosine_ms, 0.3, 3))
        assert factorization_residual(hp, node_vectors(*cosine_pair, 0.3, 3), 0) <= 1e-10

    def test_binomial_example_shifted(self, binomial_pair):
        ms = synthesize(*binomial_pair, 5, 20)
        hp = build_hankel(build_stack(ms, 0.3, 6))
        assert factorization_residual(hp, node_vectors(*binomial_pair, 0.3, 5), 1) <= 1e-10

    def test_zero_state(self, cosine_pair):
        a = cosine_pair[0]
        ms = synthesize(a, State([0.0]), 3, 6)
        hp = build_hankel(build_stack(ms, 0.3, 3))
        assert factorization_residual(hp, node_vectors(a, State([0.0]), 0.3, 3), 0) == 0

    def test_bad_shift(self, cosine_ms, cosine_pair):
        hp = build_hankel(build_stack(cosine_ms, 0.3, 3))
        with pytest.raises(ConfigError):
            factorization_residual(hp, node_vectors(*cosine_pair, 0.3, 3), 2)

    @settings(max_examples=12, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5]))
    def test_random_grid(self, seed, m):
        rng = np.random.default_rng(seed)
        a, x = random_admissible_instance(rng, int(rng.integers(1, 4)))
        ms = synthesize(a, x, m, 2 * m + 2)
        for xi in rng.uniform(0.01, 0.49, 8) + rng.integers(0, 2, 8) * 0.5:
            nv = node_vectors(a, x, xi, m)
            for L in (m, m + 2):
                hp = build_hankel(build_stack(ms, xi, L))
                for s in (0, 1):
                    assert factorization_residual(hp, nv, s) <= 1e-10


class TestRank:
    def test_generic(self, cosine_ms):
        assert numerical_rank(build_hankel(build_stack(cosine_ms, 0.3, 3))) == 3

    def test_at_zero(self, cosine_ms):
        assert numerical_rank(build_hankel(build_stack(cosine_ms, 0.0, 3))) == 2

    def test_zero_matrix(self):
        hp = HankelPair(np.zeros((3, 4), dtype=complex))
        assert numerical_rank(hp) == 0

    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_dichotomy(self, cosine_pair, m):
        ms = synthesize(*cosine_pair, m, 2 * m)
        for xi in (0.0, 0.5):
            assert numerical_rank(build_hankel(build_stack(ms, xi, m))) == (m + 1) // 2
        for xi in (0.05, 0.13, 0.3, 0.45, 0.62, 0.81):
            assert numerical_rank(build_hankel(build_stack(ms, xi, m))) == m

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_dichotomy_random(self, seed):
        # at m >= 5 sigma_m / sigma_1 of random instances can fall below the 1e-8 tolerance
        m = 3
        rng = np.random.default_rng(seed)
        a, x = random_admissible_instance(rng, int(rng.integers(1, 5)))
        ms = synthesize(a, x, m, 2 * m)
        for xi in (0.0, 0.5):
            assert numerical_rank(build_hankel(build_stack(ms, xi, m))) == (m + 1) // 2
        for xi in rng.uniform(0.05, 0.45, 4):
            assert numerical_rank(build_hankel(build_stack(ms, xi, m))) == m


class TestCadzow:
    def test_fixed_point(self, binomial_pair):
        stack = build_stack(synthesize(*binomial_pair, 5, 20), 0.3, 5)
        res = cadzow_denoise(stack)
        assert res.iterations <= 1 and res.converged
        np.testing.assert_allclose(res.stack.values, stack.values, atol=1e-12)

    def test_noisy_converges_to_structured_low_rank(self, binomial_pair):
        stack = build_stack(synthesize(*binomial_pair, 5, 20), 0.3, 5)
        noisy = stack.with_values(add_spectral_noise(stack.values, 1e-3, trial_rng(0))[0])
        res = cadzow_denoise(noisy, max_iter=2000)
        assert res.converged and res.ratio < 1e-10
        H = build_hankel(res.stack).Hfull
        i, j = np.indices(H.shape)
        np.testing.assert_array_equal(H, res.stack.values[i + j])
        s = np.linalg.svd(H, compute_uv=False)
        assert s[5] / s[4] < 1e-10

    def test_zero_input(self):
        res = cadzow_denoise(SpectralStack(0.3, 3, 6, 3, np.zeros(6)))
        assert res.iterations == 0 and not np.any(res.stack.values)

    def test_nonconvergence_flagged(self, binomial_pair):
        stack = build_stack(synthesize(*binomial_pair, 5, 20), 0.3, 5)
        noisy = stack.with_values(add_spectral_noise(stack.values, 1e-2, trial_rng(1))[0])
        res = cadzow_denoise(noisy, max_iter=2)
        assert not res.converged and res.iterations == 2
        assert res.ratio == min(res.ratio_history)

    def test_steps_are_idempotent(self, rng):
        H = random_complex(rng, 6, 5)
        T = truncate_rank(H, 3)
        np.testing.assert_allclose(truncate_rank(T, 3), T, atol=1e-12)
        A = antidiagonal_average(H)
        np.testing.assert_array_equal(antidiagonal_average(A), A)

    @pytest.mark.parametrize("eps", [1e-6, 1e-4, 1e-3])
    def test_does_not_move_away_from_truth(self, binomial_pair, eps):
        stack = build_stack(synthesize(*binomial_pair, 5, 20), 0.3, 5)
        truth = build_hankel(stack).Hfull
        for t in range(5):
            noisy = stack.with_values(add_spectral_noise(stack.values, eps, trial_rng(2, t))[0])
            before = np.linalg.norm(build_hankel(noisy).Hfull - truth)
            after = np.linalg.norm(build_hankel(cadzow_denoise(noisy).stack).Hfull - truth)
            assert after <= before
