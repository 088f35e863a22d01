import numpy as np
import pytest

from svmrx.channel import (
    FadingParams,
    FadingState,
    fading_covariance,
    fading_paths,
    fading_process,
    gaussian,
    snr_to_noise_var,
    step_fading,
    transmit,
)
from svmrx.phy import InfoWord, SymbolFrame, build_frame


class TestParams:
    @pytest.mark.parametrize("snr,expected", [(0, 1.0), (10, 0.1), (30, 0.001)])
    def test_snr_to_noise_var(self, snr, expected):
        assert snr_to_noise_var(1.0, snr) == pytest.approx(expected, rel=1e-12)

    def test_snr_scales_with_power(self):
        assert snr_to_noise_var(4.0, 10) == pytest.approx(0.4)

    def test_from_snr(self):
        p = FadingParams.from_snr(0.9, 20)
        assert p.sigma_w2 == pytest.approx(0.01)
        assert p.innovation_var == pytest.approx(0.19)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(alpha=1.1, sigma_w2=0.1),
            dict(alpha=-0.1, sigma_w2=0.1),
            dict(alpha=0.5, sigma_w2=-1.0),
            dict(alpha=0.5, sigma_w2=0.1, sigma_h2=0.0),
            dict(alpha=0.5, sigma_w2=0.1, power=0.0),
            dict(alpha=0.5, sigma_w2=0.1, domain="quaternion"),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FadingParams(**kwargs)


class TestStepFading:
    @pytest.mark.parametrize("domain", ["real", "complex"])
    def test_alpha_one_holds(self, domain):
        params = FadingParams(1.0, 0.1, domain=domain)
        state = FadingState(0.3 - 0.2j, np.random.default_rng(0))
        for _ in range(50):
            h, state = step_fading(state, params)
            assert h == 0.3 - 0.2j

    def test_matches_recursion_oracle(self):
        params = FadingParams(0.9, 0.1, sigma_h2=2.0)
        state = FadingState(1.5, np.random.default_rng(7))
        oracle = np.random.default_rng(7)
        h = 1.5
        for _ in range(20):
            got, state = step_fading(state, params)
            h = 0.9 * h + np.sqrt(0.19 * 2.0) * oracle.standard_normal()
            assert got == pytest.approx(h, abs=1e-12)

    def test_alpha_zero_uncorrelated(self):
        params = FadingParams(0.0, 0.1)
        state = FadingState.stationary(params, np.random.default_rng(3))
        n = 200_000
        h = np.empty(n)
        for t in range(n):
            v, state = step_fading(state, params)
            h[t] = v.real
        lag1 = np.mean(h[1:] * h[:-1]) / np.mean(h * h)
        assert abs(lag1) < 0.01

    def test_stepwise_autocorrelation(self):
        params = FadingParams(0.95, 0.1)
        state = FadingState.stationary(params, np.random.default_rng(4))
        n = 200_000
        h = np.empty(n)
        for t in range(n):
            v, state = step_fading(state, params)
            h[t] = v.real
        for k in (1, 2, 5):
            rho = np.mean(h[k:] * h[:-k]) / np.mean(h * h)
            # loose bound: a single correlated path of this length has SE near 0.01
            assert rho == pytest.approx(0.95**k, abs=0.03)


class TestFadingProcess:
    @pytest.mark.parametrize("alpha", [0.5, 0.95])
    def test_lag_autocorrelation(self, alpha):
        # 10^6 independent stationary windows of 11 steps
        params = FadingParams(alpha, 0.1)
        h = fading_paths(np.random.default_rng(11), params, 1_000_000, 11)
        for k in range(1, 11):
            rho = np.mean(h[:, 0] * h[:, k])
            assert rho == pytest.approx(alpha**k, abs=0.01)

    def test_long_single_path_autocorrelation(self):
        params = FadingParams(0.95, 0.1)
        h = fading_process(np.random.default_rng(12), params, 1_000_000)
        for k in (1, 3, 10):
            assert np.mean(h[k:] * h[:-k]) / np.mean(h * h) == pytest.approx(0.95**k, abs=0.02)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.95, 0.99, 1.0])
    @pytest.mark.parametrize("domain", ["real", "complex"])
    def test_stationary_power(self, alpha, domain):
        params = FadingParams(alpha, 0.1, domain=domain)
        h = fading_paths(np.random.default_rng(13), params, 1_000_000, 4)
        for t in (0, 3):
            assert np.mean(np.abs(h[:, t]) ** 2) == pytest.approx(1.0, rel=0.01)

    def test_circular_symmetry(self):
        params = FadingParams(0.95, 0.1, domain="complex")
        h = fading_paths(np.random.default_rng(14), params, 1_000_000, 2)
        assert abs(np.mean(h[:, 1] ** 2)) < 0.01
        assert np.mean(h.real[:, 1] ** 2) == pytest.approx(0.5, rel=0.02)

    def test_h0_override(self):
        params = FadingParams(1.0, 0.1)
        np.testing.assert_allclose(fading_process(np.random.default_rng(0), params, 5, h0=0.7), 0.7)

    def test_deterministic(self):
        params = FadingParams(0.97, 0.01, domain="complex")
        a = fading_process(np.random.default_rng(5), params, 1000)
        b = fading_process(np.random.default_rng(5), params, 1000)
        np.testing.assert_array_equal(a, b)


class TestCovariance:
    def test_span_one(self):
        np.testing.assert_array_equal(fading_covariance(1, FadingParams(0.9, 0.1, sigma_h2=2.0)), [[2.0]])

    def test_alpha_zero(self):
        np.testing.assert_array_equal(fading_covariance(5, FadingParams(0.0, 0.1)), np.eye(5))

    def test_alpha_one_rank_one(self):
        c = fading_covariance(4, FadingParams(1.0, 0.1))
        np.testing.assert_array_equal(c, np.ones((4, 4)))

    def test_entries(self):
        c = fading_covariance(9, FadingParams(0.9, 0.1, sigma_h2=1.5))
        for m in range(9):
            for n in range(9):
                assert c[m, n] == pytest.approx(1.5 * 0.9 ** abs(m - n))
        np.testing.assert_array_equal(c, c.T)
        np.testing.assert_array_equal(c, c[::-1, ::-1])

    def test_monte_carlo(self):
        params = FadingParams(0.95, 0.1)
        h = fading_paths(np.random.default_rng(15), params, 1_000_000, 9)
        emp = h.T @ h / h.shape[0]
        assert np.max(np.abs(emp - fading_covariance(9, params))) <= 0.01

    def test_bad_span(self):
        with pytest.raises(ValueError):
            fading_covariance(0, FadingParams(0.5, 0.1))


class TestTransmit:
    def test_noiseless_static_channel_is_identity(self):
        params = FadingParams(1.0, 0.0)
        state = FadingState(1.0, np.random.default_rng(0))
        for k in (0, 5, 15):
            frame = build_frame(InfoWord.from_class(k))
            rx, state = transmit(frame, InfoWord.from_class(k), state, params)
            np.testing.assert_array_equal(rx.r, frame.pilots)
            np.testing.assert_array_equal(rx.z, frame.data)
            assert rx.truth.cls == k

    def test_zero_input_is_pure_noise(self):
        params = FadingParams(0.95, 0.05)
        state = FadingState.stationary(params, np.random.default_rng(1))
        zero = SymbolFrame(np.zeros(1, complex), np.zeros(7, complex), 1.0)
        out = []
        for _ in range(25_000):
            rx, state = transmit(zero, InfoWord.from_class(0), state, params)
            out.append(np.concatenate([rx.r, rx.z]))
        y = np.concatenate(out)
        assert np.var(y) == pytest.approx(0.05, rel=0.02)

    @pytest.mark.parametrize("domain", ["real", "complex"])
    def test_residual_variance_given_true_fading(self, domain):
        params = FadingParams(0.97, 0.02, domain=domain)
        rng = np.random.default_rng(2)
        state = FadingState.stationary(params, rng)
        res = []
        for _ in range(25_000):
            w = InfoWord.from_class(int(rng.integers(16)))
            frame = build_frame(w)
            rx, state = transmit(frame, w, state, params)
            res.append(np.concatenate([rx.r, rx.z]) - rx.h_true * frame.symbols)
        res = np.concatenate(res)
        assert np.mean(np.abs(res) ** 2) == pytest.approx(0.02, rel=0.02)
        if domain == "real":
            assert np.all(res.imag == 0)

    def test_fading_continues_across_frames(self):
        params = FadingParams(1.0, 0.0)
        state = FadingState(0.4, np.random.default_rng(0))
        frame = build_frame(InfoWord.from_class(3))
        rx1, state = transmit(frame, InfoWord.from_class(3), state, params)
        rx2, state = transmit(frame, InfoWord.from_class(3), state, params)
        np.testing.assert_array_equal(rx1.h_true, rx2.h_true)
        assert state.h_current == 0.4

    def test_deterministic(self):
        params = FadingParams(0.95, 0.1, domain="complex")
        frame = build_frame(InfoWord.from_class(9))

        def run(seed):
            state = FadingState.stationary(params, np.random.default_rng(seed))
            rxs = []
            for _ in range(10):
                rx, state = transmit(frame, InfoWord.from_class(9), state, params)
                rxs.append(np.concatenate([rx.r, rx.z]))
            return np.concatenate(rxs)

        np.testing.assert_array_equal(run(8), run(8))
        assert not np.array_equal(run(8), run(9))


def test_gaussian_domains():
    rng = np.random.default_rng(0)
    assert gaussian(rng, 1.0, 3, "real").dtype == np.float64
    c = gaussian(rng, 2.0, 200_000, "complex")
    assert np.mean(np.abs(c) ** 2) == pytest.approx(2.0, rel=0.02)
