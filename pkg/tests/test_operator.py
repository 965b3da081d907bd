import math

import numpy as np
import pytest

from converse2d import (
    ConverseConfig,
    KernelBank,
    KernelTooLarge,
    LambdaParam,
    MalformedKernel,
    PadMode,
    ScaleNotOne,
    X0Strategy,
    circular_forward,
    converse_s1_fast,
    converse_solve,
    fft2,
    ifft2,
    interp_nearest,
    lambda_of,
    load_kernel_file,
    normalize_kernel,
    p2o,
    save_kernel_file,
)

from conftest import naive_dft2


def delta_bank(c, size=3):
    k = np.zeros((c, size, size))
    k[:, size // 2, size // 2] = 1.0
    return KernelBank.from_normalized(k)


class TestNormalizeKernel:
    def test_uniform(self):
        out = normalize_kernel(np.zeros((1, 5, 5)))
        np.testing.assert_allclose(out, np.full((1, 5, 5), 0.04))

    def test_saturation(self):
        raw = np.zeros((1, 3, 3))
        raw[0, 1, 1] = 20.0
        out = normalize_kernel(raw)
        assert out[0, 1, 1] > 0.9999
        off = out[0][out[0] < 0.5]
        assert (off < 1e-8).all()

    def test_matches_direct_exp_sum(self, rng):
        raw = rng.standard_normal((2, 3, 3))
        # independent direct evaluation, no max-shift
        direct = np.exp(raw) / np.exp(raw).sum(axis=(1, 2), keepdims=True)
        np.testing.assert_allclose(normalize_kernel(raw), direct, atol=1e-14)

    def test_sums_to_one(self, rng):
        out = normalize_kernel(rng.standard_normal((4, 5, 5)))
        np.testing.assert_allclose(out.sum(axis=(1, 2)), 1.0, atol=1e-12)
        assert (out > 0).all()

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            KernelBank(np.zeros((1, 4, 4)))


class TestLambda:
    def test_b_zero(self):
        lam = lambda_of(LambdaParam(np.zeros(3)))
        expected = 1.0 / (1.0 + math.exp(9.0)) + 1e-5
        np.testing.assert_allclose(lam, expected, rtol=1e-14)

    def test_b_nine(self):
        lam = lambda_of(LambdaParam(np.array([9.0])))
        assert lam[0] == pytest.approx(0.5 + 1e-5, abs=1e-15)

    def test_saturation(self):
        lam = lambda_of(LambdaParam(np.array([100.0])))
        assert lam[0] == pytest.approx(1.0 + 1e-5, abs=1e-12)

    def test_monotone(self):
        b = np.linspace(-10, 20, 31)
        lam = lambda_of(LambdaParam(b))
        assert (np.diff(lam) > 0).all()
        assert (lam > 1e-5).all() and (lam < 1 + 1e-5 + 1e-12).all()


class TestP2O:
    def test_1x1_delta(self):
        otf = p2o(np.ones((1, 1, 1)), 4, 4)
        np.testing.assert_allclose(otf, np.ones((1, 1, 4, 4)), atol=1e-14)

    def test_centered_delta_any_size(self):
        k = np.zeros((2, 3, 3))
        k[:, 1, 1] = 1.0
        otf = p2o(k, 5, 7)
        np.testing.assert_allclose(otf, np.ones((1, 2, 5, 7)), atol=1e-13)

    def test_uniform_kernel_matches_naive_dft(self):
        k = np.full((1, 3, 3), 1.0 / 9.0)
        otf = p2o(k, 6, 6)
        assert otf[0, 0, 0, 0] == pytest.approx(1.0 + 0.0j, abs=1e-12)
        embedded = np.zeros((6, 6))
        embedded[:3, :3] = k[0]
        embedded = np.roll(embedded, (-1, -1), axis=(0, 1))
        np.testing.assert_allclose(otf[0, 0], naive_dft2(embedded), atol=1e-12)

    def test_dc_bin_is_one_for_normalized(self, rng):
        w = normalize_kernel(rng.standard_normal((3, 5, 5)))
        otf = p2o(w, 8, 8)
        np.testing.assert_allclose(otf[0, :, 0, 0], 1.0 + 0.0j, atol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(KernelTooLarge):
            p2o(np.ones((1, 5, 5)) / 25.0, 3, 3)


class TestConverseSolve:
    def test_delta_lambda_one_halves(self, rng):
        y = rng.standard_normal((1, 2, 4, 4))
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        out = converse_solve(y, delta_bank(2), LambdaParam(np.zeros(2)), cfg,
                             lam_override=1.0)
        np.testing.assert_allclose(out, y / 2, atol=1e-13)

    def test_delta_x0_y_identity(self, rng):
        y = rng.standard_normal((1, 2, 4, 5))
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.INTERP_NEAREST)
        for lam_val in (1e-3, 0.3, 7.0):
            out = converse_solve(y, delta_bank(2), LambdaParam(np.zeros(2)), cfg,
                                 lam_override=lam_val)
            np.testing.assert_allclose(out, y, atol=1e-11)

    def test_shape_contract(self, rng):
        y = rng.standard_normal((2, 3, 5, 6))
        kb = KernelBank(rng.standard_normal((3, 3, 3)))
        lam = LambdaParam(np.zeros(3))
        for s in (1, 2, 3):
            for mode in PadMode:
                for p in (0, 1, 2):
                    cfg = ConverseConfig(scale=s, pad_mode=mode, pad_size=p)
                    out = converse_solve(y, kb, lam, cfg)
                    assert out.shape == (2, 3, 5 * s, 6 * s)

    def test_linearity(self, rng):
        y1 = rng.standard_normal((1, 1, 4, 4))
        y2 = rng.standard_normal((1, 1, 4, 4))
        kb = KernelBank(rng.standard_normal((1, 3, 3)))
        lam = LambdaParam(np.array([0.0]))
        cfg = ConverseConfig(scale=2, pad_size=0, x0=X0Strategy.ZERO)
        lhs = converse_solve(3.0 * y1 - 2.0 * y2, kb, lam, cfg)
        rhs = 3.0 * converse_solve(y1, kb, lam, cfg) - 2.0 * converse_solve(
            y2, kb, lam, cfg
        )
        err = np.abs(lhs - rhs).max() / (np.abs(rhs).max() + 1.0)
        assert err < 1e-10

    def test_lambda_infinity_pulls_to_prior(self, rng):
        y = rng.standard_normal((1, 2, 4, 4))
        kb = KernelBank(rng.standard_normal((2, 3, 3)))
        cfg = ConverseConfig(scale=2, pad_size=0, x0=X0Strategy.INTERP_NEAREST)
        out = converse_solve(y, kb, LambdaParam(np.zeros(2)), cfg, lam_override=1e8)
        x0_up = interp_nearest(y, 2)
        assert np.abs(out - x0_up).max() / np.abs(x0_up).max() < 1e-6

    def test_well_conditioned_inversion(self, rng):
        # kernel with no spectral zeros: 0.9 delta + 0.1 uniform
        k = np.full((1, 5, 5), 0.1 / 25.0)
        k[0, 2, 2] += 0.9
        x = rng.standard_normal((1, 1, 32, 32))
        y = circular_forward(x, k, 1)
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        out = converse_solve(y, KernelBank.from_normalized(k),
                             LambdaParam(np.zeros(1)), cfg, lam_override=1e-6)
        assert np.abs(out - x).max() / np.abs(x).max() < 1e-3

    def test_per_channel_lambda_is_independent(self, rng):
        y = rng.standard_normal((1, 2, 4, 4))
        kb = delta_bank(2)
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        out = converse_solve(y, kb, LambdaParam(np.zeros(2)), cfg,
                             lam_override=np.array([1.0, 3.0]))
        np.testing.assert_allclose(out[:, 0], y[:, 0] / 2, atol=1e-13)
        np.testing.assert_allclose(out[:, 1], y[:, 1] / 4, atol=1e-13)


class TestS1Fast:
    def test_agrees_with_general_solve(self, rng):
        y = rng.standard_normal((2, 4, 8, 8))
        kb = KernelBank(rng.standard_normal((4, 3, 3)))
        lam = LambdaParam(rng.uniform(-1, 4, 4))
        for x0 in X0Strategy:
            cfg = ConverseConfig(scale=1, pad_size=0, x0=x0)
            slow = converse_solve(y, kb, lam, cfg)
            fast = converse_s1_fast(y, kb, lam, cfg)
            err = np.abs(slow - fast).max() / np.abs(slow).max()
            assert err < 1e-10

    def test_rejects_scale_two(self, rng):
        cfg = ConverseConfig(scale=2)
        with pytest.raises(ScaleNotOne):
            converse_s1_fast(rng.standard_normal((1, 1, 4, 4)),
                             delta_bank(1), LambdaParam(np.zeros(1)), cfg)

    def test_large_lambda_zero_prior_kills_output(self, rng):
        y = rng.standard_normal((1, 1, 8, 8))
        kb = KernelBank(rng.standard_normal((1, 3, 3)))
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        out = converse_s1_fast(y, kb, LambdaParam(np.zeros(1)), cfg,
                               lam_override=1e6)
        assert np.abs(out).max() < 1e-4 * np.abs(y).max()

    def test_delta_small_lambda(self, rng):
        y = rng.standard_normal((1, 1, 5, 5))
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        out = converse_s1_fast(y, delta_bank(1), LambdaParam(np.zeros(1)), cfg,
                               lam_override=0.01)
        np.testing.assert_allclose(out, y / 1.01, atol=1e-13)

    def test_tikhonov_identity(self, rng):
        # independent direct implementation of the inverse-filter formula
        y = rng.standard_normal((1, 2, 6, 6))
        kb = KernelBank(rng.standard_normal((2, 3, 3)))
        lam_val = 0.05
        cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
        got = converse_s1_fast(y, kb, LambdaParam(np.zeros(2)), cfg,
                               lam_override=lam_val)
        fk = p2o(kb.weights(), 6, 6)
        direct = ifft2(np.conj(fk) * fft2(y) / (np.abs(fk) ** 2 + lam_val))
        np.testing.assert_allclose(got, direct, atol=1e-12)


class TestKernelFile:
    def test_roundtrip(self, tmp_path, rng):
        w = normalize_kernel(rng.standard_normal((2, 3, 3)))
        path = tmp_path / "k.txt"
        save_kernel_file(path, w)
        np.testing.assert_array_equal(load_kernel_file(path), w)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 3 3\n0 0 0\n0 1 0\n")
        with pytest.raises(MalformedKernel):
            load_kernel_file(path)

    def test_non_numeric(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 1 1\nfoo\n")
        with pytest.raises(MalformedKernel):
            load_kernel_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MalformedKernel):
            load_kernel_file(tmp_path / "nope.txt")
