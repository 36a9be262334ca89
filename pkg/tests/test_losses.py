import numpy as np
import pytest

from dsp_util import band_limited_noise
from soundfield.audio import AudioBuffer, blackman
from soundfield.errors import DegenerateReference, InvalidArgument
from soundfield.losses import (
    CombinedLoss,
    MsStftConfig,
    ShiftL2Config,
    combined_loss,
    multiscale_stft_loss,
    offset_penalty,
    shift_l2,
)

SR = 48000


def brute_force_shift_l2(est, ref, cfg):
    """Direct triple loop over segments, offsets, and samples."""
    L = cfg.seg_len
    wplus1 = cfg.alpha * (1.0 - blackman(2 * L + 1)) + 1.0
    ch_vals = []
    for c in range(est.shape[0]):
        e, r = est[c], ref[c]
        big = len(e)
        n_seg = big // L
        if cfg.sigma_scope == "clip":
            se_clip, sr_clip = np.std(e), np.std(r)
        seg_vals = []
        for n in range(n_seg):
            if cfg.sigma_scope == "clip":
                se, sr_ = se_clip, sr_clip
            else:
                se = np.std(e[n * L : (n + 1) * L])
                sr_ = np.std(r[n * L : (n + 1) * L])
            dn = np.sqrt(sr_ * min(sr_, se)) + cfg.delta
            best = np.inf
            for j in range(2 * L + 1):
                acc = 0.0
                for t in range(L):
                    ridx = n * L + t + j - L
                    rv = r[ridx] if 0 <= ridx < big else 0.0
                    d = (e[n * L + t] - rv) / dn
                    acc += d * d
                val = (acc / L + 1.0) * wplus1[j] - 1.0
                if val < best:
                    best = val
            seg_vals.append(best)
        total = 0.0
        for v in seg_vals:
            total += v
        ch_vals.append(total / n_seg)
    total = 0.0
    for v in ch_vals:
        total += v
    return total / len(ch_vals)


class TestShiftL2:
    def test_identical_signals_zero(self, rng):
        x = AudioBuffer(rng.standard_normal((2, 1000)), SR)
        for scope in ("segment", "clip"):
            assert shift_l2(x, x, ShiftL2Config(sigma_scope=scope)) == 0.0

    @pytest.mark.parametrize("scope", ["segment", "clip"])
    def test_matches_brute_force_bitwise(self, rng, scope):
        cfg = ShiftL2Config(seg_len=32, sigma_scope=scope)
        est = rng.standard_normal((2, 163))
        ref = est + 0.3 * rng.standard_normal((2, 163))
        a = AudioBuffer(est, SR)
        b = AudioBuffer(ref, SR)
        got = shift_l2(a, b, cfg)
        want = brute_force_shift_l2(a.samples, b.samples, cfg)
        assert got == want

    def test_impulse_sweep_matches_penalty_closed_form(self):
        # dominant isolated impulse, whole-clip sigma: the best offset is
        # the true shift, and its cost is exactly the offset penalty
        L = 128
        cfg = ShiftL2Config(sigma_scope="clip")
        w = blackman(2 * L + 1)
        n_seg = 256
        big = n_seg * L
        n0 = 128  # segment carrying the impulse
        previous = -1.0
        for tau0 in (0, 8, 32, 64, 128):
            t_e = tau0 if tau0 < L else L - 1
            ref = np.zeros(big)
            est = np.zeros(big)
            est[n0 * L + t_e] = 1.0
            ref[n0 * L + t_e - tau0] = 1.0
            value = shift_l2(AudioBuffer(est, SR), AudioBuffer(ref, SR), cfg) * n_seg
            expected = cfg.alpha * (1.0 - w[L + tau0])
            if tau0 == 0:
                assert value == 0.0
            else:
                assert value == pytest.approx(expected, rel=0.01)
            assert value > previous  # non-decreasing in the induced shift
            previous = value

    def test_shift_beyond_window_equals_silence(self):
        # shifting the impulse out of the clip leaves no matching offset
        L = 32
        cfg = ShiftL2Config(seg_len=L, sigma_scope="segment")
        big = 4 * L
        ref = np.zeros(big)
        ref[3 * L + 5] = 1.0
        est = np.concatenate([np.zeros(2 * L), ref[: -2 * L]])  # impulse pushed out
        lost = shift_l2(AudioBuffer(est, SR), AudioBuffer(ref, SR), cfg)
        silent = shift_l2(AudioBuffer(np.zeros(big), SR), AudioBuffer(ref, SR), cfg)
        assert lost == silent
        assert lost == brute_force_shift_l2(est[None, :], ref[None, :], cfg)

    def test_scale_invariance_with_vanishing_delta(self, rng):
        x = rng.standard_normal(1024)
        y = x + 0.2 * rng.standard_normal(1024)
        cfg = ShiftL2Config(delta=1e-12)
        base = shift_l2(AudioBuffer(x, SR), AudioBuffer(y, SR), cfg)
        for c in (0.1, 10.0):
            scaled = shift_l2(AudioBuffer(c * x, SR), AudioBuffer(c * y, SR), cfg)
            assert scaled == pytest.approx(base, rel=1e-6)

    def test_trailing_partial_segment_ignored(self, rng):
        L = 64
        x = rng.standard_normal(3 * L + 17)
        y = x.copy()
        y[3 * L :] += 1.0  # differs only inside the dropped tail
        cfg = ShiftL2Config(seg_len=L)
        assert shift_l2(AudioBuffer(y, SR), AudioBuffer(x, SR), cfg) == 0.0

    def test_nonnegative(self, rng):
        for _ in range(5):
            a = AudioBuffer(rng.standard_normal(500), SR)
            b = AudioBuffer(rng.standard_normal(500), SR)
            assert shift_l2(a, b, ShiftL2Config(seg_len=64)) >= 0.0

    def test_length_mismatch(self, rng):
        a = AudioBuffer(rng.standard_normal(256), SR)
        b = AudioBuffer(rng.standard_normal(257), SR)
        with pytest.raises(InvalidArgument):
            shift_l2(a, b)

    def test_too_short(self, rng):
        a = AudioBuffer(rng.standard_normal(100), SR)
        with pytest.raises(InvalidArgument):
            shift_l2(a, a, ShiftL2Config(seg_len=128))

    def test_default_constants(self):
        cfg = ShiftL2Config()
        assert (cfg.seg_len, cfg.alpha, cfg.delta) == (128, 100.0, 0.001)

    def test_penalty_window_shape(self):
        pen = offset_penalty(128, 100.0)
        assert pen[128] == 0.0  # no penalty at zero offset
        assert pen[0] == 100.0  # full penalty at -L
        assert pen[-1] == 100.0


class TestMultiscaleStft:
    def test_identical_zero(self, rng):
        x = AudioBuffer(rng.standard_normal(4096), SR)
        assert multiscale_stft_loss(x, x) == 0.0

    def test_phase_blind_under_sign_flip(self, rng):
        # global sign flip rotates every bin's phase by pi at every
        # resolution while preserving all magnitude spectra
        x = AudioBuffer(band_limited_noise(rng, 8192, SR, 100, 10000), SR)
        flipped = AudioBuffer(-x.samples, SR)
        assert multiscale_stft_loss(flipped, x) < 1e-6

    def test_amplitude_mismatch_positive(self, rng):
        x = AudioBuffer(rng.standard_normal(4096), SR)
        half = AudioBuffer(0.5 * x.samples, SR)
        assert multiscale_stft_loss(half, x) > 0.0

    def test_zero_reference_degenerate(self, rng):
        est = AudioBuffer(rng.standard_normal(4096), SR)
        ref = AudioBuffer(np.zeros(4096), SR)
        with pytest.raises(DegenerateReference):
            multiscale_stft_loss(est, ref)

    def test_window_sizes_default(self):
        assert MsStftConfig().window_sizes == (256, 128, 64, 32)

    def test_invalid_windows(self):
        with pytest.raises(InvalidArgument):
            MsStftConfig(window_sizes=(256, 256))
        with pytest.raises(InvalidArgument):
            MsStftConfig(window_sizes=(4,))


class TestCombined:
    def test_identical_zero(self, rng):
        x = AudioBuffer(rng.standard_normal(2048), SR)
        result = combined_loss(x, x)
        assert result.combined == 0.0

    def test_weight_composition(self, rng):
        a = AudioBuffer(rng.standard_normal(2048), SR)
        b = AudioBuffer(rng.standard_normal(2048), SR)
        r = combined_loss(a, b)
        assert r.combined == pytest.approx(r.shift_l2 + 100.0 * r.ms_stft, rel=1e-12)
        zero_w = combined_loss(a, b, ms_cfg=MsStftConfig(ms_weight=0.0))
        assert zero_w.combined == zero_w.shift_l2

    def test_components_reported(self, rng):
        a = AudioBuffer(rng.standard_normal(2048), SR)
        b = AudioBuffer(rng.standard_normal(2048), SR)
        r = combined_loss(a, b)
        assert isinstance(r, CombinedLoss)
        assert r.shift_l2 > 0 and r.ms_stft > 0
