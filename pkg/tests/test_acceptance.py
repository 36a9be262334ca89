"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.

Criterion 5 is asserted exactly at its stated band and tolerances and is
expected to fail: a point source 0.3 m off-center carries angular detail
up to roughly k*0.3 harmonic orders, which at 1500 Hz is order ~8, above
the order-6 encoding the criterion fixes; the truncation residual alone
is ~65% at the band edge, so no encoder can meet 5%/10%.  The companion
test runs the identical pipeline and tolerances inside the aliasing-safe
band (k * source_radius <= order, band edge 1000 Hz) and must pass.
"""

import numpy as np
import pytest

from dsp_util import band_limited_noise, xcorr_peak_lag
from soundfield.audio import AudioBuffer, StftConfig, blackman, istft, stft
from soundfield.codec import EncoderConfig, encode, max_order, render
from soundfield.geometry import (
    PoseTrack,
    StaticPose,
    cart_to_sph,
    fibonacci_sphere_array,
)
from soundfield.harmonics import n_coeffs, sh_matrix, sph_hankel
from soundfield.losses import (
    MsStftConfig,
    ShiftL2Config,
    combined_loss,
    multiscale_stft_loss,
    shift_l2,
)
from soundfield.metrics import amplitude_error, phase_error, sdr
from soundfield.sim import SimScene, SimSource, simulate_array, simulate_receiver
from soundfield.timewarp import apply_warp, compute_warpfield

SR = 48000


def report(num: str, ok: bool, name: str, detail: str) -> None:
    print(f"ACCEPTANCE {num:>3} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")


# --------------------------------------------------------------------------
# 1. order law


def test_01_order_law():
    got = max_order(345)
    report("1", got == 17, "order law", f"max_order(345) = {got}, expected 17")
    assert got == 17
    assert max_order(4) == 1
    assert max_order(16) == 3


# --------------------------------------------------------------------------
# 2. special functions


def test_02_special_functions():
    x = np.linspace(0.1, 50.0, 400)
    h0 = sph_hankel(0, x)
    h0_closed = -1j * np.exp(1j * x) / x
    err0 = (np.abs(h0 - h0_closed) / np.abs(h0_closed)).max()
    h1 = sph_hankel(1, x)
    h1_closed = -np.exp(1j * x) * (x + 1j) / x**2
    err1 = (np.abs(h1 - h1_closed) / np.abs(h1_closed)).max()

    rng = np.random.default_rng(5)
    res = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 20))
        xv = float(rng.uniform(0.5, 50.0))
        lhs = sph_hankel(n + 1, xv)
        rhs = (2 * n + 1) / xv * sph_hankel(n, xv) - sph_hankel(n - 1, xv)
        res = max(res, abs(lhs - rhs) / abs(lhs))
    ok = err0 < 1e-10 and err1 < 1e-10 and res < 1e-9
    report(
        "2", ok, "special functions",
        f"h0 err {err0:.2e}, h1 err {err1:.2e}, recurrence residual {res:.2e}",
    )
    assert err0 < 1e-10
    assert err1 < 1e-10
    assert res < 1e-9


# --------------------------------------------------------------------------
# 3. spherical harmonic orthonormality


def test_03_orthonormality():
    order = 6
    nodes, weights = np.polynomial.legendre.leggauss(2 * order + 4)
    polar = np.arccos(nodes)
    n_az = 4 * order + 8
    azimuth = 2 * np.pi * np.arange(n_az) / n_az
    az, po = [g.ravel() for g in np.meshgrid(azimuth, polar)]
    w = np.repeat(weights, n_az) * (2 * np.pi / n_az)
    ymat = sh_matrix(order, az, po)
    gram = (ymat.conj().T * w) @ ymat
    dev = np.abs(gram - np.eye(n_coeffs(order))).max()
    report("3", dev < 1e-8, "orthonormality", f"Gram deviation {dev:.2e} over 49 functions")
    assert dev < 1e-8


# --------------------------------------------------------------------------
# 4. algebraic encode inverse


def test_04_encode_inverse():
    from soundfield.codec import build_transfer_matrix

    rng = np.random.default_rng(17)
    geom = fibonacci_sphere_array(25, 1.7)
    order = 4
    m = n_coeffs(order)
    cfg = StftConfig(window_size=512, hop=128)
    freqs = np.fft.rfftfreq(512, 1.0 / SR)
    n_frames = 4
    beta0 = rng.standard_normal((m, n_frames, 257)) + 1j * rng.standard_normal(
        (m, n_frames, 257)
    )
    values = np.zeros((25, n_frames, 257), complex)
    good = []
    for fi in range(1, 257):
        tm = build_transfer_matrix(geom, freqs[fi], order)
        if np.linalg.cond(tm) < 1e6:
            good.append(fi)
        values[:, :, fi] = tm @ beta0[:, :, fi]
    from soundfield.audio import Spectrogram

    spec = Spectrogram(values=values, config=cfg, sample_rate=SR, n_samples=900)
    coeffs = encode(spec, geom, EncoderConfig(order=order, tikhonov_rel=1e-10))
    worst = 0.0
    for fi in good:
        rel = np.linalg.norm(coeffs.beta[:, :, fi] - beta0[:, :, fi]) / np.linalg.norm(
            beta0[:, :, fi]
        )
        worst = max(worst, rel)
    ok = worst < 1e-6 and len(good) > 100
    report(
        "4", ok, "encode inverse",
        f"worst recovery error {worst:.2e} over {len(good)} well-conditioned bins",
    )
    assert len(good) > 100
    assert worst < 1e-6


# --------------------------------------------------------------------------
# 5. physical round trip


def _physical_round_trip(band_hi: float) -> dict:
    rng = np.random.default_rng(99)
    geom = fibonacci_sphere_array(64, 1.7)
    order = 6
    n = 16000
    sig = band_limited_noise(rng, n, SR, 300.0, band_hi)
    scene = SimScene(
        sources=[SimSource(AudioBuffer(sig, SR), np.array([0.3, 0.0, 0.0]))],
        interp="sinc",
    )
    mics = simulate_array(scene, geom)
    cfg = StftConfig(window_size=512, hop=128)
    coeffs = encode(stft(mics, cfg), geom, EncoderConfig(order=order), threads=4)

    at_mic = 0.0
    for i in (0, 13, 37, 63):
        rec = render(coeffs, geom.positions[i], threads=4).samples[0]
        at_mic = max(
            at_mic,
            np.linalg.norm(rec - mics.samples[i]) / np.linalg.norm(mics.samples[i]),
        )
    held = 0.0
    sdr_min = np.inf
    for _ in range(8):
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        truth = simulate_receiver(scene, 1.7 * u)
        rec = render(coeffs, cart_to_sph(1.7 * u), threads=4)
        held = max(
            held,
            np.linalg.norm(rec.samples - truth.samples) / np.linalg.norm(truth.samples),
        )
        sdr_min = min(sdr_min, sdr(rec, truth))
    return {"at_mic": at_mic, "held": held, "sdr_min": sdr_min}


@pytest.mark.xfail(
    strict=True,
    reason=(
        "physics floor: a source 0.3 m off-center needs harmonic order "
        "~k*0.3 = 8.2 at 1500 Hz, above the order-6 encoding this test "
        "fixes; the truncation residual (~65% at the band edge) exceeds "
        "the 5%/10% tolerances for any encoder"
    ),
)
def test_05_physical_round_trip_full_band():
    r = _physical_round_trip(1500.0)
    ok = r["at_mic"] <= 0.05 and r["held"] <= 0.10 and r["sdr_min"] >= 20.0
    report(
        "5", ok, "physical round trip (band 300-1500 Hz, order 6)",
        f"at-mic {r['at_mic']:.3f} (<=0.05), held-out {r['held']:.3f} (<=0.10), "
        f"SDR min {r['sdr_min']:.1f} dB (>=20) -- expected to fail, see module docstring",
    )
    assert r["at_mic"] <= 0.05
    assert r["held"] <= 0.10
    assert r["sdr_min"] >= 20.0


def test_05s_physical_round_trip_aliasing_safe_band():
    r = _physical_round_trip(1000.0)
    ok = r["at_mic"] <= 0.05 and r["held"] <= 0.10 and r["sdr_min"] >= 20.0
    report(
        "5s", ok, "physical round trip (band 300-1000 Hz, order 6)",
        f"at-mic {r['at_mic']:.3f} (<=0.05), held-out {r['held']:.3f} (<=0.10), "
        f"SDR min {r['sdr_min']:.1f} dB (>=20)",
    )
    assert r["at_mic"] <= 0.05
    assert r["held"] <= 0.10
    assert r["sdr_min"] >= 20.0


# --------------------------------------------------------------------------
# 6. shifted-l2 exactness


def _brute_force_shift_l2(est, ref, cfg):
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


def test_06_shift_l2_exactness():
    L, alpha, delta = 128, 100.0, 0.001
    rng = np.random.default_rng(31)

    ident = AudioBuffer(rng.standard_normal(4 * L), SR)
    zero_val = shift_l2(ident, ident, ShiftL2Config(seg_len=L, alpha=alpha, delta=delta))

    # impulse sweep: bit-for-bit against the direct triple loop, both scopes
    bit_ok = True
    n_seg = 32
    big = n_seg * L
    for scope in ("segment", "clip"):
        cfg = ShiftL2Config(seg_len=L, alpha=alpha, delta=delta, sigma_scope=scope)
        for tau0 in (0, 8, 32, 64, 128):
            t_e = tau0 if tau0 < L else L - 1
            ref = np.zeros(big)
            est = np.zeros(big)
            est[16 * L + t_e] = 1.0
            ref[16 * L + t_e - tau0] = 1.0
            got = shift_l2(AudioBuffer(est, SR), AudioBuffer(ref, SR), cfg)
            want = _brute_force_shift_l2(est[None, :], ref[None, :], cfg)
            bit_ok = bit_ok and (got == want)

    # noisy signals too
    cfg = ShiftL2Config(seg_len=L, alpha=alpha, delta=delta)
    e = rng.standard_normal((2, 5 * L + 7))
    r = e + 0.1 * rng.standard_normal((2, 5 * L + 7))
    noisy_ok = shift_l2(AudioBuffer(e, SR), AudioBuffer(r, SR), cfg) == (
        _brute_force_shift_l2(e, r, cfg)
    )

    # closed form: dominant impulse, whole-clip sigma
    w = blackman(2 * L + 1)
    cfg_clip = ShiftL2Config(seg_len=L, alpha=alpha, delta=delta, sigma_scope="clip")
    n_seg = 256
    big = n_seg * L
    closed_ok = True
    details = []
    for tau0 in (0, 8, 32, 64, 128):
        t_e = tau0 if tau0 < L else L - 1
        ref = np.zeros(big)
        est = np.zeros(big)
        est[128 * L + t_e] = 1.0
        ref[128 * L + t_e - tau0] = 1.0
        value = shift_l2(AudioBuffer(est, SR), AudioBuffer(ref, SR), cfg_clip) * n_seg
        expected = alpha * (1.0 - w[L + tau0])
        if tau0 == 0:
            closed_ok = closed_ok and value == 0.0
        else:
            closed_ok = closed_ok and abs(value - expected) / expected < 0.01
        details.append(f"tau {tau0}: {value:.4f} vs {expected:.4f}")

    ok = zero_val == 0.0 and bit_ok and noisy_ok and closed_ok
    report(
        "6", ok, "shifted-l2 exactness",
        f"identical -> {zero_val}; brute-force bitwise {'ok' if bit_ok and noisy_ok else 'MISMATCH'}; "
        + "; ".join(details),
    )
    assert zero_val == 0.0
    assert bit_ok
    assert noisy_ok
    assert closed_ok


# --------------------------------------------------------------------------
# 7. loss combination


def test_07_loss_combination():
    rng = np.random.default_rng(41)
    est = AudioBuffer(rng.standard_normal(4096), SR)
    ref = AudioBuffer(rng.standard_normal(4096), SR)
    r = combined_loss(est, ref)
    exact = r.combined == r.shift_l2 + 100.0 * r.ms_stft
    windows = MsStftConfig().window_sizes == (256, 128, 64, 32)
    flipped = AudioBuffer(-ref.samples, SR)
    scramble_val = multiscale_stft_loss(flipped, ref)
    ok = exact and windows and scramble_val < 1e-6
    report(
        "7", ok, "loss combination",
        f"combined == shift + 100*ms: {exact}; windows {MsStftConfig().window_sizes}; "
        f"phase-scramble ms-stft {scramble_val:.2e}",
    )
    assert exact
    assert windows
    assert scramble_val < 1e-6


# --------------------------------------------------------------------------
# 8. metrics


def test_08_metrics():
    rng = np.random.default_rng(53)
    ref = rng.standard_normal(5000)
    noise = rng.standard_normal(5000)
    noise -= ref * (ref @ noise) / (ref @ ref)
    noise *= np.sqrt(0.1 * (ref @ ref) / (noise @ noise))
    ten = sdr(AudioBuffer(ref + noise, SR), AudioBuffer(ref, SR))

    cfg = StftConfig(window_size=512, hop=128)
    est_mc = AudioBuffer(rng.standard_normal(3 * SR), SR)
    ref_mc = AudioBuffer(rng.standard_normal(3 * SR), SR)
    half_pi = phase_error(est_mc, ref_mc, cfg)

    x = AudioBuffer(rng.standard_normal(4096), SR)
    anti = phase_error(AudioBuffer(-x.samples, SR), x)

    rect = StftConfig(window_size=256, hop=256, window_kind="rect", center=False)
    spec = stft(x, rect)
    mags = np.abs(spec.values)
    phases = rng.uniform(-np.pi, np.pi, mags.shape)
    phases[:, :, 0] = 0.0
    phases[:, :, -1] = 0.0
    spec.values = mags * np.exp(1j * phases)
    scrambled = istft(spec)
    amp_blind = amplitude_error(scrambled, x, rect)

    ok = (
        abs(ten - 10.0) < 1e-9
        and abs(half_pi - np.pi / 2) < 0.02
        and abs(anti - np.pi) < 1e-9
        and amp_blind < 1e-9
    )
    report(
        "8", ok, "metrics",
        f"sdr {ten:.12f} dB; uncorrelated phase {half_pi:.4f} (pi/2 = {np.pi / 2:.4f}); "
        f"anti-phase {anti:.6f}; scrambled amplitude error {amp_blind:.2e}",
    )
    assert abs(ten - 10.0) < 1e-9
    assert abs(half_pi - np.pi / 2) < 0.02
    assert abs(anti - np.pi) < 1e-9
    assert amp_blind < 1e-9


# --------------------------------------------------------------------------
# 9. warp alignment oracle


def test_09_warp_alignment():
    nose = np.array([0.0, 0.0, 1.6])
    hand = nose + 0.8 * np.array([1.0, 1.0, -1.0]) / np.sqrt(3.0)  # 0.8 m away
    assert abs(np.linalg.norm(hand - nose) - 0.8) < 1e-12
    target = np.array([1.7, 0.0, 1.2])
    sig = np.zeros(24000)
    sig[9000] = 1.0
    scene = SimScene(sources=[SimSource(AudioBuffer(sig, SR), hand)])
    at_nose = simulate_receiver(scene, nose)
    at_target = simulate_receiver(scene, target)
    pose = StaticPose(
        joints={"nose": nose.tolist(), "left_hand": hand.tolist()}
    ).track(40)
    wf = compute_warpfield(
        pose, "left_hand", "nose", target, sample_rate=SR, n_samples=24000
    )
    warped = apply_warp(at_nose, wf)
    lag = xcorr_peak_lag(warped.samples[0], at_target.samples[0])

    rng = np.random.default_rng(61)
    violations = 0
    for _ in range(1000):
        frames = rng.standard_normal((8, 2, 3)) * rng.uniform(0.05, 4.0)
        track = PoseTrack(frames=frames, joint_names=["nose", "left_hand"], fps=30.0)
        wf_r = compute_warpfield(
            track, "left_hand", "nose", rng.standard_normal(3) * 2.0,
            sample_rate=SR, n_samples=2500,
        )
        if (np.diff(wf_r.rho) < 0).any():
            violations += 1
    ok = abs(lag) <= 1 and violations == 0
    report(
        "9", ok, "warp alignment",
        f"cross-correlation lag {lag} samples (|lag| <= 1); "
        f"monotonicity violations {violations}/1000",
    )
    assert abs(lag) <= 1
    assert violations == 0


# --------------------------------------------------------------------------
# 10. baseline exactness regime


def test_10_baseline_exactness():
    from soundfield.baseline import naive_spatialize

    rng = np.random.default_rng(71)
    nose = np.array([0.0, 0.0, 1.6])
    target = np.array([1.2, -0.8, 1.1])
    sig = band_limited_noise(rng, 24000, SR, 200.0, 4000.0)
    scene = SimScene(sources=[SimSource(AudioBuffer(sig, SR), nose)])
    truth = simulate_receiver(scene, target).samples[0]
    pose = StaticPose(joints={"nose": nose.tolist()}).track(40)
    out = naive_spatialize(AudioBuffer(sig, SR), pose, target).samples[0]
    start = 600
    rel = np.linalg.norm(out[start:] - truth[start:]) / np.linalg.norm(truth[start:])

    # hand-held source: misalignment is exactly the geometric detour
    nose2 = np.zeros(3)
    hand = np.array([0.8575, 0.0, 0.0])  # 120 samples from the nose
    target2 = np.array([3.43, 0.0, 0.0])  # 480 from nose, 360 from hand
    predicted = 120 + 480 - 360
    imp = np.zeros(24000)
    imp[6000] = 1.0
    scene2 = SimScene(sources=[SimSource(AudioBuffer(imp, SR), hand)])
    at_nose = simulate_receiver(scene2, nose2)
    at_target = simulate_receiver(scene2, target2).samples[0]
    pose2 = StaticPose(joints={"nose": nose2.tolist()}).track(40)
    out2 = naive_spatialize(at_nose, pose2, target2).samples[0]
    lag = xcorr_peak_lag(out2, at_target)

    ok = rel < 0.01 and lag == predicted
    report(
        "10", ok, "baseline exactness",
        f"nose-source relative error {rel:.4f} (<0.01); "
        f"hand-source lag {lag} == predicted {predicted}",
    )
    assert rel < 0.01
    assert lag == predicted


# --------------------------------------------------------------------------
# 11. end-to-end determinism


def test_11_demo_determinism(tmp_path, monkeypatch):
    from soundfield.cli import main

    monkeypatch.setenv("SOUNDFIELD_THREADS", "4")
    assert main(["demo", "--out", str(tmp_path / "a")]) == 0
    assert main(["demo", "--out", str(tmp_path / "b")]) == 0
    files_a = sorted(
        p.relative_to(tmp_path / "a")
        for p in (tmp_path / "a").rglob("*") if p.is_file()
    )
    files_b = sorted(
        p.relative_to(tmp_path / "b")
        for p in (tmp_path / "b").rglob("*") if p.is_file()
    )
    same_names = files_a == files_b
    diffs = [
        str(f)
        for f in files_a
        if (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes()
    ]
    ok = same_names and not diffs
    report(
        "11", ok, "demo determinism",
        f"{len(files_a)} files, byte-identical re-run: {not diffs}",
    )
    assert same_names
    assert not diffs
