"""Spatialization losses: shifted-l2 and multiscale STFT.

The shifted-l2 loss scores each length-L segment of the estimate
against reference windows slid by up to +-L samples, normalizes by the
signals' standard deviation, penalizes larger offsets with an inverted
Blackman window, and keeps the per-segment minimum.  It is zero only
when the segment matches at zero offset.

The multiscale STFT loss is magnitude-only: spectral convergence plus a
log-magnitude l1 term, averaged over several analysis resolutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .audio import AudioBuffer, StftConfig, blackman, stft
from .errors import DegenerateReference, InvalidArgument

_LOG_FLOOR = 1e-7


@dataclass(frozen=True)
class ShiftL2Config:
    seg_len: int = 128
    alpha: float = 100.0
    delta: float = 0.001
    sigma_scope: str = "segment"  # or "clip"

    def __post_init__(self):
        if self.seg_len < 1:
            raise InvalidArgument("seg_len must be >= 1")
        if self.alpha < 0:
            raise InvalidArgument("alpha must be >= 0")
        if not self.delta > 0:
            raise InvalidArgument("delta must be > 0")
        if self.sigma_scope not in ("segment", "clip"):
            raise InvalidArgument("sigma_scope must be 'segment' or 'clip'")


@dataclass(frozen=True)
class MsStftConfig:
    window_sizes: tuple[int, ...] = (256, 128, 64, 32)
    ms_weight: float = 100.0  # weight of this loss inside combined_loss

    def __post_init__(self):
        if not self.window_sizes:
            raise InvalidArgument("window_sizes must not be empty")
        if len(set(self.window_sizes)) != len(self.window_sizes):
            raise InvalidArgument("window_sizes must be unique")
        if min(self.window_sizes) < 8:
            raise InvalidArgument("window sizes below 8 samples are not supported")


@dataclass(frozen=True)
class CombinedLoss:
    shift_l2: float
    ms_stft: float
    combined: float


def offset_penalty(seg_len: int, alpha: float) -> np.ndarray:
    """alpha * (1 - Blackman(2L+1)): zero at zero offset, alpha at +-L."""
    return alpha * (1.0 - blackman(2 * seg_len + 1))


def _check_pair(est: AudioBuffer, ref: AudioBuffer) -> None:
    if est.n_channels != ref.n_channels or est.n_samples != ref.n_samples:
        raise InvalidArgument(
            f"signal shapes differ: {est.samples.shape} vs {ref.samples.shape}"
        )
    if est.sample_rate != ref.sample_rate:
        raise InvalidArgument("sample rates differ")


def _seq_mean(values) -> float:
    # plain left-to-right accumulation so compiled and reference kernel
    # paths stay bit-identical with a straightforward reimplementation
    total = 0.0
    count = 0
    for v in values:
        total += float(v)
        count += 1
    return total / count


def shift_l2(est: AudioBuffer, ref: AudioBuffer, cfg: ShiftL2Config | None = None) -> float:
    """Offset-penalized segment-wise normalized l2, averaged over
    segments and channels.

    Per segment n of length L and offset tau in [-L, L] (reference reads
    past the clip boundary are zero, trailing partial segments are
    dropped):

        l2(n, tau) = (1/L) sum_t ((est[nL+t] - ref[nL+t+tau]) / denom_n)^2
        denom_n    = sqrt(sigma_ref * min(sigma_ref, sigma_est)) + delta
        value(n)   = min_tau (l2(n, tau) + 1) * (penalty(tau) + 1) - 1

    sigma is the standard deviation of the two length-L segments being
    compared (``sigma_scope="segment"``, the default) or of the whole
    clip (``sigma_scope="clip"``).
    """
    cfg = cfg or ShiftL2Config()
    _check_pair(est, ref)
    L = cfg.seg_len
    if est.n_samples < L:
        raise InvalidArgument(f"signals shorter than one segment ({L} samples)")
    penalty_plus1 = offset_penalty(L, cfg.alpha) + 1.0
    n_seg = est.n_samples // L
    ch_vals = []
    for c in range(est.n_channels):
        e = est.samples[c]
        r = ref.samples[c]
        if cfg.sigma_scope == "clip":
            se, sr_ = np.std(e), np.std(r)
            denom = np.full(n_seg, np.sqrt(sr_ * min(sr_, se)) + cfg.delta)
        else:
            denom = np.empty(n_seg)
            for n in range(n_seg):
                se = np.std(e[n * L : (n + 1) * L])
                sr_ = np.std(r[n * L : (n + 1) * L])
                denom[n] = np.sqrt(sr_ * min(sr_, se)) + cfg.delta
        vals = kernels.shift_l2_min_per_segment(e, r, L, denom, penalty_plus1)
        ch_vals.append(_seq_mean(vals))
    return _seq_mean(ch_vals)


def multiscale_stft_loss(
    est: AudioBuffer, ref: AudioBuffer, cfg: MsStftConfig | None = None
) -> float:
    """Magnitude-spectrogram loss averaged over analysis resolutions.

    Per resolution (hann window, hop = window/4): spectral convergence
    ||R| - |E||_F / ||R||_F plus the mean l1 of log magnitudes (floored
    at 1e-7).  Phase never enters.
    """
    cfg = cfg or MsStftConfig()
    _check_pair(est, ref)
    if not ref.samples.any():
        raise DegenerateReference("all-zero reference: spectral convergence undefined")
    per_res = []
    for w in cfg.window_sizes:
        sc_cfg = StftConfig(window_size=w, hop=w // 4, window_kind="hann", center=True)
        mag_e = np.abs(stft(est, sc_cfg).values)
        mag_r = np.abs(stft(ref, sc_cfg).values)
        sc = np.linalg.norm(mag_r - mag_e) / np.linalg.norm(mag_r)
        log_l1 = np.abs(
            np.log(np.maximum(mag_e, _LOG_FLOOR)) - np.log(np.maximum(mag_r, _LOG_FLOOR))
        ).mean()
        per_res.append(sc + log_l1)
    return float(np.mean(per_res))


def combined_loss(
    est: AudioBuffer,
    ref: AudioBuffer,
    shift_cfg: ShiftL2Config | None = None,
    ms_cfg: MsStftConfig | None = None,
) -> CombinedLoss:
    """shift_l2 + weight * multiscale STFT, components kept visible."""
    ms_cfg = ms_cfg or MsStftConfig()
    s = shift_l2(est, ref, shift_cfg)
    m = multiscale_stft_loss(est, ref, ms_cfg)
    return CombinedLoss(shift_l2=s, ms_stft=m, combined=s + ms_cfg.ms_weight * m)
