"""Evaluation metrics: SDR, amplitude-spectrogram error, phase error."""

from __future__ import annotations

import numpy as np

from .audio import AudioBuffer, StftConfig, stft
from .errors import DegenerateReference, InvalidArgument

SDR_CAP_DB = 100.0
_SILENCE_FLOOR = 1e-8


def _check_pair(est: AudioBuffer, ref: AudioBuffer) -> None:
    if est.n_channels != ref.n_channels or est.n_samples != ref.n_samples:
        raise InvalidArgument(
            f"signal shapes differ: {est.samples.shape} vs {ref.samples.shape}"
        )


def sdr(est: AudioBuffer, ref: AudioBuffer) -> float:
    """Signal-to-distortion ratio in dB.

    10*log10(sum ref^2 / sum (ref - est)^2), computed over all channels,
    capped at +100 dB (the value reported for a zero residual).
    """
    _check_pair(est, ref)
    ref_energy = float(np.sum(ref.samples**2))
    if ref_energy == 0.0:
        raise DegenerateReference("all-zero reference signal")
    resid = float(np.sum((ref.samples - est.samples) ** 2))
    if resid == 0.0:
        return SDR_CAP_DB
    return min(10.0 * np.log10(ref_energy / resid), SDR_CAP_DB)


def amplitude_error(
    est: AudioBuffer, ref: AudioBuffer, cfg: StftConfig | None = None
) -> float:
    """Mean squared magnitude-spectrogram difference, scaled by 1000.

    The mean runs over all (channel, frame, bin) cells so the value does
    not grow with the analysis resolution; phase never enters.
    """
    _check_pair(est, ref)
    cfg = cfg or StftConfig()
    mag_e = np.abs(stft(est, cfg).values)
    mag_r = np.abs(stft(ref, cfg).values)
    return 1000.0 * float(np.mean((mag_e - mag_r) ** 2))


def phase_error(
    est: AudioBuffer, ref: AudioBuffer, cfg: StftConfig | None = None
) -> float:
    """Magnitude-weighted mean absolute phase difference, in [0, pi].

    Per bin the phase difference is wrapped into (-pi, pi] and taken in
    absolute value; bins are weighted by the reference magnitude, and
    bins quieter than 1e-8 of the loudest reference bin are excluded
    (phase in silence is noise).

    For phases independent of the reference the expected value is pi/2;
    systematically anti-phased estimates reach pi.
    """
    _check_pair(est, ref)
    cfg = cfg or StftConfig()
    spec_e = stft(est, cfg).values
    spec_r = stft(ref, cfg).values
    weights = np.abs(spec_r)
    mask = weights >= _SILENCE_FLOOR * weights.max()
    if not mask.any():
        raise DegenerateReference("reference spectrogram is entirely silent")
    raw = np.angle(spec_e[mask]) - np.angle(spec_r[mask])
    dphi = np.abs(np.mod(raw + np.pi, 2.0 * np.pi) - np.pi)
    w = weights[mask]
    return float(np.sum(w * dphi) / np.sum(w))
