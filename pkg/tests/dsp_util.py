"""Shared signal constructions for tests."""

import numpy as np


def band_limited_noise(rng, n_samples, sample_rate, f_lo, f_hi, peak=1.0):
    """Flat-band noise, normalized to the requested peak amplitude."""
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
    spectrum[(freqs < f_lo) | (freqs > f_hi)] = 0.0
    x = np.fft.irfft(spectrum, n_samples)
    return x * (peak / np.abs(x).max())


def xcorr_peak_lag(a, b):
    """Lag of the absolute cross-correlation peak: >0 means a lags b."""
    n = max(len(a), len(b))
    corr = np.correlate(
        np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b))), mode="full"
    )
    return int(np.argmax(np.abs(corr))) - (n - 1)
