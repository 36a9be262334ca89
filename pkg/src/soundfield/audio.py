"""Audio buffers, WAV I/O, analysis windows, and STFT/iSTFT.

The STFT uses centered frames with reflect padding by default and a
one-sided spectrum.  iSTFT is weighted overlap-add normalized by the
overlapped window power, which reconstructs unmodified spectrograms to
machine precision; configurations whose overlapped window power
vanishes anywhere inside the output (no perfect reconstruction
possible) are rejected.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import FormatError, InvalidArgument, UnsupportedFormat

DEFAULT_SAMPLE_RATE = 48000

WINDOW_KINDS = ("hann", "blackman", "rect")


@dataclass
class AudioBuffer:
    """Multichannel audio: ``samples`` is (channels, T) float64."""

    samples: np.ndarray
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 1:
            s = s[None, :]
        if s.ndim != 2:
            raise InvalidArgument(f"samples must be 1-D or 2-D, got shape {s.shape}")
        if not self.sample_rate > 0:
            raise InvalidArgument("sample_rate must be > 0")
        self.samples = s

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def channel(self, i: int) -> "AudioBuffer":
        return AudioBuffer(self.samples[i : i + 1].copy(), self.sample_rate)


@dataclass(frozen=True)
class StftConfig:
    window_size: int = 1024
    hop: int = 256
    window_kind: str = "hann"
    center: bool = True

    def __post_init__(self):
        if self.window_size < 2:
            raise InvalidArgument("window_size must be >= 2")
        if not 0 < self.hop <= self.window_size:
            raise InvalidArgument("hop must satisfy 0 < hop <= window_size")
        if self.window_kind not in WINDOW_KINDS:
            raise InvalidArgument(
                f"window_kind must be one of {WINDOW_KINDS}, got {self.window_kind!r}"
            )

    @property
    def n_bins(self) -> int:
        return self.window_size // 2 + 1

    def to_dict(self) -> dict:
        return {
            "window_size": self.window_size,
            "hop": self.hop,
            "window_kind": self.window_kind,
            "center": self.center,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StftConfig":
        return cls(
            window_size=int(d["window_size"]),
            hop=int(d["hop"]),
            window_kind=str(d["window_kind"]),
            center=bool(d.get("center", True)),
        )


@dataclass
class Spectrogram:
    """One-sided complex STFT values, (channels, frames, bins)."""

    values: np.ndarray
    config: StftConfig
    sample_rate: float
    n_samples: int  # length of the time-domain signal the frames cover

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3:
            raise InvalidArgument(f"values must be (C, frames, bins), got {v.shape}")
        if v.shape[2] != self.config.n_bins:
            raise InvalidArgument(
                f"bin axis is {v.shape[2]}, config expects {self.config.n_bins}"
            )
        self.values = v.astype(np.complex128, copy=False)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    @property
    def n_bins(self) -> int:
        return self.values.shape[2]

    def bin_frequencies(self) -> np.ndarray:
        """Center frequency of each bin in Hz."""
        return np.fft.rfftfreq(self.config.window_size, 1.0 / self.sample_rate)


def blackman(length: int) -> np.ndarray:
    """Symmetric Blackman window with exact 0 endpoints and exact 1 center.

    Standard coefficients (0.42, 0.5, 0.08).  ``length`` must be odd and
    >= 3 so the window has a single peak sample.
    """
    if length < 3 or length % 2 == 0:
        raise InvalidArgument(f"blackman length must be odd and >= 3, got {length}")
    half = length // 2
    k = np.arange(half + 1, dtype=np.float64)
    c = np.cos(2.0 * np.pi * k / (length - 1))
    # 0.42 - 0.5*c + 0.08*(2c^2 - 1) factored so w(0) = 0 and w(center) = 1 exactly
    first = (c - 1.0) * (0.16 * c - 0.34)
    return np.concatenate((first, first[-2::-1]))


def _stft_window(kind: str, size: int) -> np.ndarray:
    n = np.arange(size, dtype=np.float64)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / size)
    if kind == "blackman":
        return (
            0.42
            - 0.5 * np.cos(2.0 * np.pi * n / size)
            + 0.08 * np.cos(4.0 * np.pi * n / size)
        )
    if kind == "rect":
        return np.ones(size)
    raise InvalidArgument(f"unknown window kind {kind!r}")


def _padded_for_stft(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    if cfg.center:
        x = np.pad(x, cfg.window_size // 2, mode="reflect")
    tail = (x.shape[0] - cfg.window_size) % cfg.hop
    if tail:
        x = np.pad(x, (0, cfg.hop - tail))
    return x


def stft(buf: AudioBuffer, cfg: StftConfig | None = None) -> Spectrogram:
    """One-sided STFT of every channel."""
    cfg = cfg or StftConfig()
    if buf.n_samples < cfg.window_size:
        raise InvalidArgument(
            f"signal length {buf.n_samples} shorter than window {cfg.window_size}"
        )
    win = _stft_window(cfg.window_kind, cfg.window_size)
    chans = []
    for c in range(buf.n_channels):
        x = _padded_for_stft(buf.samples[c], cfg)
        n_frames = 1 + (x.shape[0] - cfg.window_size) // cfg.hop
        frames = np.lib.stride_tricks.sliding_window_view(x, cfg.window_size)
        frames = frames[:: cfg.hop][:n_frames]
        chans.append(np.fft.rfft(frames * win, axis=1))
    return Spectrogram(
        values=np.stack(chans),
        config=cfg,
        sample_rate=buf.sample_rate,
        n_samples=buf.n_samples,
    )


def istft(spec: Spectrogram) -> AudioBuffer:
    """Weighted overlap-add inverse of :func:`stft`."""
    cfg = spec.config
    win = _stft_window(cfg.window_kind, cfg.window_size)
    n_frames = spec.n_frames
    full = cfg.window_size + (n_frames - 1) * cfg.hop
    wsum = np.zeros(full)
    for t in range(n_frames):
        wsum[t * cfg.hop : t * cfg.hop + cfg.window_size] += win * win
    start = cfg.window_size // 2 if cfg.center else 0
    stop = start + spec.n_samples
    if stop > full:
        raise InvalidArgument("spectrogram frames do not cover n_samples")
    covered = wsum[start:stop]
    if covered.min() <= 1e-6 * wsum.max():
        raise InvalidArgument(
            f"window {cfg.window_kind!r} with hop {cfg.hop} leaves gaps in the "
            "overlapped window power; perfect reconstruction is impossible"
        )
    out = np.empty((spec.n_channels, spec.n_samples))
    for c in range(spec.n_channels):
        frames = np.fft.irfft(spec.values[c], cfg.window_size, axis=1)
        y = np.zeros(full)
        for t in range(n_frames):
            y[t * cfg.hop : t * cfg.hop + cfg.window_size] += frames[t] * win
        out[c] = y[start:stop] / covered
    return AudioBuffer(out, spec.sample_rate)


_INT_SCALES = {np.dtype(np.uint8): 127.0, np.dtype(np.int16): 32767.0,
               np.dtype(np.int32): 2147483647.0}


def read_wav(path) -> AudioBuffer:
    """Read a PCM or IEEE-float WAV file.

    Integer PCM is scaled to float by the positive full-scale value
    (int16: 1.0 <-> 32767); float data is passed through unchanged.
    24-bit PCM arrives via scipy in an int32 container.
    """
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", wavfile.WavFileWarning)
            rate, data = wavfile.read(str(path))
    except wavfile.WavFileWarning as exc:
        raise FormatError(f"{path}: {exc}") from exc
    except ValueError as exc:
        if "Unknown wave file format" in str(exc):
            raise UnsupportedFormat(f"{path}: {exc}") from exc
        raise FormatError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.ndim == 1:
        data = data[:, None]
    samples = data.T
    if samples.dtype == np.uint8:
        samples = (samples.astype(np.float64) - 128.0) / _INT_SCALES[data.dtype]
    elif samples.dtype in (np.int16, np.int32):
        samples = samples.astype(np.float64) / _INT_SCALES[data.dtype]
    elif samples.dtype in (np.float32, np.float64):
        samples = samples.astype(np.float64)
    else:
        raise UnsupportedFormat(f"{path}: unsupported sample dtype {samples.dtype}")
    return AudioBuffer(samples, float(rate))


def write_wav(path, buf: AudioBuffer) -> None:
    """Write float32 WAV (the package's canonical lossless-enough format)."""
    if not np.isfinite(buf.samples).all():
        raise InvalidArgument("refusing to write non-finite samples")
    data = buf.samples.T.astype(np.float32)
    if data.shape[1] == 1:
        data = data[:, 0]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(str(path), int(buf.sample_rate), data)
