"""Harmonic sound field encoding and rendering.

Per STFT frequency bin f, the mic observations S(tau, f) relate to
harmonic coefficients beta(tau, f) through a transfer matrix

    T(f)[i, flat(n, m)] = h_n(k r_i) * Y_nm(azimuth_i, polar_i),
    k = 2 pi f / v_sound,

so encoding solves T(f) beta = S per bin and decoding evaluates the
same expansion at an arbitrary point.  T(f) is severely ill-conditioned
at low frequencies (the Hankel magnitudes explode), so the pseudo-
inverse is realized as Tikhonov-regularized least squares by default;
an exact SVD pseudo-inverse is available for tests.

The DC bin has no propagating wave number; by default its coefficients
are zero.
"""

from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isqrt
from pathlib import Path

import numpy as np

from .audio import AudioBuffer, Spectrogram, StftConfig, istft
from .errors import DomainError, FormatError, InvalidArgument, OrderTooHigh
from .geometry import MicArrayGeometry, SphericalPos
from .harmonics import hankel_all, n_coeffs, orders_for_flat, sh_matrix

SPEED_OF_SOUND = 343.0  # m/s at ~20 C

DC_POLICIES = ("zero", "copy_bin1")
SOLVERS = ("tikhonov", "pinv")

_MAGIC = b"SFCF"
_VERSION = 1


def max_order(n_mics: int) -> int:
    """Highest harmonic order N microphones support: floor(sqrt(N)) - 1.

    Spatial aliasing caps the encoding; 345 mics give order 17.
    """
    if n_mics < 1:
        raise InvalidArgument("n_mics must be >= 1")
    return isqrt(n_mics) - 1


@dataclass(frozen=True)
class EncoderConfig:
    order: int | None = None  # None: use max_order(n_mics)
    tikhonov_rel: float = 1e-6
    dc_policy: str = "zero"
    solver: str = "tikhonov"

    def __post_init__(self):
        if self.order is not None and self.order < 0:
            raise InvalidArgument("order must be >= 0")
        if self.tikhonov_rel < 0:
            raise InvalidArgument("tikhonov_rel must be >= 0")
        if self.dc_policy not in DC_POLICIES:
            raise InvalidArgument(f"dc_policy must be one of {DC_POLICIES}")
        if self.solver not in SOLVERS:
            raise InvalidArgument(f"solver must be one of {SOLVERS}")


@dataclass
class SoundFieldCoeffs:
    """Harmonic coefficients beta, (flat index, frame, bin) complex."""

    beta: np.ndarray
    order: int
    stft_config: StftConfig
    sample_rate: float
    nominal_radius: float
    v_sound: float = SPEED_OF_SOUND
    dc_policy: str = "zero"
    n_samples: int = 0  # time-domain length the frames cover

    def __post_init__(self):
        b = np.asarray(self.beta)
        if b.ndim != 3 or b.shape[0] != n_coeffs(self.order):
            raise InvalidArgument(
                f"beta must be ((order+1)^2, frames, bins); got {b.shape} "
                f"for order {self.order}"
            )
        if b.shape[2] != self.stft_config.n_bins:
            raise InvalidArgument("beta bin axis does not match the STFT config")
        self.beta = b.astype(np.complex128, copy=False)

    @property
    def n_frames(self) -> int:
        return self.beta.shape[1]

    @property
    def n_bins(self) -> int:
        return self.beta.shape[2]

    def bin_frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.stft_config.window_size, 1.0 / self.sample_rate)


def build_transfer_matrix(
    geom: MicArrayGeometry, freq: float, order: int, v_sound: float = SPEED_OF_SOUND
) -> np.ndarray:
    """N x (order+1)^2 matrix linking coefficients to mic observations."""
    if freq <= 0:
        raise DomainError(f"transfer matrix needs freq > 0, got {freq}")
    if order < 0:
        raise InvalidArgument("order must be >= 0")
    az, po, ra = geom.angles()
    k = 2.0 * np.pi * freq / v_sound
    ymat = sh_matrix(order, az, po)  # (N, M)
    hn = hankel_all(order, k * ra)  # (order+1, N)
    radial = hn[orders_for_flat(order)].T  # (N, M)
    return radial * ymat


def _solve_bin(tm: np.ndarray, s: np.ndarray, cfg: EncoderConfig) -> np.ndarray:
    if cfg.solver == "pinv":
        return np.linalg.pinv(tm) @ s
    smax = np.linalg.svd(tm, compute_uv=False)[0]
    lam = cfg.tikhonov_rel * smax * smax
    m = tm.shape[1]
    gram = tm.conj().T @ tm + lam * np.eye(m)
    return np.linalg.solve(gram, tm.conj().T @ s)


def encode(
    mic_specs: Spectrogram,
    geom: MicArrayGeometry,
    cfg: EncoderConfig | None = None,
    v_sound: float = SPEED_OF_SOUND,
    threads: int = 1,
) -> SoundFieldCoeffs:
    """Fit harmonic coefficients to microphone spectrograms, per bin."""
    cfg = cfg or EncoderConfig()
    n_mics = geom.n_mics
    if mic_specs.n_channels != n_mics:
        raise InvalidArgument(
            f"spectrogram has {mic_specs.n_channels} channels for {n_mics} mics"
        )
    k_max = max_order(n_mics)
    order = k_max if cfg.order is None else cfg.order
    if order > k_max:
        raise OrderTooHigh(
            f"order {order} exceeds floor(sqrt({n_mics})) - 1 = {k_max}"
        )
    freqs = mic_specs.bin_frequencies()
    n_bins = mic_specs.n_bins
    beta = np.zeros((n_coeffs(order), mic_specs.n_frames, n_bins), dtype=np.complex128)

    def work(fi: int) -> None:
        tm = build_transfer_matrix(geom, freqs[fi], order, v_sound)
        # (N, frames) observations for this bin
        s = mic_specs.values[:, :, fi]
        beta[:, :, fi] = _solve_bin(tm, s, cfg)

    bins = range(1, n_bins)  # bin 0 handled by dc_policy
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bins))
    else:
        for fi in bins:
            work(fi)
    if cfg.dc_policy == "copy_bin1" and n_bins > 1:
        beta[:, :, 0] = beta[:, :, 1]
    return SoundFieldCoeffs(
        beta=beta,
        order=order,
        stft_config=mic_specs.config,
        sample_rate=mic_specs.sample_rate,
        nominal_radius=geom.nominal_radius,
        v_sound=v_sound,
        dc_policy=cfg.dc_policy,
        n_samples=mic_specs.n_samples,
    )


def decode(
    coeffs: SoundFieldCoeffs,
    pos: SphericalPos,
    v_sound: float | None = None,
    threads: int = 1,
) -> Spectrogram:
    """Sound pressure spectrogram at one point.

    value(tau, f) = sum_nm beta_nm(tau, f) h_n(k r) Y_nm(azimuth, polar)
    """
    if pos.radius <= 0:
        raise DomainError("decode position needs r > 0 (Hankel singularity)")
    v = coeffs.v_sound if v_sound is None else v_sound
    freqs = coeffs.bin_frequencies()
    ymat = sh_matrix(coeffs.order, np.array([pos.azimuth]), np.array([pos.polar]))[0]
    ordvec = orders_for_flat(coeffs.order)
    out = np.zeros((1, coeffs.n_frames, coeffs.n_bins), dtype=np.complex128)

    def work(fi: int) -> None:
        k = 2.0 * np.pi * freqs[fi] / v
        trow = hankel_all(coeffs.order, np.array([k * pos.radius]))[ordvec, 0] * ymat
        out[0, :, fi] = trow @ coeffs.beta[:, :, fi]

    bins = range(1, coeffs.n_bins)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bins))
    else:
        for fi in bins:
            work(fi)
    if coeffs.dc_policy == "copy_bin1" and coeffs.n_bins > 1:
        out[0, :, 0] = out[0, :, 1]
    return Spectrogram(
        values=out,
        config=coeffs.stft_config,
        sample_rate=coeffs.sample_rate,
        n_samples=coeffs.n_samples,
    )


def render(
    coeffs: SoundFieldCoeffs,
    pos: SphericalPos,
    v_sound: float | None = None,
    threads: int = 1,
) -> AudioBuffer:
    """Decode at a point and return the time-domain signal."""
    return istft(decode(coeffs, pos, v_sound=v_sound, threads=threads))


def save_coeffs(path, coeffs: SoundFieldCoeffs) -> None:
    """Write the binary coefficient container plus a JSON sidecar.

    Layout: magic "SFCF", uint32 version, uint32 header length, header
    JSON (utf-8), then the complex64 little-endian tensor in
    (flat harmonic, frame, bin) C order.  The sidecar at <path>.json
    repeats the header for humans.
    """
    header = {
        "order": coeffs.order,
        "stft": coeffs.stft_config.to_dict(),
        "sample_rate": coeffs.sample_rate,
        "nominal_radius_m": coeffs.nominal_radius,
        "v_sound": coeffs.v_sound,
        "dc_policy": coeffs.dc_policy,
        "n_samples": coeffs.n_samples,
        "shape": list(coeffs.beta.shape),
        "dtype": "complex64-le",
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(coeffs.beta.astype("<c8")).tobytes())
    Path(str(path) + ".json").write_text(
        json.dumps(header, indent=2, sort_keys=True) + "\n"
    )


def load_coeffs(path) -> SoundFieldCoeffs:
    """Read a coefficient container written by :func:`save_coeffs`."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if len(raw) < 12 or raw[:4] != _MAGIC:
        raise FormatError(f"{path}: not a sound field coefficient file")
    version, hlen = struct.unpack("<II", raw[4:12])
    if version != _VERSION:
        raise FormatError(f"{path}: unsupported container version {version}")
    if len(raw) < 12 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode("utf-8"))
        shape = tuple(int(v) for v in header["shape"])
        data = np.frombuffer(raw[12 + hlen :], dtype="<c8")
        beta = data.reshape(shape).astype(np.complex128)
        return SoundFieldCoeffs(
            beta=beta,
            order=int(header["order"]),
            stft_config=StftConfig.from_dict(header["stft"]),
            sample_rate=float(header["sample_rate"]),
            nominal_radius=float(header["nominal_radius_m"]),
            v_sound=float(header["v_sound"]),
            dc_policy=str(header["dc_policy"]),
            n_samples=int(header["n_samples"]),
        )
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt coefficient container: {exc}") from exc
