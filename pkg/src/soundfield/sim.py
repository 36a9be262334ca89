"""Free-field point-source simulator.

Each source contributes its signal delayed by distance/v_sound and
scaled by reference_distance/distance.  Sources may move: positions are
held piecewise constant over each pose frame, so delays change stepwise
(no continuous Doppler).  Fractional delays use linear interpolation by
default; a windowed-sinc mode is available where oracle-grade accuracy
is needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .audio import AudioBuffer, read_wav
from .errors import ConfigError, DegenerateInput, InvalidArgument
from .geometry import MicArrayGeometry, PoseTrack

MIN_SOURCE_DISTANCE = 1e-3  # meters


@dataclass
class SimSource:
    """A point source: mono signal plus a static position or a track."""

    signal: AudioBuffer
    position: np.ndarray  # (3,) static or (S, 3) one position per pose frame
    fps: float = 30.0

    def __post_init__(self):
        if self.signal.n_channels != 1:
            raise InvalidArgument("source signals must be single-channel")
        pos = np.asarray(self.position, dtype=np.float64)
        if pos.shape != (3,) and not (pos.ndim == 2 and pos.shape[1] == 3):
            raise InvalidArgument(f"position must be (3,) or (S, 3), got {pos.shape}")
        if not np.isfinite(pos).all():
            raise InvalidArgument("source positions must be finite")
        self.position = pos

    @property
    def moving(self) -> bool:
        return self.position.ndim == 2

    def positions_per_frame(self, n_frames: int) -> np.ndarray:
        if not self.moving:
            return np.repeat(self.position[None, :], n_frames, axis=0)
        reps = self.position
        if reps.shape[0] < n_frames:  # hold last frame
            pad = np.repeat(reps[-1:], n_frames - reps.shape[0], axis=0)
            reps = np.concatenate([reps, pad])
        return reps[:n_frames]


@dataclass
class SimScene:
    sources: list[SimSource]
    v_sound: float = 343.0
    reference_distance: float = 1.0
    interp: str = "linear"  # or "sinc"
    sinc_half_width: int = 64

    def __post_init__(self):
        if not self.sources:
            raise InvalidArgument("scene needs at least one source")
        if self.v_sound <= 0 or self.reference_distance <= 0:
            raise InvalidArgument("v_sound and reference_distance must be > 0")
        if self.interp not in ("linear", "sinc"):
            raise InvalidArgument(f"interp must be 'linear' or 'sinc', got {self.interp!r}")
        rates = {s.signal.sample_rate for s in self.sources}
        if len(rates) != 1:
            raise InvalidArgument(f"all source signals must share a sample rate, got {rates}")

    @property
    def sample_rate(self) -> float:
        return self.sources[0].signal.sample_rate

    @property
    def n_samples(self) -> int:
        return max(s.signal.n_samples for s in self.sources)


def _sinc_taps(frac: float, half_width: int) -> np.ndarray:
    u = np.arange(-half_width, half_width + 1, dtype=np.float64) - frac
    w = 0.42 + 0.5 * np.cos(np.pi * u / half_width) + 0.08 * np.cos(2 * np.pi * u / half_width)
    w[np.abs(u) > half_width] = 0.0
    return np.sinc(u) * w


def _delayed_block_sinc(x: np.ndarray, t0: int, t1: int, delay: float, hw: int) -> np.ndarray:
    """x read at positions t - delay for t in [t0, t1), windowed-sinc interp."""
    i0 = int(np.floor(t0 - delay))
    frac = (t0 - delay) - i0
    taps = _sinc_taps(frac, hw)
    lo, hi = i0 - hw, i0 + (t1 - t0 - 1) + hw  # inclusive source index range
    seg = np.zeros(hi - lo + 1)
    a, b = max(lo, 0), min(hi, x.shape[0] - 1)
    if a <= b:
        seg[a - lo : b - lo + 1] = x[a : b + 1]
    # out[t] = sum_j seg[(t - t0) + j + hw... ] * taps reversed -> valid correlation
    return np.convolve(seg, taps[::-1], mode="valid")


def simulate_receiver(scene: SimScene, receiver) -> AudioBuffer:
    """Sound pressure signal at one receiver position."""
    recv = np.asarray(receiver, dtype=np.float64)
    if recv.shape != (3,):
        raise InvalidArgument(f"receiver must be a 3-vector, got {recv.shape}")
    sr = scene.sample_rate
    n = scene.n_samples
    out = np.zeros(n)
    t_axis = np.arange(n, dtype=np.float64)
    for src in scene.sources:
        block = sr / src.fps  # samples per pose frame
        n_frames = int(np.floor((n - 1) / block)) + 1
        pos = src.positions_per_frame(n_frames)
        dists = np.linalg.norm(pos - recv[None, :], axis=1)
        if (dists < MIN_SOURCE_DISTANCE).any():
            raise DegenerateInput(
                f"receiver within {MIN_SOURCE_DISTANCE} m of a source position"
            )
        x = src.signal.samples[0]
        gains = scene.reference_distance / dists
        delays = dists / scene.v_sound * sr
        if not src.moving:
            d, g = float(delays[0]), float(gains[0])
            if scene.interp == "linear":
                out += g * kernels.fractional_read(x, t_axis - d, kernels.EDGE_ZERO)
            else:
                out += g * _delayed_block_sinc(x, 0, n, d, scene.sinc_half_width)
        else:
            for s in range(n_frames):
                t0 = int(np.ceil(s * block)) if s else 0
                t1 = min(int(np.ceil((s + 1) * block)), n)
                if t0 >= t1:
                    continue
                if scene.interp == "linear":
                    rho = t_axis[t0:t1] - delays[s]
                    out[t0:t1] += gains[s] * kernels.fractional_read(
                        x, rho, kernels.EDGE_ZERO
                    )
                else:
                    out[t0:t1] += gains[s] * _delayed_block_sinc(
                        x, t0, t1, delays[s], scene.sinc_half_width
                    )
    return AudioBuffer(out[None, :], sr)


def simulate_array(scene: SimScene, geom: MicArrayGeometry) -> AudioBuffer:
    """Per-microphone simulation, channels in geometry order."""
    chans = [simulate_receiver(scene, p).samples[0] for p in geom.cartesian()]
    return AudioBuffer(np.stack(chans), scene.sample_rate)


def load_scene(path) -> SimScene:
    """Load a scene description.

    Schema::

        {"v_sound": 343.0, "reference_distance_m": 1.0,
         "interp": "linear"|"sinc"?,
         "sources": [{"wav": "sig.wav", "position": [x, y, z]}
                     | {"wav": "sig.wav",
                        "joint_track": {"pose": "pose.json", "joint": "left_hand"}}]}

    WAV and pose paths are resolved relative to the scene file.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read scene JSON: {exc}") from exc
    base = path.parent
    try:
        entries = doc["sources"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: missing 'sources' list") from exc
    sources = []
    for i, e in enumerate(entries):
        try:
            sig = read_wav(base / e["wav"])
            if "position" in e:
                srcpos = np.asarray(e["position"], dtype=np.float64)
                fps = 30.0
            else:
                jt = e["joint_track"]
                track = PoseTrack.from_json(base / jt["pose"])
                srcpos = track.joint_positions(str(jt["joint"]))
                fps = track.fps
            sources.append(SimSource(signal=sig, position=srcpos, fps=fps))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: sources[{i}]: {exc}") from exc
    return SimScene(
        sources=sources,
        v_sound=float(doc.get("v_sound", 343.0)),
        reference_distance=float(doc.get("reference_distance_m", 1.0)),
        interp=str(doc.get("interp", "linear")),
        sinc_half_width=int(doc.get("sinc_half_width", 64)),
    )
