"""Coordinate conventions, microphone-array and pose geometry.

Conventions used throughout the package:

* ``azimuth`` (theta) is the angle in the x-y plane measured from +x,
  canonicalized to [0, 2*pi).
* ``polar`` (phi) is the colatitude, i.e. the angle from the +z axis,
  in [0, pi], so that ``z = r * cos(phi)``.  Note this is *not* elevation.
* Cartesian coordinates are right-handed, in meters.

All trigonometry is done in 64-bit floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateInput, InvalidArgument

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SphericalPos:
    """Position in spherical coordinates (azimuth, colatitude, radius)."""

    azimuth: float
    polar: float
    radius: float

    def __post_init__(self):
        if not np.isfinite([self.azimuth, self.polar, self.radius]).all():
            raise InvalidArgument("spherical coordinates must be finite")
        if self.radius <= 0.0:
            raise InvalidArgument(f"radius must be > 0, got {self.radius}")
        if not 0.0 <= self.polar <= np.pi:
            raise InvalidArgument(f"polar angle must lie in [0, pi], got {self.polar}")
        object.__setattr__(self, "azimuth", float(self.azimuth) % TWO_PI)
        object.__setattr__(self, "polar", float(self.polar))
        object.__setattr__(self, "radius", float(self.radius))


def sph_to_cart(p: SphericalPos, unit: bool = False) -> np.ndarray:
    """Map spherical coordinates to Cartesian.

    With ``unit=True`` returns the direction vector
    ``(cos(az) sin(polar), sin(az) sin(polar), cos(polar))`` on the unit
    sphere; otherwise the direction is scaled by the radius.
    """
    sp = np.sin(p.polar)
    v = np.array([np.cos(p.azimuth) * sp, np.sin(p.azimuth) * sp, np.cos(p.polar)])
    return v if unit else p.radius * v


def cart_to_sph(v) -> SphericalPos:
    """Inverse of :func:`sph_to_cart`.

    The zero vector has no direction and raises :class:`DegenerateInput`.
    Points on the z axis get the canonical azimuth 0.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (3,):
        raise InvalidArgument(f"expected a 3-vector, got shape {v.shape}")
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise DegenerateInput("zero vector has no spherical representation")
    # arctan2(transverse, z) stays accurate near the poles where arccos(z/r)
    # loses half the significand
    polar = float(np.arctan2(np.hypot(v[0], v[1]), v[2]))
    azimuth = float(np.arctan2(v[1], v[0]))
    if v[0] == 0.0 and v[1] == 0.0:
        azimuth = 0.0
    return SphericalPos(azimuth=azimuth, polar=polar, radius=r)


def euclidean_dist(a, b) -> float:
    """Euclidean distance between two Cartesian points."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b))


@dataclass
class MicArrayGeometry:
    """Ordered set of named microphones on (or near) a sphere.

    Per-microphone radii may deviate slightly from ``nominal_radius``;
    the nominal value is what downstream consumers treat as the array
    radius.
    """

    mic_ids: list[str]
    positions: list[SphericalPos]
    nominal_radius: float

    def __post_init__(self):
        if not self.mic_ids:
            raise InvalidArgument("microphone array must have at least one mic")
        if len(self.mic_ids) != len(self.positions):
            raise InvalidArgument("mic_ids and positions must have equal length")
        if len(set(self.mic_ids)) != len(self.mic_ids):
            raise InvalidArgument("microphone ids must be unique")
        if self.nominal_radius <= 0.0:
            raise InvalidArgument("nominal_radius must be > 0")

    def __len__(self) -> int:
        return len(self.mic_ids)

    @property
    def n_mics(self) -> int:
        return len(self.mic_ids)

    def angles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (azimuths, polars, radii) as float64 arrays in mic order."""
        az = np.array([p.azimuth for p in self.positions])
        po = np.array([p.polar for p in self.positions])
        ra = np.array([p.radius for p in self.positions])
        return az, po, ra

    def cartesian(self) -> np.ndarray:
        """Mic positions as an (N, 3) Cartesian array."""
        return np.stack([sph_to_cart(p) for p in self.positions])

    @classmethod
    def from_json(cls, path) -> "MicArrayGeometry":
        """Load a mic-array description.

        Schema::

            {"nominal_radius_m": float,
             "mics": [{"id": str, "azimuth_rad": float, "polar_rad": float,
                       "radius_m": float?}, ...]}

        A missing ``radius_m`` defaults to the nominal radius.
        """
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: cannot read mic-array JSON: {exc}") from exc
        return cls.from_dict(doc, origin=str(path))

    @classmethod
    def from_dict(cls, doc: dict, origin: str = "<dict>") -> "MicArrayGeometry":
        try:
            nominal = float(doc["nominal_radius_m"])
            mics = doc["mics"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{origin}: missing/invalid field: {exc}") from exc
        ids, positions = [], []
        for i, m in enumerate(mics):
            try:
                ids.append(str(m["id"]))
                positions.append(
                    SphericalPos(
                        azimuth=float(m["azimuth_rad"]),
                        polar=float(m["polar_rad"]),
                        radius=float(m.get("radius_m", nominal)),
                    )
                )
            except (KeyError, TypeError, ValueError, InvalidArgument) as exc:
                raise ConfigError(f"{origin}: mics[{i}]: {exc}") from exc
        return cls(mic_ids=ids, positions=positions, nominal_radius=nominal)

    def to_dict(self) -> dict:
        return {
            "nominal_radius_m": self.nominal_radius,
            "mics": [
                {
                    "id": mid,
                    "azimuth_rad": p.azimuth,
                    "polar_rad": p.polar,
                    "radius_m": p.radius,
                }
                for mid, p in zip(self.mic_ids, self.positions)
            ],
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))


def fibonacci_sphere_array(
    n_mics: int, radius: float, id_prefix: str = "mic"
) -> MicArrayGeometry:
    """Near-uniform spherical mic layout (golden-angle spiral).

    Handy for simulations and tests; real captures load their geometry
    from JSON instead.
    """
    if n_mics < 1:
        raise InvalidArgument("n_mics must be >= 1")
    i = np.arange(n_mics) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n_mics)
    azimuth = (np.pi * (1.0 + np.sqrt(5.0)) * i) % TWO_PI
    width = max(3, len(str(n_mics - 1)))
    return MicArrayGeometry(
        mic_ids=[f"{id_prefix}{k:0{width}d}" for k in range(n_mics)],
        positions=[
            SphericalPos(azimuth=float(a), polar=float(p), radius=radius)
            for a, p in zip(azimuth, polar)
        ],
        nominal_radius=radius,
    )


# Joint names every pose track used for warping must be able to resolve.
WARP_JOINT_NAMES = ("left_hand", "right_hand", "left_foot", "right_foot", "nose", "hip")


@dataclass
class PoseTrack:
    """Sequence of 3D body-joint positions sampled at a fixed frame rate."""

    frames: np.ndarray  # (S, J, 3) meters
    joint_names: list[str]
    fps: float = 30.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 3 or self.frames.shape[2] != 3:
            raise InvalidArgument(f"frames must be (S, J, 3), got {self.frames.shape}")
        if self.frames.shape[1] != len(self.joint_names):
            raise InvalidArgument("joint_names length must match frames' joint axis")
        if len(set(self.joint_names)) != len(self.joint_names):
            raise InvalidArgument("joint names must be unique")
        if not self.fps > 0:
            raise InvalidArgument("fps must be > 0")
        if not np.isfinite(self.frames).all():
            raise InvalidArgument("pose frames must be finite")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def joint_index(self, name: str) -> int:
        try:
            return self.joint_names.index(name)
        except ValueError:
            raise InvalidArgument(
                f"unknown joint {name!r}; available: {self.joint_names}"
            ) from None

    def joint_positions(self, name: str) -> np.ndarray:
        """(S, 3) track of one joint."""
        return self.frames[:, self.joint_index(name), :]

    def frame_of_sample(self, t, sample_rate: float) -> np.ndarray:
        """Pose-frame index for audio sample(s) ``t``, clamped to [0, S-1].

        Frames are held piecewise constant over ``sample_rate / fps``
        samples (1600 samples at 48 kHz / 30 fps).
        """
        s = np.floor(np.asarray(t, dtype=np.float64) * self.fps / sample_rate)
        return np.clip(s, 0, self.n_frames - 1).astype(np.int64)

    @classmethod
    def from_json(cls, path) -> "PoseTrack":
        """Load a pose track.

        Schema::

            {"fps": 30, "joints": [names...], "frames": [[[x, y, z], ...], ...]}
        """
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: cannot read pose JSON: {exc}") from exc
        try:
            return cls(
                frames=np.asarray(doc["frames"], dtype=np.float64),
                joint_names=[str(j) for j in doc["joints"]],
                fps=float(doc.get("fps", 30.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: invalid pose track: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "fps": self.fps,
            "joints": list(self.joint_names),
            "frames": self.frames.tolist(),
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))


@dataclass
class StaticPose:
    """Convenience: a PoseTrack holding one repeated frame."""

    joints: dict = field(default_factory=dict)

    def track(self, n_frames: int, fps: float = 30.0) -> PoseTrack:
        names = list(self.joints)
        frame = np.array([self.joints[n] for n in names], dtype=np.float64)
        return PoseTrack(
            frames=np.repeat(frame[None, :, :], n_frames, axis=0),
            joint_names=names,
            fps=fps,
        )
