"""Geometric time warping of microphone audio toward target positions.

For a candidate source joint and an input-microphone proxy joint, the
per-sample propagation-delay difference between "source to target" and
"source to input mic" defines fractional read indices into the input
signal; reading there aligns the input with what the target position
hears.  The read index may run ahead of the output sample index: a
target close to the source hears the sound before the head-mounted
input microphone does, so the warp is allowed to be non-causal.

Monotonicity of the read indices is enforced with a running maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .audio import AudioBuffer
from .errors import InvalidArgument
from .geometry import WARP_JOINT_NAMES, PoseTrack

DEFAULT_INPUT_MIC_JOINT = "nose"


@dataclass
class Warpfield:
    """Monotone fractional read indices, one per output sample."""

    rho: np.ndarray
    sample_rate: float

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.float64)
        if rho.ndim != 1:
            raise InvalidArgument("rho must be a 1-D array")
        if not np.isfinite(rho).all():
            raise InvalidArgument("rho must be finite")
        if rho.size > 1 and (np.diff(rho) < 0).any():
            raise InvalidArgument("rho must be monotone non-decreasing")
        self.rho = rho

    def __len__(self) -> int:
        return self.rho.shape[0]


@dataclass(frozen=True)
class WarpJointSet:
    """Ordered candidate source joints for warping."""

    joints: tuple[str, ...] = WARP_JOINT_NAMES

    def __post_init__(self):
        if not self.joints:
            raise InvalidArgument("joint set must not be empty")
        if len(set(self.joints)) != len(self.joints):
            raise InvalidArgument("joint names must be unique")


def compute_warpfield(
    pose: PoseTrack,
    src_joint: str,
    input_mic_joint: str,
    target,
    v_sound: float = 343.0,
    sample_rate: float = 48000.0,
    n_samples: int | None = None,
) -> Warpfield:
    """Warpfield aligning the input-mic signal with a target position.

    With d1 = |target - source(s)| and d2 = |input_mic(s) - source(s)|
    evaluated at the pose frame s covering sample t, the signal reaching
    the target lags the input recording by (d1 - d2) / v_sound, so

        rho_t = max(rho_{t-1}, t - (d1 - d2) / v_sound * sample_rate)

    with rho_0 additionally clamped to >= 0.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (3,):
        raise InvalidArgument(f"target must be a 3-vector, got {target.shape}")
    if n_samples is None or n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    src = pose.joint_positions(src_joint)
    inp = pose.joint_positions(input_mic_joint)
    s_idx = pose.frame_of_sample(np.arange(n_samples), sample_rate)
    d1 = np.linalg.norm(target[None, :] - src[s_idx], axis=1)
    d2 = np.linalg.norm(inp[s_idx] - src[s_idx], axis=1)
    delay_samples = (d1 - d2) / v_sound * sample_rate
    raw = np.arange(n_samples, dtype=np.float64) - delay_samples
    raw[0] = max(raw[0], 0.0)
    return Warpfield(rho=np.maximum.accumulate(raw), sample_rate=sample_rate)


def apply_warp(signal: AudioBuffer, wf: Warpfield) -> AudioBuffer:
    """Read a mono signal at the warpfield's fractional indices.

    Linear interpolation; reads outside the signal clamp to its first or
    last sample (avoids boundary clicks; the edges are therefore not
    sample-exact).
    """
    if signal.n_channels != 1:
        raise InvalidArgument("apply_warp expects a single-channel signal")
    if signal.n_samples != len(wf):
        raise InvalidArgument(
            f"signal length {signal.n_samples} != warpfield length {len(wf)}"
        )
    out = kernels.fractional_read(signal.samples[0], wf.rho, kernels.EDGE_CLAMP)
    return AudioBuffer(out[None, :], signal.sample_rate)


def warp_stack(
    audio: AudioBuffer,
    pose: PoseTrack,
    target,
    joints=None,
    input_mic_joint: str = DEFAULT_INPUT_MIC_JOINT,
    v_sound: float = 343.0,
) -> AudioBuffer:
    """Original plus one warped copy per candidate joint, per channel.

    Output channel order: for each input channel, the unwarped original
    first, then one warp per joint in the configured order; so C_in
    inputs and J joints give C_in * (1 + J) channels.
    """
    if joints is None:
        joints = WarpJointSet()
    names = joints.joints if isinstance(joints, WarpJointSet) else tuple(joints)
    fields = [
        compute_warpfield(
            pose,
            src_joint=j,
            input_mic_joint=input_mic_joint,
            target=target,
            v_sound=v_sound,
            sample_rate=audio.sample_rate,
            n_samples=audio.n_samples,
        )
        for j in names
    ]
    chans = []
    for c in range(audio.n_channels):
        ch = audio.channel(c)
        chans.append(ch.samples[0])
        for wf in fields:
            chans.append(apply_warp(ch, wf).samples[0])
    return AudioBuffer(np.stack(chans), audio.sample_rate)
