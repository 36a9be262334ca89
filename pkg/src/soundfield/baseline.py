"""Non-neural comparison spatializer: time warp plus distance gain.

The head-mic signal is treated as if emitted at the nose, warped to the
target by the pure propagation delay, and attenuated by 1/distance
relative to a reference distance.  Exact in free field when the true
source actually sits at the nose; any other source location shows up as
a geometry-dependent alignment error.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioBuffer
from .errors import InvalidArgument
from .geometry import MicArrayGeometry, PoseTrack
from .timewarp import DEFAULT_INPUT_MIC_JOINT, apply_warp, compute_warpfield

MIN_GAIN_DISTANCE = 0.05  # meters; bounds the 1/d gain


def naive_spatialize(
    audio: AudioBuffer,
    pose: PoseTrack,
    target,
    v_sound: float = 343.0,
    reference_distance: float = 1.0,
    head_joint: str = DEFAULT_INPUT_MIC_JOINT,
) -> AudioBuffer:
    """Warp a mono head-mic signal to a target point with 1/d gain.

    Source and input-mic proxy are both the head joint, so the warp is a
    pure head-to-target delay; the gain reference_distance / d(head,
    target) follows the pose per frame, with the distance clamped below
    at 0.05 m to bound the gain.
    """
    if audio.n_channels != 1:
        raise InvalidArgument("naive_spatialize expects a single-channel input")
    target = np.asarray(target, dtype=np.float64)
    wf = compute_warpfield(
        pose,
        src_joint=head_joint,
        input_mic_joint=head_joint,
        target=target,
        v_sound=v_sound,
        sample_rate=audio.sample_rate,
        n_samples=audio.n_samples,
    )
    warped = apply_warp(audio, wf)
    head = pose.joint_positions(head_joint)
    s_idx = pose.frame_of_sample(np.arange(audio.n_samples), audio.sample_rate)
    dist = np.linalg.norm(target[None, :] - head[s_idx], axis=1)
    gain = reference_distance / np.maximum(dist, MIN_GAIN_DISTANCE)
    return AudioBuffer(warped.samples * gain[None, :], audio.sample_rate)


def naive_spatialize_array(
    audio: AudioBuffer,
    pose: PoseTrack,
    geom: MicArrayGeometry,
    v_sound: float = 343.0,
    reference_distance: float = 1.0,
    head_joint: str = DEFAULT_INPUT_MIC_JOINT,
) -> AudioBuffer:
    """Per-microphone :func:`naive_spatialize`, channels in geometry order."""
    chans = [
        naive_spatialize(
            audio,
            pose,
            target,
            v_sound=v_sound,
            reference_distance=reference_distance,
            head_joint=head_joint,
        ).samples[0]
        for target in geom.cartesian()
    ]
    return AudioBuffer(np.stack(chans), audio.sample_rate)
