"""Command-line interface.

Subcommands: simulate, encode, render, warp, baseline, loss, eval, demo.
Numeric results go to stdout as JSON (stable key order); diagnostics go
to stderr.  Every command is a pure function of its inputs, so repeated
runs produce bit-identical files and output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import codec, losses, metrics, sim, timewarp
from .audio import AudioBuffer, StftConfig, read_wav, stft, write_wav
from .baseline import naive_spatialize, naive_spatialize_array
from .errors import ConfigError, InvalidArgument, SoundFieldError
from .geometry import (
    MicArrayGeometry,
    PoseTrack,
    SphericalPos,
    cart_to_sph,
    fibonacci_sphere_array,
    sph_to_cart,
)


def _parse_vec3(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"expected 'x,y,z', got {text!r}")
    try:
        return np.array([float(p.strip()) for p in parts])
    except ValueError as exc:
        raise ConfigError(f"bad coordinate triple {text!r}: {exc}") from exc


def _emit(doc: dict, pretty: bool) -> None:
    indent = 2 if pretty else None
    print(json.dumps(doc, sort_keys=True, indent=indent))


def _resolve_threads(args) -> int:
    env = os.environ.get("SOUNDFIELD_THREADS", "").strip()
    if env:
        return max(1, int(env))
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _load_mics(path: Path, geom: MicArrayGeometry) -> AudioBuffer:
    """Mic recordings: a multichannel WAV or a directory of <id>.wav."""
    if path.is_dir():
        chans, rate = [], None
        for mid in geom.mic_ids:
            buf = read_wav(path / f"{mid}.wav")
            if buf.n_channels != 1:
                raise InvalidArgument(f"{mid}.wav must be mono")
            if rate is None:
                rate = buf.sample_rate
            elif rate != buf.sample_rate:
                raise InvalidArgument("mic WAVs disagree on sample rate")
            chans.append(buf.samples[0])
        lengths = {c.shape[0] for c in chans}
        if len(lengths) != 1:
            raise InvalidArgument(f"mic WAVs disagree on length: {sorted(lengths)}")
        return AudioBuffer(np.stack(chans), rate)
    buf = read_wav(path)
    if buf.n_channels != geom.n_mics:
        raise InvalidArgument(
            f"{path} has {buf.n_channels} channels, array has {geom.n_mics} mics"
        )
    return buf


def cmd_simulate(args) -> dict:
    scene = sim.load_scene(args.scene)
    if args.sinc:
        scene.interp = "sinc"
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.array:
        geom = MicArrayGeometry.from_json(args.array)
        audio = sim.simulate_array(scene, geom)
        for i, mid in enumerate(geom.mic_ids):
            write_wav(out_dir / f"{mid}.wav", audio.channel(i))
            written.append(f"{mid}.wav")
    else:
        recv = _parse_vec3(args.receiver)
        audio = sim.simulate_receiver(scene, recv)
        write_wav(out_dir / "receiver.wav", audio)
        written.append("receiver.wav")
    return {"out_dir": str(out_dir), "outputs": written, "n_receivers": len(written)}


def cmd_encode(args) -> dict:
    geom = MicArrayGeometry.from_json(args.array)
    mics = _load_mics(Path(args.mics), geom)
    stft_cfg = StftConfig(window_size=args.stft_window, hop=args.stft_hop)
    spec = stft(mics, stft_cfg)
    enc_cfg = codec.EncoderConfig(
        order=args.order, tikhonov_rel=args.tikhonov, dc_policy=args.dc_policy
    )
    coeffs = codec.encode(
        spec, geom, enc_cfg, v_sound=args.v_sound, threads=_resolve_threads(args)
    )
    codec.save_coeffs(args.out, coeffs)
    return {
        "out": args.out,
        "order": coeffs.order,
        "n_frames": coeffs.n_frames,
        "n_bins": coeffs.n_bins,
        "max_order_supported": codec.max_order(geom.n_mics),
    }


def cmd_render(args) -> dict:
    coeffs = codec.load_coeffs(args.coeffs)
    if args.at_sph:
        a, p, r = (float(v.strip()) for v in args.at_sph.split(","))
        pos = SphericalPos(azimuth=a, polar=p, radius=r)
    else:
        pos = cart_to_sph(_parse_vec3(args.at_xyz))
    audio = codec.render(coeffs, pos, threads=_resolve_threads(args))
    write_wav(args.out, audio)
    return {
        "out": args.out,
        "azimuth_rad": pos.azimuth,
        "polar_rad": pos.polar,
        "radius_m": pos.radius,
        "n_samples": audio.n_samples,
    }


def cmd_warp(args) -> dict:
    audio = read_wav(args.input)
    pose = PoseTrack.from_json(args.pose)
    target = _parse_vec3(args.target)
    joints = tuple(j.strip() for j in args.joints.split(",")) if args.joints else None
    out = timewarp.warp_stack(
        audio,
        pose,
        target,
        joints=joints,
        input_mic_joint=args.input_mic_joint,
        v_sound=args.v_sound,
    )
    write_wav(args.out, out)
    return {
        "out": args.out,
        "n_channels_in": audio.n_channels,
        "n_channels_out": out.n_channels,
    }


def cmd_baseline(args) -> dict:
    audio = read_wav(args.input)
    pose = PoseTrack.from_json(args.pose)
    if args.array:
        geom = MicArrayGeometry.from_json(args.array)
        out = naive_spatialize_array(
            audio, pose, geom, v_sound=args.v_sound,
            reference_distance=args.ref_distance,
        )
    else:
        out = naive_spatialize(
            audio, pose, _parse_vec3(args.target), v_sound=args.v_sound,
            reference_distance=args.ref_distance,
        )
    write_wav(args.out, out)
    return {"out": args.out, "n_channels": out.n_channels}


def cmd_loss(args) -> dict:
    est = read_wav(args.est)
    ref = read_wav(args.ref)
    shift_cfg = losses.ShiftL2Config(
        seg_len=args.seg_len, alpha=args.alpha, delta=args.delta,
        sigma_scope=args.sigma_scope,
    )
    result = losses.combined_loss(est, ref, shift_cfg=shift_cfg)
    return {
        "shift_l2": result.shift_l2,
        "ms_stft": result.ms_stft,
        "combined": result.combined,
    }


def _metric_dict(est: AudioBuffer, ref: AudioBuffer, cfg: StftConfig) -> dict:
    return {
        "sdr_db": metrics.sdr(est, ref),
        "amplitude_x1000": metrics.amplitude_error(est, ref, cfg),
        "phase_rad": metrics.phase_error(est, ref, cfg),
    }


def _read_wav_or_dir(path: Path) -> AudioBuffer:
    """A WAV file, or a directory of WAVs stacked as channels (sorted names)."""
    if not path.is_dir():
        return read_wav(path)
    names = sorted(p.name for p in path.glob("*.wav"))
    if not names:
        raise InvalidArgument(f"{path}: no .wav files")
    chans, rate = [], None
    for name in names:
        buf = read_wav(path / name)
        if rate is None:
            rate = buf.sample_rate
        elif rate != buf.sample_rate:
            raise InvalidArgument(f"{path}: WAVs disagree on sample rate")
        chans.extend(buf.samples)
    lengths = {c.shape[0] for c in chans}
    if len(lengths) != 1:
        raise InvalidArgument(f"{path}: WAVs disagree on length: {sorted(lengths)}")
    return AudioBuffer(np.stack(chans), rate)


def cmd_eval(args) -> dict:
    est = _read_wav_or_dir(Path(args.est))
    ref = _read_wav_or_dir(Path(args.ref))
    cfg = StftConfig(window_size=args.stft_window, hop=args.stft_hop)
    per_channel = [
        _metric_dict(est.channel(c), ref.channel(c), cfg)
        for c in range(est.n_channels)
    ]
    avg = {
        key: float(np.mean([ch[key] for ch in per_channel]))
        for key in per_channel[0]
    }
    doc = dict(avg)
    doc["per_channel"] = per_channel
    return doc


def cmd_demo(args) -> dict:
    """One self-contained pipeline: simulate -> encode -> render -> eval."""
    rng = np.random.default_rng(args.seed)
    out_dir = Path(args.out)
    sr, dur = 48000, 0.4
    n = int(sr * dur)

    # band-limited noise source inside a small mic sphere
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    spectrum[(freqs < 300.0) | (freqs > 900.0)] = 0.0
    signal = np.fft.irfft(spectrum, n)
    signal /= np.abs(signal).max()
    source_pos = np.array([0.18, 0.08, 0.04])  # inside the aliasing-safe radius

    geom = fibonacci_sphere_array(25, 1.5)
    scene = sim.SimScene(
        sources=[sim.SimSource(signal=AudioBuffer(signal, sr), position=source_pos)],
        interp="sinc",
    )
    mics = sim.simulate_array(scene, geom)
    mics_dir = out_dir / "mics"
    for i, mid in enumerate(geom.mic_ids):
        write_wav(mics_dir / f"{mid}.wav", mics.channel(i))
    geom.to_json(out_dir / "array.json")

    stft_cfg = StftConfig(window_size=512, hop=128)
    spec = stft(mics, stft_cfg)
    coeffs = codec.encode(spec, geom, threads=_resolve_threads(args))
    codec.save_coeffs(out_dir / "field.sfc", coeffs)

    held = cart_to_sph(np.array([0.0, 1.06066017177982, 1.06066017177982]))
    rendered = codec.render(coeffs, held, threads=_resolve_threads(args))
    truth = sim.simulate_receiver(scene, sph_to_cart(held))
    write_wav(out_dir / "held_rendered.wav", rendered)
    write_wav(out_dir / "held_truth.wav", truth)

    cfg_eval = StftConfig(window_size=512, hop=128)
    report = {
        "order": coeffs.order,
        "n_mics": geom.n_mics,
        "held_out": _metric_dict(rendered, truth, cfg_eval),
        "loss": _loss_dict(rendered, truth),
        "files": [
            "array.json",
            "field.sfc",
            "field.sfc.json",
            "held_rendered.wav",
            "held_truth.wav",
            "mics/",
        ],
    }
    (out_dir / "demo.json").write_text(json.dumps(report, sort_keys=True, indent=2))
    return report


def _loss_dict(est: AudioBuffer, ref: AudioBuffer) -> dict:
    result = losses.combined_loss(est, ref)
    return {
        "shift_l2": result.shift_l2,
        "ms_stft": result.ms_stft,
        "combined": result.combined,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soundfield",
        description="Sound field encoding, rendering, warping, and evaluation.",
    )
    parser.add_argument("--pretty", action="store_true", help="indent JSON output")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: all cores; env SOUNDFIELD_THREADS overrides)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scene at receivers")
    p.add_argument("scene", help="scene JSON")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--array", help="mic array JSON")
    g.add_argument("--receiver", help="single receiver 'x,y,z'")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sinc", action="store_true", help="windowed-sinc delays")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("encode", help="encode mic WAVs into coefficients")
    p.add_argument("--mics", required=True, help="multichannel WAV or dir of <id>.wav")
    p.add_argument("--array", required=True, help="mic array JSON")
    p.add_argument("--order", type=int, default=None, help="harmonic order")
    p.add_argument("--tikhonov", type=float, default=1e-6)
    p.add_argument("--dc-policy", choices=codec.DC_POLICIES, default="zero")
    p.add_argument("--stft-window", type=int, default=1024)
    p.add_argument("--stft-hop", type=int, default=256)
    p.add_argument("--v-sound", type=float, default=codec.SPEED_OF_SOUND)
    p.add_argument("--out", required=True, help="output .sfc path")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("render", help="render coefficients at a point")
    p.add_argument("coeffs", help=".sfc file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--at-sph", help="'azimuth,polar,radius' (rad, rad, m)")
    g.add_argument("--at-xyz", help="'x,y,z' meters")
    p.add_argument("--out", required=True, help="output WAV")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("warp", help="time-warp input audio toward a target")
    p.add_argument("--input", required=True, help="input WAV")
    p.add_argument("--pose", required=True, help="pose track JSON")
    p.add_argument("--target", required=True, help="'x,y,z'")
    p.add_argument("--joints", default=None, help="comma-separated joint names")
    p.add_argument("--input-mic-joint", default=timewarp.DEFAULT_INPUT_MIC_JOINT)
    p.add_argument("--v-sound", type=float, default=343.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("baseline", help="naive warp+gain spatializer")
    p.add_argument("--input", required=True, help="mono head-mic WAV")
    p.add_argument("--pose", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--target", help="'x,y,z'")
    g.add_argument("--array", help="mic array JSON")
    p.add_argument("--v-sound", type=float, default=343.0)
    p.add_argument("--ref-distance", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("loss", help="shift-l2 / multiscale STFT losses")
    p.add_argument("est")
    p.add_argument("ref")
    p.add_argument("--seg-len", type=int, default=128)
    p.add_argument("--alpha", type=float, default=100.0)
    p.add_argument("--delta", type=float, default=0.001)
    p.add_argument("--sigma-scope", choices=("segment", "clip"), default="segment")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("eval", help="SDR / amplitude / phase metrics")
    p.add_argument("est", help="WAV file or directory of WAVs")
    p.add_argument("ref", help="WAV file or directory of WAVs")
    p.add_argument("--stft-window", type=int, default=1024)
    p.add_argument("--stft-hop", type=int, default=256)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("demo", help="simulate + encode + render + eval pipeline")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except SoundFieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(doc, args.pretty)
    return 0


if __name__ == "__main__":
    sys.exit(main())
