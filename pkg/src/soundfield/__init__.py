"""Spherical-array sound field toolkit.

Encode microphone-sphere recordings into harmonic sound field
coefficients, render the field at arbitrary points, geometrically
time-warp body-worn microphone audio toward target positions, and
score results with spatialization losses and metrics.  A free-field
point-source simulator provides ground truth for all of it.
"""

from .audio import (
    AudioBuffer,
    Spectrogram,
    StftConfig,
    blackman,
    istft,
    read_wav,
    stft,
    write_wav,
)
from .baseline import naive_spatialize, naive_spatialize_array
from .codec import (
    EncoderConfig,
    SoundFieldCoeffs,
    build_transfer_matrix,
    decode,
    encode,
    load_coeffs,
    max_order,
    render,
    save_coeffs,
)
from .errors import (
    ConfigError,
    DegenerateInput,
    DegenerateReference,
    DomainError,
    FormatError,
    InvalidArgument,
    OrderTooHigh,
    SoundFieldError,
    UnsupportedFormat,
)
from .geometry import (
    MicArrayGeometry,
    PoseTrack,
    SphericalPos,
    cart_to_sph,
    euclidean_dist,
    fibonacci_sphere_array,
    sph_to_cart,
)
from .harmonics import sph_bessel_j, sph_hankel, sph_harmonic
from .losses import (
    CombinedLoss,
    MsStftConfig,
    ShiftL2Config,
    combined_loss,
    multiscale_stft_loss,
    shift_l2,
)
from .metrics import amplitude_error, phase_error, sdr
from .sim import SimScene, SimSource, load_scene, simulate_array, simulate_receiver
from .timewarp import WarpJointSet, Warpfield, apply_warp, compute_warpfield, warp_stack

__version__ = "0.1.0"
