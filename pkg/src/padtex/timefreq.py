"""Speech-to-image transforms: STFT, LFCC, CQT, CQCC and grayscale rendering.

All four transforms map an AudioClip to a real matrix (frequency bins or
cepstral coefficients x time frames). STFT/CQT values are log-power in dB;
LFCC/CQCC hold cepstral coefficients. `render_gray_image` turns any of them
into an 8-bit texture image at native resolution (one pixel per matrix
entry, no resizing).

The constant-Q transform evaluates, for every bin, an exact Hann-windowed
DFT at the bin's center frequency with a per-bin window length
N_j = ceil(Q * fs / f_j). The implementation decomposes the Hann window
into three complex exponentials and reads windowed sums out of cumulative
sums of demodulated signals, which is algebraically identical to the naive
per-bin windowed DFT but runs in O(bins * len) instead of
O(bins * frames * N_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .audio_io import AudioClip
from .errors import DataError

__all__ = [
    "TimeFreqMatrix",
    "GrayImage",
    "stft_frames",
    "stft_power",
    "linear_triangular_filterbank",
    "lfcc_matrix",
    "cqt_bin_frequencies",
    "cqt_window_lengths",
    "cqt_linear_power",
    "cqt_power",
    "cqcc_matrix",
    "render_gray_image",
    "dct_ortho",
    "write_pgm",
    "read_pgm",
]

POWER_FLOOR = 1e-10  # epsilon inside 10*log10(power + eps); -100 dB silence floor

KIND_STFT = "stft"
KIND_LFCC = "lfcc"
KIND_CQT = "cqt"
KIND_CQCC = "cqcc"
_DB_KINDS = (KIND_STFT, KIND_CQT)
_CEPSTRAL_KINDS = (KIND_LFCC, KIND_CQCC)


@dataclass(frozen=True)
class TimeFreqMatrix:
    """Real matrix of a time-frequency representation.

    Rows are frequency bins (STFT/CQT, with `bin_frequencies` in Hz) or
    cepstral coefficient indices (LFCC/CQCC). Columns are time frames,
    `hop_seconds` apart.
    """

    values: np.ndarray
    kind: str
    bin_frequencies: np.ndarray
    hop_seconds: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(
            self, "bin_frequencies", np.asarray(self.bin_frequencies, dtype=np.float64)
        )
        if self.kind not in _DB_KINDS + _CEPSTRAL_KINDS:
            raise DataError(f"unknown time-frequency kind {self.kind!r}")
        if values.ndim != 2:
            raise DataError("time-frequency values must be a 2-D matrix")
        if not np.all(np.isfinite(values)):
            raise DataError("time-frequency matrix contains non-finite values")

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image; row 0 is the lowest frequency/coefficient."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels)
        if pixels.dtype != np.uint8:
            raise DataError("GrayImage pixels must be uint8")
        if pixels.ndim != 2:
            raise DataError("GrayImage pixels must be 2-D")
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _hann_periodic(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def dct_ortho(values: np.ndarray, n_coeffs: int) -> np.ndarray:
    """Orthonormal DCT-II along axis 0, truncated to the first n_coeffs rows.

    A constant column c maps to (sqrt(rows)*c, 0, ..., 0).
    """
    return dct(np.asarray(values, dtype=np.float64), type=2, axis=0,
               norm="ortho")[:n_coeffs]


def stft_frames(clip: AudioClip, window_len: int, hop: int, fft_len: int) -> np.ndarray:
    """Complex STFT, shape (fft_len//2 + 1, n_frames), Hann window.

    Frame t covers samples [t*hop, t*hop + window_len); the window is
    zero-padded to fft_len before the FFT.
    """
    if window_len > fft_len:
        raise DataError(f"window_len {window_len} exceeds fft_len {fft_len}")
    if hop < 1:
        raise DataError("hop must be >= 1")
    x = clip.samples
    if x.size < window_len:
        raise DataError(f"clip of {x.size} samples shorter than one window ({window_len})")
    n_frames = (x.size - window_len) // hop + 1
    window = _hann_periodic(window_len)
    idx = np.arange(window_len)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = x[idx] * window
    return np.fft.rfft(frames, n=fft_len, axis=1).T


def stft_power(clip: AudioClip, window_len: int = 512, hop: int = 256,
               fft_len: int = 512) -> TimeFreqMatrix:
    """Log-power STFT spectrogram in dB: 10*log10(|X|^2 + 1e-10)."""
    spec = stft_frames(clip, window_len, hop, fft_len)
    values = 10.0 * np.log10(np.abs(spec) ** 2 + POWER_FLOOR)
    freqs = np.arange(fft_len // 2 + 1) * (clip.sample_rate / fft_len)
    return TimeFreqMatrix(values=values, kind=KIND_STFT, bin_frequencies=freqs,
                          hop_seconds=hop / clip.sample_rate)


def linear_triangular_filterbank(n_filters: int, fft_len: int,
                                 sample_rate: int) -> np.ndarray:
    """Triangular filters with linearly spaced centers on the rfft bin grid.

    Returns (n_filters, fft_len//2 + 1); filter i rises from edge i to
    edge i+1 and falls to edge i+2, edges = linspace(0, Nyquist, n+2).
    """
    if n_filters < 2:
        raise DataError("need at least 2 filters")
    nyquist = sample_rate / 2.0
    bin_freqs = np.arange(fft_len // 2 + 1) * (sample_rate / fft_len)
    edges = np.linspace(0.0, nyquist, n_filters + 2)
    bank = np.zeros((n_filters, bin_freqs.size))
    for i in range(n_filters):
        left, center, right = edges[i], edges[i + 1], edges[i + 2]
        rising = (bin_freqs - left) / (center - left)
        falling = (right - bin_freqs) / (right - center)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def lfcc_matrix(clip: AudioClip, n_filters: int = 40, n_coeffs: int = 20,
                window_len: int | None = None, hop: int | None = None,
                fft_len: int = 512) -> TimeFreqMatrix:
    """Linear frequency cepstral coefficients, one column per frame.

    Per frame: triangular filterbank energies of the power spectrum, natural
    log, orthonormal DCT-II, first n_coeffs coefficients kept. Defaults to a
    20 ms window and 10 ms hop.
    """
    if window_len is None:
        window_len = int(round(0.020 * clip.sample_rate))
    if hop is None:
        hop = int(round(0.010 * clip.sample_rate))
    if n_coeffs > n_filters:
        raise DataError(f"n_coeffs {n_coeffs} exceeds n_filters {n_filters}")
    spec = stft_frames(clip, window_len, hop, fft_len)
    power = np.abs(spec) ** 2
    bank = linear_triangular_filterbank(n_filters, fft_len, clip.sample_rate)
    energies = bank @ power
    log_energies = np.log(energies + POWER_FLOOR)
    coeffs = dct_ortho(log_energies, n_coeffs)
    return TimeFreqMatrix(values=coeffs, kind=KIND_LFCC,
                          bin_frequencies=np.arange(n_coeffs, dtype=np.float64),
                          hop_seconds=hop / clip.sample_rate)


def cqt_bin_frequencies(f_min: float, bins_per_octave: int, n_octaves: int) -> np.ndarray:
    """Geometric bin centers f_min * 2^(j/B), j = 0 .. B*n_octaves - 1."""
    n_bins = bins_per_octave * n_octaves
    return f_min * 2.0 ** (np.arange(n_bins) / bins_per_octave)


def cqt_window_lengths(f_min: float, bins_per_octave: int, n_octaves: int,
                       sample_rate: int) -> np.ndarray:
    """Per-bin window lengths N_j = ceil(Q * fs / f_j), Q = 1/(2^(1/B) - 1)."""
    freqs = cqt_bin_frequencies(f_min, bins_per_octave, n_octaves)
    q_factor = 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)
    return np.ceil(q_factor * sample_rate / freqs).astype(np.int64)


def _demod_cumsum(x: np.ndarray, nu: float) -> np.ndarray:
    """Zero-prefixed cumulative sum of x[m] * exp(-2j*pi*nu*m).

    The exponential table is built as an outer product of coarse and fine
    phase tables so only O(sqrt(len)) trig calls are needed.
    """
    m = x.size
    chunk = 1024
    n_chunks = -(-m // chunk)
    coarse = np.exp(-2j * np.pi * nu * chunk * np.arange(n_chunks))
    fine = np.exp(-2j * np.pi * nu * np.arange(chunk))
    table = (coarse[:, None] * fine[None, :]).ravel()[:m]
    out = np.empty(m + 1, dtype=np.complex128)
    out[0] = 0.0
    np.cumsum(x * table, out=out[1:])
    return out


def cqt_linear_power(clip: AudioClip, f_min: float, bins_per_octave: int,
                     n_octaves: int, hop: int) -> tuple[np.ndarray, np.ndarray]:
    """Linear-power constant-Q transform.

    Returns (power, bin_frequencies) with power of shape (n_bins, n_frames).
    Bin j is an exact Hann-windowed DFT of length N_j = ceil(Q*fs/f_j)
    centered at sample N_max//2 + t*hop, scaled by 2/sum(window) so a
    full-scale sine at a bin center has power close to 1. Frames are placed
    so every window lies fully inside the signal; a clip shorter than the
    longest window is an error.
    """
    fs = clip.sample_rate
    if hop < 1:
        raise DataError("hop must be >= 1")
    if f_min <= 0:
        raise DataError("f_min must be positive")
    if f_min * 2.0 ** n_octaves > fs / 2.0 + 1e-9:
        raise DataError(
            f"top frequency {f_min * 2.0 ** n_octaves:.1f} Hz above Nyquist {fs / 2:.1f} Hz"
        )
    x = clip.samples
    freqs = cqt_bin_frequencies(f_min, bins_per_octave, n_octaves)
    win_lens = cqt_window_lengths(f_min, bins_per_octave, n_octaves, fs)
    n_max = int(win_lens.max())
    if x.size < n_max:
        raise DataError(
            f"clip of {x.size} samples shorter than the longest analysis window ({n_max})"
        )
    n_frames = (x.size - n_max) // hop + 1
    centers = n_max // 2 + hop * np.arange(n_frames)

    power = np.empty((freqs.size, n_frames))
    for j, (f_j, n_j) in enumerate(zip(freqs, win_lens)):
        n_j = int(n_j)
        nu = f_j / fs
        starts = centers - n_j // 2
        ends = starts + n_j
        # Hann(n) = 0.5 - 0.25 e^{i a n} - 0.25 e^{-i a n}, a = 2*pi/N_j, so the
        # windowed sum splits into three demodulated box sums.
        c_mid = _demod_cumsum(x, nu)
        c_lo = _demod_cumsum(x, nu - 1.0 / n_j)
        c_hi = _demod_cumsum(x, nu + 1.0 / n_j)
        alpha = 2.0 * np.pi / n_j
        phase = np.exp(1j * alpha * starts)
        resp = (
            0.5 * (c_mid[ends] - c_mid[starts])
            - 0.25 * (c_lo[ends] - c_lo[starts]) / phase
            - 0.25 * (c_hi[ends] - c_hi[starts]) * phase
        )
        scale = 2.0 / (n_j / 2.0)  # sum of the periodic Hann window is N_j/2
        power[j] = np.abs(resp * scale) ** 2
    return power, freqs


def cqt_power(clip: AudioClip, f_min: float | None = None, bins_per_octave: int = 96,
              n_octaves: int = 9, hop: int = 256) -> TimeFreqMatrix:
    """Log-power CQT in dB. f_min defaults to Nyquist / 2^n_octaves."""
    if f_min is None:
        f_min = (clip.sample_rate / 2.0) / 2.0 ** n_octaves
    power, freqs = cqt_linear_power(clip, f_min, bins_per_octave, n_octaves, hop)
    values = 10.0 * np.log10(power + POWER_FLOOR)
    return TimeFreqMatrix(values=values, kind=KIND_CQT, bin_frequencies=freqs,
                          hop_seconds=hop / clip.sample_rate)


def resample_geometric_to_linear(values: np.ndarray, geo_freqs: np.ndarray) -> np.ndarray:
    """Linearly interpolate each column from the geometric frequency grid
    onto an equally spaced grid with the same bin count and span."""
    linear_grid = np.linspace(geo_freqs[0], geo_freqs[-1], geo_freqs.size)
    out = np.empty_like(values)
    for t in range(values.shape[1]):
        out[:, t] = np.interp(linear_grid, geo_freqs, values[:, t])
    return out


def cqcc_matrix(clip: AudioClip, f_min: float | None = None, bins_per_octave: int = 96,
                n_octaves: int = 9, hop: int = 256, n_coeffs: int = 20) -> TimeFreqMatrix:
    """Cepstral coefficients of the CQT: per frame, the dB log-power column
    is resampled onto a uniform frequency grid and DCT-II'd (orthonormal);
    the first n_coeffs coefficients are kept."""
    tfm = cqt_power(clip, f_min, bins_per_octave, n_octaves, hop)
    if n_coeffs > tfm.n_bins:
        raise DataError(f"n_coeffs {n_coeffs} exceeds bin count {tfm.n_bins}")
    resampled = resample_geometric_to_linear(tfm.values, tfm.bin_frequencies)
    coeffs = dct_ortho(resampled, n_coeffs)
    return TimeFreqMatrix(values=coeffs, kind=KIND_CQCC,
                          bin_frequencies=np.arange(n_coeffs, dtype=np.float64),
                          hop_seconds=tfm.hop_seconds)


def render_gray_image(tfm: TimeFreqMatrix, dynamic_range_db: float = 80.0) -> GrayImage:
    """Map a time-frequency matrix to 8-bit grayscale at native resolution.

    dB kinds (STFT/CQT): values are clipped to [max - dynamic_range_db, max]
    and mapped affinely to [0, 255]. Cepstral kinds (LFCC/CQCC): per-image
    min-max mapping; a constant matrix renders as all-128 by convention.
    Rounding is half-up so output is bit-identical across platforms.
    """
    v = tfm.values
    if tfm.kind in _DB_KINDS:
        if dynamic_range_db <= 0:
            raise DataError("dynamic_range_db must be positive")
        hi = float(v.max())
        lo = hi - dynamic_range_db
    else:
        hi = float(v.max())
        lo = float(v.min())
        if hi == lo:
            return GrayImage(pixels=np.full(v.shape, 128, dtype=np.uint8))
    scaled = (np.clip(v, lo, hi) - lo) / (hi - lo) * 255.0
    pixels = np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(pixels=pixels)


def write_pgm(path, image: GrayImage) -> None:
    """Binary 8-bit PGM (P5)."""
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.width} {image.height}\n255\n".encode("ascii"))
        fh.write(image.pixels.tobytes())


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise DataError(f"{path}: not a binary PGM file")
        dims = fh.readline().split()
        maxval = fh.readline().strip()
        if len(dims) != 2 or maxval != b"255":
            raise DataError(f"{path}: unsupported PGM header")
        width, height = int(dims[0]), int(dims[1])
        data = fh.read(width * height)
        if len(data) < width * height:
            raise DataError(f"{path}: truncated PGM payload")
    pixels = np.frombuffer(data, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels=pixels.copy())
