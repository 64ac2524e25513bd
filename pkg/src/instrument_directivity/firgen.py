"""Minimum-phase FIR filters from third-octave band magnitudes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import EXACT_CENTERS, LOWER_EDGES, N_BANDS, UPPER_EDGES
from .geometry import SphericalGrid

FIR_LENGTH = 8192
SAMPLE_RATE = 44100.0
FLOOR_DB = -100.0
TAPER_LENGTH = 256


@dataclass(frozen=True, eq=False)
class FirBank:
    taps: np.ndarray  # directions x length
    sample_rate: float
    grid: SphericalGrid

    def __post_init__(self):
        if self.taps.ndim != 2 or self.taps.shape[0] != len(self.grid):
            raise ValueError(f"taps shape {self.taps.shape} does not match {len(self.grid)} directions")
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("taps must be finite")

    @property
    def length(self) -> int:
        return self.taps.shape[1]


def dense_frequencies(sample_rate: float = SAMPLE_RATE, resolution: float = 1.0) -> np.ndarray:
    """Single-sided bin frequencies 0..fs/2 at ``resolution`` Hz."""
    n = int(round(sample_rate / resolution))
    if n % 2:
        raise ValueError("sample_rate / resolution must be an even number of bins")
    return np.arange(n // 2 + 1) * resolution


def band_basis(frequencies: np.ndarray) -> np.ndarray:
    """(bins x bands) indicator of each band's ``[lower, upper)`` edge range."""
    f = np.asarray(frequencies)[:, None]
    return ((f >= LOWER_EDGES) & (f < UPPER_EDGES)).astype(float)


def band_to_dense_spectrum(bands, resolution: float = 1.0, sample_rate: float = SAMPLE_RATE) -> np.ndarray:
    """Piecewise-constant single-sided magnitude spectrum from 30 band values.

    Bins outside the band-edge range are zero.  ``bands`` may be stacked
    (directions x 30).
    """
    bands = np.asarray(bands, dtype=float)
    if bands.shape[-1] != N_BANDS:
        raise ValueError(f"expected {N_BANDS} band values, got {bands.shape[-1]}")
    if np.any(bands < 0):
        raise ValueError("band magnitudes must be non-negative")
    return bands @ band_basis(dense_frequencies(sample_rate, resolution)).T


def smoothing_windows(n_bins: int, fraction: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive bin ranges of a constant relative bandwidth window around each bin."""
    k = np.arange(n_bins, dtype=float)
    half = 2.0 ** (1.0 / (2.0 * fraction))
    lo = np.ceil(k / half - 1e-9).astype(int)
    hi = np.minimum(np.floor(k * half + 1e-9).astype(int), n_bins - 1)
    return lo, hi


def smooth_third_octave(spec, fraction: float = 3.0) -> np.ndarray:
    """Power-domain moving average over a 1/``fraction``-octave window per bin.

    The window around bin k spans ``k * 2^(-1/(2 fraction)) .. k * 2^(1/(2 fraction))``.
    """
    spec = np.asarray(spec, dtype=float)
    n = spec.shape[-1]
    lo, hi = smoothing_windows(n, fraction)
    csum = np.concatenate([np.zeros(spec.shape[:-1] + (1,)), np.cumsum(spec**2, axis=-1)], axis=-1)
    mean_power = (csum[..., hi + 1] - csum[..., lo]) / (hi - lo + 1)
    return np.sqrt(np.maximum(mean_power, 0.0))


def minimum_phase_fir(spec, length: int = FIR_LENGTH, floor_db: float = FLOOR_DB, taper: int = TAPER_LENGTH) -> np.ndarray:
    """Real minimum-phase impulse response for a single-sided magnitude spectrum.

    Uses the folded real cepstrum of the log magnitude.  Zero magnitudes are
    floored ``floor_db`` below the maximum; the response is truncated to
    ``length`` samples with a raised-cosine fade over the last ``taper``.
    Stacked spectra (directions x bins) are processed row-wise.
    """
    mag = np.atleast_2d(np.asarray(spec, dtype=float))
    n_bins = mag.shape[-1]
    n = 2 * (n_bins - 1)
    peak = mag.max(axis=-1, keepdims=True)
    silent = peak[:, 0] <= 0
    safe_peak = np.where(peak > 0, peak, 1.0)
    floored = np.maximum(mag, safe_peak * 10.0 ** (floor_db / 20.0))
    cep = np.fft.irfft(np.log(floored), n=n, axis=-1)
    fold = np.zeros_like(cep)
    fold[:, 0] = cep[:, 0]
    fold[:, 1 : n // 2] = 2.0 * cep[:, 1 : n // 2]
    fold[:, n // 2] = cep[:, n // 2]
    h = np.fft.irfft(np.exp(np.fft.rfft(fold, axis=-1)), n=n, axis=-1)
    if length <= n:
        h = h[:, :length]
    else:
        h = np.pad(h, [(0, 0), (0, length - n)])
    if taper:
        ramp = 0.5 + 0.5 * np.cos(np.pi * (np.arange(1, taper + 1)) / taper)
        h[:, -taper:] *= ramp
    h[silent] = 0.0
    return h[0] if np.ndim(spec) == 1 else h


def linear_phase_fir(spec, length: int = FIR_LENGTH) -> np.ndarray:
    """Zero-phase response of the same magnitude, centred in ``length`` samples."""
    mag = np.asarray(spec, dtype=float)
    n = 2 * (mag.shape[-1] - 1)
    h = np.fft.fftshift(np.fft.irfft(mag, n=n, axis=-1), axes=-1)
    start = n // 2 - length // 2
    if start >= 0:
        return h[..., start : start + length]
    return np.pad(h, [(0, 0)] * (h.ndim - 1) + [(-start, length - n + start)])


def linear_phase_counterpart(taps, oversample: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """(zero-padded taps, linear-phase filter) sharing the magnitude of ``taps``.

    The magnitude is sampled on ``oversample`` times the filter length so
    the centred zero-phase response is free of circular time aliasing.
    """
    taps = np.atleast_2d(np.asarray(taps, dtype=float))
    n = oversample * taps.shape[-1]
    mag = np.abs(np.fft.rfft(taps, n, axis=-1))
    padded = np.pad(taps, [(0, 0), (0, n - taps.shape[-1])])
    return padded, linear_phase_fir(mag, n)


def band_center_bins(resolution: float = 1.0) -> np.ndarray:
    """Dense-spectrum bins nearest to the exact band centres."""
    return np.rint(EXACT_CENTERS / resolution).astype(int)


def fir_response(taps, frequencies, sample_rate: float = SAMPLE_RATE) -> np.ndarray:
    """Magnitude of the DTFT of ``taps`` (rows) at arbitrary frequencies."""
    taps = np.atleast_2d(taps)
    n = np.arange(taps.shape[-1])
    kernel = np.exp(-2j * np.pi * np.outer(n, np.asarray(frequencies) / sample_rate))
    return np.abs(taps @ kernel)


def design_band_fir(
    bands,
    length: int = FIR_LENGTH,
    sample_rate: float = SAMPLE_RATE,
    design_length: int = 16384,
    iterations: int = 4,
    tol_db: float = 0.05,
) -> np.ndarray:
    """Minimum-phase FIRs for stacked (directions x 30) band magnitudes.

    Band values become a 1 Hz stepped spectrum, which is third-octave
    smoothed and resampled onto a ``design_length``-point grid for the
    cepstral construction.  Truncation to ``length`` taps blurs low bands,
    so the gains of non-empty bands are refined until the response at every
    non-empty band centre is within ``tol_db`` of the smoothed target (at
    most ``iterations`` redesigns).
    """
    bands = np.atleast_2d(np.asarray(bands, dtype=float))
    if bands.shape[-1] != N_BANDS:
        raise ValueError(f"expected {N_BANDS} band values per direction")
    if np.any(bands < 0):
        raise ValueError("band magnitudes must be non-negative")
    dense_f = dense_frequencies(sample_rate)
    basis_power = smooth_third_octave(band_basis(dense_f).T) ** 2
    design_f = np.fft.rfftfreq(design_length, 1.0 / sample_rate)
    # linear resampling commutes with the per-band superposition
    design_basis = np.stack([np.interp(design_f, dense_f, row) for row in basis_power])
    centers = dense_f[band_center_bins(dense_f[1] - dense_f[0])]
    target = np.sqrt((bands**2) @ basis_power[:, band_center_bins(dense_f[1] - dense_f[0])])
    active = bands > 0

    def synth(b):
        mag = np.sqrt(np.maximum((b**2) @ design_basis, 0.0))
        return minimum_phase_fir(mag, length)

    gains = np.ones_like(bands)
    taps = np.atleast_2d(synth(bands))
    todo = np.arange(bands.shape[0])
    for _ in range(iterations):
        resp = fir_response(taps[todo], centers, sample_rate)
        ratio = np.ones_like(resp)
        act = active[todo]
        ratio[act] = target[todo][act] / np.maximum(resp[act], np.finfo(float).tiny)
        err = np.abs(20 * np.log10(ratio))
        still = err.max(axis=1) > tol_db
        todo = todo[still]
        if todo.size == 0:
            break
        gains[todo] *= ratio[still]
        taps[todo] = np.atleast_2d(synth(bands[todo] * gains[todo]))
    return taps


def band_fir_bank(
    band_pressures,
    grid: SphericalGrid,
    length: int = FIR_LENGTH,
    sample_rate: float = SAMPLE_RATE,
    batch: int = 256,
) -> FirBank:
    """One minimum-phase filter per direction from (directions x 30) band magnitudes."""
    band_pressures = np.asarray(band_pressures, dtype=float)
    if band_pressures.shape != (len(grid), N_BANDS):
        raise ValueError(f"band pressures must be ({len(grid)}, {N_BANDS})")
    taps = np.empty((len(grid), length))
    for start in range(0, len(grid), batch):
        taps[start : start + batch] = design_band_fir(band_pressures[start : start + batch], length, sample_rate)
    return FirBank(taps, float(sample_rate), grid)
