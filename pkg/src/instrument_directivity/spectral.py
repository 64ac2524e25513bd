"""DFT conventions, single/double-sided spectra and Welch PSD estimation.

Spectra use the unnormalized forward DFT ``X(k) = sum_n x[n] exp(-2j pi k n / N)``.
Single-sided spectra keep bins ``0..N/2`` with interior bins doubled; the
inverse mapping halves them again and mirrors the conjugates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class TimeSignal:
    """Pressure samples in Pa.

    ``samples`` may be 1-D or multichannel with time on the last axis.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim == 0 or x.shape[-1] < 1:
            raise ValueError("signal must contain at least one sample")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT bins along the last axis.

    ``origin_length`` is the (even) time-domain length the bins belong to;
    ``padded`` records that one zero sample was appended to an odd input.
    """

    bins: np.ndarray
    frequencies: np.ndarray
    sidedness: str
    origin_length: int
    padded: bool = False

    def __post_init__(self):
        if self.sidedness not in ("single", "double"):
            raise ValueError(f"sidedness must be 'single' or 'double', got {self.sidedness!r}")
        n = int(self.origin_length)
        expected = n // 2 + 1 if self.sidedness == "single" else n
        if n < 2 or n % 2:
            raise ValueError(f"origin_length must be even and >= 2, got {n}")
        if self.bins.shape[-1] != expected:
            raise ValueError(f"{self.sidedness}-sided spectrum of N={n} needs {expected} bins, got {self.bins.shape[-1]}")
        if self.frequencies.shape != (expected,) or np.any(np.diff(self.frequencies) <= 0):
            raise ValueError("frequencies must be strictly increasing, one per bin")

    @property
    def sample_rate(self) -> float:
        return float(self.frequencies[1] * self.origin_length)


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """Single-sided power spectral density in Pa^2/Hz.

    ``enbw`` is the equivalent noise bandwidth of the analysis window in Hz.
    """

    values: np.ndarray
    frequencies: np.ndarray
    enbw: float
    segment_length: int = field(default=0)

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("PSD values must be non-negative")
        if not self.enbw > 0:
            raise ValueError("enbw must be positive")


def _bin_frequencies(n: int, sample_rate: float) -> np.ndarray:
    return np.arange(n) * (sample_rate / n)


def forward_spectrum(x: TimeSignal) -> Spectrum:
    """Double-sided unnormalized DFT of ``x``.

    Odd-length signals are zero-padded by one sample and flagged ``padded``.
    """
    samples = x.samples
    padded = samples.shape[-1] % 2 == 1
    if padded:
        pad = [(0, 0)] * (samples.ndim - 1) + [(0, 1)]
        samples = np.pad(samples, pad)
    n = samples.shape[-1]
    if n < 2:
        raise ValueError("signal too short for a spectrum")
    return Spectrum(np.fft.fft(samples, axis=-1), _bin_frequencies(n, x.sample_rate), "double", n, padded)


def inverse_spectrum(X: Spectrum) -> np.ndarray:
    """Time signal from a spectrum (single-sided input is expanded first)."""
    if X.sidedness == "single":
        X = to_double_sided(X)
    return np.fft.ifft(X.bins, axis=-1).real


def to_single_sided(X: Spectrum) -> Spectrum:
    if X.sidedness != "double":
        raise ValueError("expected a double-sided spectrum")
    n = X.origin_length
    b = X.bins
    mirror = np.conj(b[..., (-np.arange(n)) % n])
    scale = max(float(np.max(np.abs(b), initial=0.0)), np.finfo(float).tiny)
    dev = float(np.max(np.abs(b - mirror), initial=0.0))
    if dev > SYMMETRY_RTOL * scale:
        raise ValueError(
            f"spectrum is not conjugate-symmetric (max deviation {dev / scale:.3g} relative); "
            "the time signal was not real"
        )
    half = n // 2
    out = b[..., : half + 1].copy()
    out[..., 1:half] *= 2
    # DC and Nyquist of a real signal are real; drop round-off imaginary parts
    out[..., 0] = out[..., 0].real
    out[..., half] = out[..., half].real
    return Spectrum(out, X.frequencies[: half + 1].copy(), "single", n, X.padded)


def to_double_sided(Xs: Spectrum) -> Spectrum:
    if Xs.sidedness != "single":
        raise ValueError("expected a single-sided spectrum")
    n = Xs.origin_length
    half = n // 2
    b = Xs.bins
    out = np.empty(b.shape[:-1] + (n,), dtype=complex)
    out[..., 0] = b[..., 0]
    out[..., 1:half] = 0.5 * b[..., 1:half]
    out[..., half] = b[..., half]
    # k > N/2: half the conjugate of bin N-k
    out[..., half + 1 :] = 0.5 * np.conj(b[..., half - 1 : 0 : -1])
    df = Xs.frequencies[1] - Xs.frequencies[0]
    return Spectrum(out, np.arange(n) * df, "double", n, Xs.padded)


def hann_periodic(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def welch_segments(n_samples: int, segments: int = 8, overlap: float = 0.5) -> tuple[int, int]:
    """(segment length, hop) for ``segments`` equal segments with fractional ``overlap``.

    Segment length is floored; trailing samples that do not fill the last
    segment are discarded.
    """
    if segments < 1 or not 0 <= overlap < 1:
        raise ValueError("segments must be >= 1 and overlap in [0, 1)")
    span = 1 + (segments - 1) * (1 - overlap)
    nseg = int(math.floor(n_samples / span + 1e-9))
    hop = max(int(math.floor(nseg * (1 - overlap))), 1)
    while nseg > 0 and (segments - 1) * hop + nseg > n_samples:
        nseg -= 1
        hop = max(int(math.floor(nseg * (1 - overlap))), 1)
    return nseg, hop


def minimum_welch_length(segments: int = 8, overlap: float = 0.5, min_segment: int = 16) -> int:
    n = int(math.ceil(min_segment * (1 + (segments - 1) * (1 - overlap))))
    while welch_segments(n, segments, overlap)[0] < min_segment:
        n += 1
    return n


def welch_psd(x: TimeSignal, segments: int = 8, overlap: float = 0.5) -> PsdEstimate:
    """Averaged periodogram over ``segments`` Hann-windowed segments.

    Each periodogram is ``|DFT(w*x)|^2 / (fs * Nseg * mean(w^2))``, folded to a
    single-sided density.  No detrending is applied.
    """
    n = x.n_samples
    nseg, hop = welch_segments(n, segments, overlap)
    if nseg < 16:
        need = minimum_welch_length(segments, overlap)
        raise ValueError(f"signal of {n} samples too short for Welch PSD; need at least {need} samples")
    fs = x.sample_rate
    win = hann_periodic(nseg)
    power = np.mean(win**2)
    acc = 0.0
    for s in range(segments):
        seg = x.samples[..., s * hop : s * hop + nseg]
        spec = np.fft.rfft(seg * win, axis=-1)
        acc = acc + np.abs(spec) ** 2
    psd = acc / (segments * fs * nseg * power)
    psd[..., 1 : (nseg + 1) // 2] *= 2
    enbw = fs * nseg * power / np.sum(win) ** 2
    return PsdEstimate(psd, np.fft.rfftfreq(nseg, 1 / fs), float(enbw), nseg)


def scale_to_power(psd: PsdEstimate) -> np.ndarray:
    """Per-bin power in Pa^2: density times window ENBW."""
    return psd.values * psd.enbw
