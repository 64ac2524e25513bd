"""Single-note directivities, third-octave averaging, equalization and calibration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .bands import N_BANDS, NOMINAL_CENTERS, band_index
from .geometry import SphericalGrid, SphericalPoint
from .partials import PartialSet
from .spectral import PsdEstimate, scale_to_power

if TYPE_CHECKING:
    from .interpolate import InterpolatedDirectivity

P0 = 2e-5
PEAK_NEIGHBORHOOD_BINS = 3
STATES = ("raw", "diffuse", "point", "area", "calibrated")


@dataclass(frozen=True, eq=False)
class SingleToneDirectivity:
    partial_frequencies: np.ndarray
    pressures: np.ndarray  # channels x partials, Pa
    grid: SphericalGrid

    def __post_init__(self):
        f = np.asarray(self.partial_frequencies, dtype=float)
        p = np.asarray(self.pressures, dtype=float)
        if p.ndim != 2 or p.shape != (len(self.grid), f.size):
            raise ValueError(f"pressures shape {p.shape} does not match ({len(self.grid)}, {f.size})")
        if np.any(p < 0):
            raise ValueError("pressures must be non-negative")
        object.__setattr__(self, "partial_frequencies", f)
        object.__setattr__(self, "pressures", p)


@dataclass(frozen=True, eq=False)
class BandDirectivity:
    """Third-octave pressures (channels x 30 bands) with equalization state.

    ``counts`` holds the number of partials averaged into each band.
    """

    pressures: np.ndarray
    grid: SphericalGrid
    state: str = "raw"
    counts: np.ndarray | None = None
    band_centers: np.ndarray = dataclasses.field(default_factory=lambda: NOMINAL_CENTERS.copy())

    def __post_init__(self):
        p = np.asarray(self.pressures, dtype=float)
        if p.shape != (len(self.grid), N_BANDS):
            raise ValueError(f"pressures must be ({len(self.grid)}, {N_BANDS}), got {p.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("pressures must be finite and non-negative")
        if self.state not in STATES:
            raise ValueError(f"unknown state {self.state!r}")
        object.__setattr__(self, "pressures", p)

    @property
    def effective_bands(self) -> np.ndarray:
        """Mask of bands carrying any energy."""
        return np.any(self.pressures > 0, axis=0)


@dataclass(frozen=True)
class SoundLevelSummary:
    per_channel_db: np.ndarray
    spatial_average_db: float
    reference_pressure: float = P0


def extract_single_tone(psd: PsdEstimate, partials: PartialSet, grid: SphericalGrid) -> SingleToneDirectivity:
    """Pressure per channel and partial by peak picking in the ENBW-scaled PSD.

    The peak is the maximum power within +-3 bins of the bin nearest each
    partial frequency; pressure is its square root.
    """
    power = np.atleast_2d(scale_to_power(psd))
    freqs = psd.frequencies
    f = partials.partial_frequencies
    if f.size and (f.min() < freqs[0] or f.max() > freqs[-1]):
        raise ValueError("partial frequencies outside PSD range")
    nearest = np.rint((f - freqs[0]) / (freqs[1] - freqs[0])).astype(int)
    out = np.empty((power.shape[0], f.size))
    for j, k in enumerate(nearest):
        lo = max(k - PEAK_NEIGHBORHOOD_BINS, 0)
        hi = min(k + PEAK_NEIGHBORHOOD_BINS + 1, freqs.size)
        out[:, j] = np.sqrt(power[:, lo:hi].max(axis=1))
    partials.pressures = out
    return SingleToneDirectivity(f.copy(), out, grid)


def band_average(tones: Sequence[SingleToneDirectivity]) -> BandDirectivity:
    """RMS over all partials of all notes falling into each third-octave band.

    Bands without partials are exactly zero.
    """
    if not tones:
        raise ValueError("need at least one single-tone directivity")
    grid = tones[0].grid
    for t in tones[1:]:
        if t.grid != grid:
            raise ValueError("all tones must share one measurement grid")
    q = len(grid)
    energy = np.zeros((q, N_BANDS))
    counts = np.zeros(N_BANDS, dtype=int)
    for t in tones:
        idx = band_index(t.partial_frequencies)
        for j in np.flatnonzero(idx >= 0):
            energy[:, idx[j]] += t.pressures[:, j] ** 2
            counts[idx[j]] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(counts > 0, np.sqrt(energy / np.maximum(counts, 1)), 0.0)
    return BandDirectivity(p, grid, "raw", counts)


def diffuse_equalize(d: BandDirectivity) -> BandDirectivity:
    """Scale each band to unit area-weighted energy over the sphere."""
    if d.state != "raw":
        raise ValueError(f"diffuse equalization expects state 'raw', got {d.state!r}")
    # scale by the band maximum first so tiny magnitudes do not underflow when squared
    peak = d.pressures.max(axis=0)
    safe_peak = np.where(peak > 0, peak, 1.0)
    scaled = d.pressures / safe_peak
    norm = np.sqrt(np.einsum("qm,q->m", scaled**2, d.grid.weights))
    safe = np.where(norm > 0, norm, 1.0)
    return dataclasses.replace(d, pressures=scaled / safe, state="diffuse")


def point_equalize(hi: "InterpolatedDirectivity", mic_direction: SphericalPoint) -> "InterpolatedDirectivity":
    """Normalize every band to the value in the reference direction.

    ``mic_direction`` must be a direction of ``hi.grid``.
    """
    try:
        r = hi.grid.index_of(mic_direction)
    except KeyError as exc:
        raise ValueError(f"reference direction not on grid: {exc}") from None
    ref = hi.pressures[r]
    active = np.any(hi.pressures > 0, axis=0)
    bad = active & (ref <= 0)
    if np.any(bad):
        raise ValueError(f"zero reference pressure in non-empty bands {np.flatnonzero(bad).tolist()}")
    safe = np.where(active, ref, 1.0)
    return dataclasses.replace(hi, pressures=hi.pressures / safe, state="point")


def area_equalize(
    hi: "InterpolatedDirectivity", region: SphericalGrid, orientation_weights=None, tol: float = 1e-9
) -> "InterpolatedDirectivity":
    """Normalize every band by the weighted RMS over a region of the sphere.

    ``region`` holds directions of ``hi.grid`` with area weights normalized
    over the region; ``orientation_weights`` (default all ones) must satisfy
    ``sum(region.weights * orientation_weights) == 1``.
    """
    g = np.ones(len(region)) if orientation_weights is None else np.asarray(orientation_weights, dtype=float)
    if g.shape != (len(region),):
        raise ValueError("one orientation weight per region point required")
    combined = region.weights * g
    if np.any(g < 0) or abs(combined.sum() - 1.0) > tol:
        raise ValueError(f"combined weights sum to {combined.sum()!r}, expected 1")
    idx = [hi.grid.index_of(p) for p in region.points]
    norm = np.sqrt(np.einsum("rm,r->m", hi.pressures[idx] ** 2, combined))
    active = np.any(hi.pressures > 0, axis=0)
    bad = active & (norm <= 0)
    if np.any(bad):
        raise ValueError(f"zero regional energy in non-empty bands {np.flatnonzero(bad).tolist()}")
    safe = np.where(active, norm, 1.0)
    return dataclasses.replace(hi, pressures=hi.pressures / safe, state="area")


def _energetic_mean_db(levels_db: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(np.mean(10 ** (0.1 * levels_db))))


def third_octave_levels(d: BandDirectivity) -> SoundLevelSummary:
    """Per-channel level averaged over effective bands and its spatial energetic mean."""
    eff = d.effective_bands
    if not np.any(eff):
        raise ValueError("directivity has no effective bands")
    ms = np.mean(d.pressures[:, eff] ** 2, axis=1)
    with np.errstate(divide="ignore"):
        per = 10 * np.log10(ms / P0**2)
    return SoundLevelSummary(per, _energetic_mean_db(per))


def reference_levels(recordings: Sequence[np.ndarray]) -> SoundLevelSummary:
    """Per-channel mean-square level of the steady parts, averaged over notes.

    ``recordings`` holds one (channels x samples) array in Pa per note.
    """
    if len(recordings) == 0:
        raise ValueError("empty recording corpus")
    ms = np.mean([np.mean(np.atleast_2d(np.asarray(x, dtype=float)) ** 2, axis=-1) for x in recordings], axis=0)
    with np.errstate(divide="ignore"):
        per = 10 * np.log10(ms / P0**2)
    return SoundLevelSummary(per, _energetic_mean_db(per))


def calibrate(d: BandDirectivity, recordings: Sequence[np.ndarray]) -> BandDirectivity:
    """Rescale a diffuse-equalized directivity to the level of the recordings."""
    if d.state != "diffuse":
        raise ValueError(f"calibration expects state 'diffuse', got {d.state!r}")
    ref = reference_levels(recordings)
    if ref.per_channel_db.size != len(d.grid):
        raise ValueError("recordings and directivity have different channel counts")
    current = third_octave_levels(d)
    gain = 10 ** ((ref.spatial_average_db - current.spatial_average_db) / 20)
    return dataclasses.replace(d, pressures=d.pressures * gain, state="calibrated")
