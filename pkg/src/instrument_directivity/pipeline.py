"""Corpus processing: recordings to single-note, third-octave, DAFF and FIR outputs."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import containers
from .directivity import (
    BandDirectivity,
    SingleToneDirectivity,
    band_average,
    calibrate,
    diffuse_equalize,
    extract_single_tone,
)
from .firgen import FIR_LENGTH, band_fir_bank
from .geometry import SphericalGrid, make_equiangular_grid, pentakis_dodecahedron
from .interpolate import InterpolatedDirectivity, upsample
from .partials import NoteContext, PartialSet, estimate_f0, find_partials
from .spectral import TimeSignal, forward_spectrum, to_single_sided, welch_psd

log = logging.getLogger(__name__)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class NoteEntry:
    midi: int
    wav: Path
    steady: tuple[int, int]


@dataclass(frozen=True)
class Options:
    grid_step: float = 5.0
    smoothing: float = 0.0
    fir_length: int = FIR_LENGTH
    bit_depth: int | None = 24
    channels: int | None = 32
    detection_nfft: int = 1 << 17
    write_recordings: bool = True


@dataclass(frozen=True)
class CorpusManifest:
    instrument: str
    era: str
    musician: str
    manufacturer: str
    tuning: float
    dynamic: str
    notes: tuple[NoteEntry, ...]
    options: Options = field(default_factory=Options)
    array: str = "pentakis"
    view_reference: str = "musician facing positive x-axis"

    @property
    def source_name(self) -> str:
        return f"{self.instrument}_{self.era}" if self.era else self.instrument


def load_manifest(path) -> CorpusManifest:
    """Parse a YAML corpus manifest; relative paths resolve against its directory."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ManifestError(f"{path}: manifest must be a mapping")
    base = path.parent
    try:
        notes = tuple(
            NoteEntry(int(n["midi"]), (base / n["wav"]).resolve(), tuple(int(v) for v in n["steady"]))
            for n in raw.get("notes") or []
        )
        opts = Options(**(raw.get("options") or {}))
        manifest = CorpusManifest(
            instrument=str(raw["instrument"]),
            era=str(raw.get("era", "")),
            musician=str(raw.get("musician", "")),
            manufacturer=str(raw.get("manufacturer", "")),
            tuning=float(raw.get("tuning", 442.0)),
            dynamic=str(raw.get("dynamic", "ff")),
            notes=notes,
            options=opts,
            array=str(raw.get("array", "pentakis")),
            view_reference=str(raw.get("view_reference", "musician facing positive x-axis")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: invalid manifest entry: {exc}") from None
    if not manifest.notes:
        raise ManifestError(f"{path}: note list is empty")
    for n in manifest.notes:
        if len(n.steady) != 2 or not 0 <= n.steady[0] < n.steady[1]:
            raise ManifestError(f"{path}: invalid steady bounds {n.steady} for midi {n.midi}")
    if manifest.dynamic not in ("pp", "ff"):
        raise ManifestError(f"{path}: dynamic must be pp or ff")
    return manifest


def array_grid(layout: str, base: Path | None = None) -> SphericalGrid:
    """Measurement grid: ``pentakis`` or a path to a plain-text grid table."""
    if layout == "pentakis":
        return pentakis_dodecahedron()
    p = Path(layout)
    if base is not None and not p.is_absolute():
        p = base / p
    return SphericalGrid.from_table(p.read_text())


@dataclass
class NoteResult:
    midi: int
    tone: SingleToneDirectivity | None = None
    partials: PartialSet | None = None
    steady: np.ndarray | None = None
    outputs: list[Path] = field(default_factory=list)
    error: str | None = None


def detection_spectrum(steady: np.ndarray, sample_rate: float, nfft: int) -> tuple[np.ndarray, np.ndarray]:
    """Single-sided magnitude spectra of the zero-padded steady part."""
    n = max(steady.shape[-1], nfft)
    n += n % 2
    padded = np.pad(steady, [(0, 0), (0, n - steady.shape[-1])])
    X = to_single_sided(forward_spectrum(TimeSignal(padded, sample_rate)))
    return X.frequencies, np.abs(X.bins)


def analyse_note(samples: np.ndarray, sample_rate: float, ctx: NoteContext, grid: SphericalGrid, nfft: int = 1 << 17):
    """Partials and single-tone directivity of one note's steady part."""
    start, end = ctx.steady_bounds
    steady = samples[:, start:end]
    freqs, mags = detection_spectrum(steady, sample_rate, nfft)
    f0 = estimate_f0(freqs, mags, ctx)
    partials = find_partials(freqs, mags, f0, sample_rate / 2)
    psd = welch_psd(TimeSignal(steady, sample_rate))
    tone = extract_single_tone(psd, partials, grid)
    return partials, tone, steady


def process_note(manifest: CorpusManifest, note: NoteEntry, grid: SphericalGrid, out_dir: Path) -> NoteResult:
    result = NoteResult(note.midi)
    opts = manifest.options
    try:
        ctx = NoteContext(note.midi, manifest.tuning, manifest.dynamic, note.steady)
        rec = containers.read_recording_wav(note.wav, opts.bit_depth, opts.channels, ctx)
        if rec.n_channels != len(grid):
            raise ValueError(f"{rec.n_channels} channels but the array has {len(grid)} positions")
        base_md = containers.base_metadata(
            manifest.source_name, manifest.musician, manifest.manufacturer, manifest.view_reference
        )
        md = containers.note_metadata(base_md, ctx)
        if opts.write_recordings:
            spec = to_single_sided(forward_spectrum(TimeSignal(rec.samples, rec.sample_rate)))
            doc = containers.recordings_document(spec.bins, rec.sample_rate, grid, md)
            result.outputs.append(containers.write_document(doc, out_dir))
        partials, tone, steady = analyse_note(rec.samples, rec.sample_rate, ctx, grid, opts.detection_nfft)
        doc = containers.single_note_document(tone.partial_frequencies, tone.pressures, grid, md)
        result.outputs.append(containers.write_document(doc, out_dir))
        result.tone, result.partials, result.steady = tone, partials, steady
    except Exception as exc:  # reported per note, the corpus continues
        log.error("note %d failed: %s", note.midi, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result


@dataclass
class CorpusResult:
    notes: list[NoteResult]
    band: BandDirectivity | None = None
    interpolated: InterpolatedDirectivity | None = None
    outputs: list[Path] = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> list[NoteResult]:
        return [n for n in self.notes if n.error]

    @property
    def ok(self) -> bool:
        return not self.failed and self.error is None


def process_corpus(manifest: CorpusManifest, out_dir, jobs: int | None = None, base: Path | None = None) -> CorpusResult:
    """Run the full chain for every note, then the instrument-level products."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = array_grid(manifest.array, base)
    jobs = jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        notes = list(pool.map(lambda n: process_note(manifest, n, grid, out_dir), manifest.notes))
    result = CorpusResult(notes)
    good = [n for n in notes if n.error is None]
    if not good:
        result.error = "no note could be processed"
        return result
    try:
        raw = band_average([n.tone for n in good])
        cal = calibrate(diffuse_equalize(raw), [n.steady for n in good])
        result.band = cal
        md = containers.base_metadata(manifest.source_name, manifest.musician, manifest.manufacturer, manifest.view_reference)
        md[containers.MetadataKeys.GLOBAL_Description.value] = f"third-octave average; dynamic = {manifest.dynamic}"
        doc = containers.third_octave_document(cal.pressures, grid, md)
        result.outputs.append(containers.write_document(doc, out_dir))

        dense = make_equiangular_grid(manifest.options.grid_step)
        hi = upsample(cal, dense, manifest.options.smoothing)
        result.interpolated = hi
        result.outputs.append(
            containers.write_opendaff(hi.pressures, dense, hi.band_centers, out_dir / f"{manifest.source_name}.daff",
                                      {"SourceName": manifest.source_name})
        )
        bank = band_fir_bank(hi.pressures, dense, manifest.options.fir_length)
        fir_path = out_dir / f"{manifest.source_name}_FIR.firbank"
        fir_path.write_bytes(containers.encode_fir_bank(bank.taps, bank.sample_rate, dense, md))
        result.outputs.append(fir_path)
    except Exception as exc:
        log.error("instrument-level processing failed: %s", exc)
        result.error = f"{type(exc).__name__}: {exc}"
    return result
