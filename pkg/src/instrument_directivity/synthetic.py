"""Synthetic recordings for tests and the toy instrument corpus."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .containers import write_recording_wav
from .geometry import SphericalGrid, pentakis_dodecahedron
from .partials import NoteContext, nominal_note_frequency

TOY_NOTES = (57, 69, 76)


def harmonic_complex(
    f0: float,
    n_samples: int,
    sample_rate: float,
    amplitudes=None,
    offsets_cents=None,
    phases=None,
) -> np.ndarray:
    """Sum of sinusoids at ``(i+1) f0 2^(offset_i/1200)`` below Nyquist.

    Amplitudes default to ``1/(i+1)``, offsets to zero, phases to zero.
    """
    n_max = int(np.floor((sample_rate / 2) / f0 - 1e-9))
    amps = 1.0 / np.arange(1, n_max + 1) if amplitudes is None else np.asarray(amplitudes, dtype=float)[:n_max]
    offs = np.zeros(amps.size) if offsets_cents is None else np.asarray(offsets_cents, dtype=float)[: amps.size]
    ph = np.zeros(amps.size) if phases is None else np.asarray(phases, dtype=float)[: amps.size]
    freqs = np.arange(1, amps.size + 1) * f0 * 2.0 ** (offs / 1200.0)
    keep = freqs < sample_rate / 2
    t = np.arange(n_samples) / sample_rate
    return np.sin(2 * np.pi * np.outer(freqs[keep], t) + ph[keep, None]).T @ amps[keep]


def radiation_gains(grid: SphericalGrid, pattern: str = "monopole") -> np.ndarray:
    """Per-direction amplitude gains of simple source models."""
    if pattern == "monopole":
        return np.ones(len(grid))
    if pattern == "cardioid":
        return 0.5 * (1.0 + grid.unit_vectors()[:, 0]) + 0.05
    raise ValueError(f"unknown pattern {pattern!r}")


def note_recording(
    midi: int,
    grid: SphericalGrid,
    sample_rate: float = 44100.0,
    tuning: float = 442.0,
    steady_seconds: float = 1.0,
    margin_seconds: float = 0.1,
    level_pa: float = 0.1,
    pattern: str = "monopole",
    noise: float = 1e-6,
    seed: int = 0,
) -> tuple[np.ndarray, tuple[int, int]]:
    """Channels x samples in Pa and the steady bounds of one synthetic note."""
    rng = np.random.default_rng(seed)
    margin = int(round(margin_seconds * sample_rate))
    steady = int(round(steady_seconds * sample_rate))
    n = steady + 2 * margin
    f0 = nominal_note_frequency(NoteContext(midi, tuning))
    phases = rng.uniform(0, 2 * np.pi, 200)
    x = harmonic_complex(f0, n, sample_rate, phases=phases)
    x *= level_pa / np.sqrt(np.mean(x**2))
    env = np.ones(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(margin) / margin)
    env[:margin], env[n - margin :] = ramp, ramp[::-1]
    x *= env
    out = radiation_gains(grid, pattern)[:, None] * x[None, :]
    out += noise * rng.standard_normal(out.shape)
    return out, (margin, margin + steady)


def write_toy_corpus(
    directory,
    pattern: str = "monopole",
    notes=TOY_NOTES,
    steady_seconds: float = 1.0,
    sample_rate: float = 44100.0,
    options: dict | None = None,
) -> Path:
    """Write WAV files and a manifest for a small synthetic instrument; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = pentakis_dodecahedron()
    entries = []
    for i, midi in enumerate(notes):
        x, bounds = note_recording(midi, grid, sample_rate, steady_seconds=steady_seconds, pattern=pattern, seed=i)
        wav = f"note_{midi}.wav"
        write_recording_wav(directory / wav, x, sample_rate, 24)
        entries.append({"midi": int(midi), "wav": wav, "steady": [int(bounds[0]), int(bounds[1])]})
    manifest = {
        "instrument": "Toy",
        "era": "synthetic",
        "musician": "none",
        "manufacturer": "none",
        "tuning": 442.0,
        "dynamic": "ff",
        "notes": entries,
        "options": options or {},
    }
    path = directory / "manifest.yaml"
    path.write_text(yaml.safe_dump(manifest, sort_keys=False))
    return path
