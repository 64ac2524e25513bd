"""Shared synthetic fixtures."""

import numpy as np

from instrument_directivity.partials import cents

FS = 44100.0
N_DETECT = 2**17


def bin_aligned_tones(freqs, amps, n=N_DETECT, fs=FS, gains=(1.0,)):
    """Channels x samples of sinusoids snapped to DFT bins of length ``n``.

    Returns the samples and the snapped frequencies; snapped tones leak into
    no other bin of a length-``n`` DFT.
    """
    df = fs / n
    snapped = np.rint(np.asarray(freqs) / df) * df
    t = np.arange(n) / fs
    x = np.sin(2 * np.pi * np.outer(snapped, t)).T @ np.asarray(amps, dtype=float)
    return np.asarray(gains, dtype=float)[:, None] * x[None, :], snapped


def magnitude_spectrum(x, fs=FS):
    return np.fft.rfftfreq(x.shape[-1], 1 / fs), np.abs(np.fft.rfft(x, axis=-1))


def expected_partials(snapped, f0):
    """Accepted harmonics by the 5-cent rule on snapped frequencies."""
    out = [f0]
    for i, f in enumerate(snapped[1:], start=2):
        if abs(cents(f, i * f0)) > 5:
            return np.array(out), "cent_deviation"
        out.append(f)
    return np.array(out), "nyquist"


# ----------------------------------------------------------------- FIR


def smoothed_target(bands):
    """Third-octave smoothed stepped spectrum sampled at the band centres."""
    from instrument_directivity.bands import EXACT_CENTERS
    from instrument_directivity.firgen import band_to_dense_spectrum, smooth_third_octave

    spec = smooth_third_octave(band_to_dense_spectrum(bands))
    return spec[..., np.rint(EXACT_CENTERS).astype(int)]


def response_db_error(taps, bands):
    """|response / target| in dB at the centres of non-empty bands."""
    from instrument_directivity.bands import EXACT_CENTERS
    from instrument_directivity.firgen import SAMPLE_RATE, fir_response

    resp = fir_response(taps, np.rint(EXACT_CENTERS), SAMPLE_RATE)
    target = smoothed_target(bands)
    active = np.asarray(bands) > 0
    return np.abs(20 * np.log10(resp[active] / target[active]))


def cumulative_energy(h):
    return np.cumsum(h**2, axis=-1)


def dominance_violation(h):
    """Largest shortfall of the minimum-phase partial energy, relative to total energy."""
    from instrument_directivity.firgen import linear_phase_counterpart

    padded, lin = linear_phase_counterpart(h)
    e_min, e_lin = cumulative_energy(padded), cumulative_energy(lin)
    return float(np.max((e_lin - e_min) / e_min[..., -1:]))


def stepped_bands(start_db, steps_db, range_db=40.0):
    # adjacent steps of at most 4 dB within a 40 dB dynamic range
    levels = start_db + np.r_[0.0, np.cumsum(steps_db)]
    return 10 ** (np.maximum(levels, levels.max() - range_db) / 20)


# ----------------------------------------------------------- documents


def _grid():
    from instrument_directivity.geometry import pentakis_dodecahedron

    return pentakis_dodecahedron()


GRID = _grid()


def note_md(midi=69, dynamic="ff", name="Oboe_modern"):
    from instrument_directivity import containers as c
    from instrument_directivity.partials import NoteContext

    return c.note_metadata(c.base_metadata(name, "A. Player", "Maker"), NoteContext(midi, 442.0, dynamic, (100, 900)))


def random_document(kind, rng, grid=GRID):
    """A valid document of ``kind`` with random content."""
    from instrument_directivity import containers as c

    if kind == "recordings":
        n = 2 * int(rng.integers(1, 40))
        x = rng.standard_normal((len(grid), n))
        spec = np.fft.rfft(x, axis=-1)
        spec[:, 1:-1] *= 2
        spec[:, 0] = spec[:, 0].real
        spec[:, -1] = spec[:, -1].real
        return c.recordings_document(spec, 44100.0, grid, note_md(int(rng.integers(0, 128))))
    if kind == "single_note":
        k = int(rng.integers(1, 20))
        f = np.cumsum(rng.uniform(1, 500, k))
        return c.single_note_document(f, rng.uniform(0, 5, (len(grid), k)), grid, note_md(int(rng.integers(0, 128)), "pp"))
    return c.third_octave_document(rng.uniform(0, 5, (len(grid), 30)), grid, c.base_metadata("Flute_historical"))


# ---------------------------------------------------------- acceptance

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Store one pass/fail result for the end-of-run summary."""
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return bool(ok)
