"""One-third octave bands, base-10 system, 25 Hz to 20 kHz."""

import numpy as np

NOMINAL_CENTERS = np.array([
    25, 31.5, 40, 50, 63, 80, 100, 125, 160, 200,
    250, 315, 400, 500, 630, 800, 1000, 1250, 1600, 2000,
    2500, 3150, 4000, 5000, 6300, 8000, 10000, 12500, 16000, 20000,
], dtype=float)
N_BANDS = NOMINAL_CENTERS.size

# exact mid-band frequencies 1000 * 10^(x/10), x = -16..13
EXACT_CENTERS = 1000.0 * 10.0 ** (np.arange(-16, 14) / 10.0)
LOWER_EDGES = EXACT_CENTERS * 10.0 ** (-1 / 20)
UPPER_EDGES = EXACT_CENTERS * 10.0 ** (1 / 20)


def band_index(frequencies) -> np.ndarray:
    """Band index per frequency, -1 outside the 30-band range.

    Bands are half-open ``[lower, upper)``.
    """
    f = np.asarray(frequencies, dtype=float)
    idx = np.searchsorted(UPPER_EDGES, f, side="right")
    inside = (f >= LOWER_EDGES[0]) & (f < UPPER_EDGES[-1])
    return np.where(inside, idx, -1)


def nominal_index(center_hz: float) -> int:
    hits = np.flatnonzero(np.isclose(NOMINAL_CENTERS, center_hz))
    if hits.size == 0:
        raise KeyError(f"{center_hz} Hz is not a nominal third-octave centre")
    return int(hits[0])
