"""Fundamental and overtone detection by cent-window voting across channels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

F0_WINDOW_CENTS = 100.0
PARTIAL_WINDOW_CENTS = 10.0
PARTIAL_ACCEPT_CENTS = 5.0

TERMINATION_REASONS = ("nyquist", "cent_deviation", "noise_floor")


def cents(f, f_ref):
    """Interval from ``f_ref`` to ``f`` in cents."""
    return 1200.0 * np.log2(np.asarray(f, dtype=float) / f_ref)


@dataclass(frozen=True)
class NoteContext:
    midi_note: int
    tuning_frequency: float = 442.0
    dynamic: str = "ff"
    steady_bounds: tuple[int, int] | None = None

    def __post_init__(self):
        if not 0 <= int(self.midi_note) <= 127:
            raise ValueError(f"midi_note {self.midi_note} outside 0..127")
        if not 400.0 <= float(self.tuning_frequency) <= 466.0:
            raise ValueError(f"tuning frequency {self.tuning_frequency} Hz outside [400, 466]")
        if self.dynamic not in ("pp", "ff"):
            raise ValueError(f"dynamic must be 'pp' or 'ff', got {self.dynamic!r}")
        if self.steady_bounds is not None:
            start, end = (int(v) for v in self.steady_bounds)
            if not 0 <= start < end:
                raise ValueError(f"invalid steady bounds {self.steady_bounds}")
            object.__setattr__(self, "steady_bounds", (start, end))

    def check_bounds(self, n_samples: int) -> None:
        if self.steady_bounds is not None and self.steady_bounds[1] > n_samples:
            raise ValueError(f"steady bounds {self.steady_bounds} exceed recording length {n_samples}")


@dataclass(eq=False)
class PartialSet:
    """Fundamental plus accepted overtones.

    ``partial_frequencies[0]`` is f0.  ``pressures`` is filled later with a
    (channels x partials) matrix.
    """

    f0: float
    partial_frequencies: np.ndarray
    termination_reason: str
    pressures: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.partial_frequencies = np.asarray(self.partial_frequencies, dtype=float)
        if self.termination_reason not in TERMINATION_REASONS:
            raise ValueError(f"unknown termination reason {self.termination_reason!r}")
        if np.any(np.diff(self.partial_frequencies) <= 0):
            raise ValueError("partial frequencies must be strictly increasing")

    @property
    def n_overtones(self) -> int:
        return self.partial_frequencies.size - 1


def nominal_note_frequency(ctx: NoteContext) -> float:
    """Equal-tempered frequency of ``ctx.midi_note`` relative to the A4 tuning pitch."""
    return float(ctx.tuning_frequency * 2.0 ** ((ctx.midi_note - 69) / 12.0))


def _window(frequencies: np.ndarray, center: float, half_width_cents: float) -> np.ndarray:
    lo = center * 2.0 ** (-half_width_cents / 1200.0)
    hi = center * 2.0 ** (half_width_cents / 1200.0)
    return np.flatnonzero((frequencies >= lo) & (frequencies <= hi))


def _vote(magnitudes: np.ndarray, idx: np.ndarray) -> int:
    """Bin index most often holding the per-channel maximum inside ``idx``.

    Ties go to the candidate with the larger magnitude summed over channels.
    """
    local = magnitudes[:, idx]
    winners = idx[np.argmax(local, axis=1)]
    candidates, counts = np.unique(winners, return_counts=True)
    top = candidates[counts == counts.max()]
    if top.size == 1:
        return int(top[0])
    summed = magnitudes[:, top].sum(axis=0)
    return int(top[np.argmax(summed)])


def _as_channels(magnitudes) -> np.ndarray:
    m = np.abs(np.asarray(magnitudes))
    return m[None, :] if m.ndim == 1 else m


def estimate_f0(frequencies, magnitudes, ctx: NoteContext) -> float:
    """Fundamental frequency voted over channels within +-100 cents of the nominal note.

    ``magnitudes`` is a (channels x bins) array of spectral magnitudes on
    ``frequencies``.
    """
    frequencies = np.asarray(frequencies, dtype=float)
    mags = _as_channels(magnitudes)
    nominal = nominal_note_frequency(ctx)
    idx = _window(frequencies, nominal, F0_WINDOW_CENTS)
    if idx.size == 0:
        raise ValueError(
            f"no spectral bins within +-{F0_WINDOW_CENTS:g} cents of {nominal:.2f} Hz "
            f"(spectrum covers {frequencies[0]:.2f}..{frequencies[-1]:.2f} Hz)"
        )
    return float(frequencies[_vote(mags, idx)])


def find_partials(frequencies, magnitudes, f0: float, nyquist: float) -> PartialSet:
    """Scan overtones (i+1)*f0, i = 1, 2, ... with +-10 cent windows.

    The voted frequency is accepted while it lies within 5 cents of its
    harmonic; the first larger deviation ends the scan.  The scan also ends
    below Nyquist, or when a window holds no energy at all.
    """
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    frequencies = np.asarray(frequencies, dtype=float)
    mags = _as_channels(magnitudes)
    found = [float(f0)]
    reason = "nyquist"
    i = 1
    while True:
        harmonic = (i + 1) * f0
        if harmonic >= nyquist:
            reason = "nyquist"
            break
        idx = _window(frequencies, harmonic, PARTIAL_WINDOW_CENTS)
        idx = idx[frequencies[idx] < nyquist]
        if idx.size == 0:
            reason = "nyquist" if frequencies[-1] < harmonic else "noise_floor"
            break
        if not np.any(mags[:, idx] > 0):
            reason = "noise_floor"
            break
        winner = float(frequencies[_vote(mags, idx)])
        if abs(cents(winner, harmonic)) > PARTIAL_ACCEPT_CENTS:
            reason = "cent_deviation"
            break
        found.append(winner)
        i += 1
    return PartialSet(float(f0), np.array(found), reason)
