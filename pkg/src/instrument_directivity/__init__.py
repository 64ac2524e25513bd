"""Directivity processing for musical instruments recorded with a spherical microphone array."""

from .bands import EXACT_CENTERS, NOMINAL_CENTERS, band_index
from .containers import DirectivityDocument, read_document, write_document
from .directivity import (
    BandDirectivity,
    SingleToneDirectivity,
    band_average,
    calibrate,
    diffuse_equalize,
    extract_single_tone,
)
from .firgen import FirBank, band_fir_bank, design_band_fir
from .geometry import SphericalGrid, SphericalPoint, make_equiangular_grid, pentakis_dodecahedron
from .interpolate import fit_spline, evaluate_spline, upsample
from .partials import NoteContext, PartialSet, estimate_f0, find_partials
from .spectral import TimeSignal, forward_spectrum, inverse_spectrum, welch_psd

__version__ = "0.1.0"
