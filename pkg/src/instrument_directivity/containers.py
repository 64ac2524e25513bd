"""Recording ingestion and directivity document (de)serialization.

Documents mirror the SOFA ``FreeFieldDirectivityTF`` logical schema in a
portable chunked binary encoding (``.sofalite``, see docs/container.md).
Balloons on equiangular grids are exported as OpenDAFF magnitude spectra
(see docs/daff.md).
"""

from __future__ import annotations

import io
import re
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .bands import NOMINAL_CENTERS
from .geometry import SphericalGrid, equiangular_step
from .partials import NoteContext

EXTENSION = ".sofalite"
MAGIC = b"SOFALITE"
FORMAT_VERSION = 1
KINDS = ("recordings", "single_note", "third_octave")
DYNAMICS = ("pp", "ff")
RECEIVER_POSITION_TYPE = "spherical: azimuth [deg], colatitude [deg], radius [m]"


class MetadataKeys(str, Enum):
    GLOBAL_SourceName = "GLOBAL_SourceName"
    GLOBAL_Musician = "GLOBAL_Musician"
    GLOBAL_SourceManufacturer = "GLOBAL_SourceManufacturer"
    SourceView_Reference = "SourceView_Reference"
    ReceiverPosition = "ReceiverPosition"
    GLOBAL_Description = "GLOBAL_Description"
    MidiNote = "MidiNote"
    SourceTuningFrequency = "SourceTuningFrequency"
    SteadyPart = "SteadyPart"


NOTE_KEYS = (MetadataKeys.MidiNote, MetadataKeys.SourceTuningFrequency, MetadataKeys.SteadyPart)
REQUIRED_KEYS = {
    "recordings": tuple(MetadataKeys),
    "single_note": tuple(MetadataKeys),
    "third_octave": tuple(k for k in MetadataKeys if k not in NOTE_KEYS),
}
FORBIDDEN_KEYS = {"recordings": (), "single_note": (), "third_octave": NOTE_KEYS}


class DocumentError(ValueError):
    """A document violates the container schema."""


# --------------------------------------------------------------------- WAV


@dataclass(frozen=True, eq=False)
class RecordingSet:
    """Calibrated multichannel recording of one note, channels x samples in Pa."""

    samples: np.ndarray
    sample_rate: float
    context: NoteContext | None = None

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise ValueError("samples must be channels x samples")
        if self.context is not None:
            self.context.check_bounds(self.samples.shape[1])

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    def steady_part(self) -> np.ndarray:
        if self.context is None or self.context.steady_bounds is None:
            return self.samples
        start, end = self.context.steady_bounds
        return self.samples[:, start:end]


_PCM_SCALE = {np.dtype("int16"): 2.0**15, np.dtype("int32"): 2.0**31, np.dtype("uint8"): 2.0**7}


def _wav_bit_depth(path) -> tuple[int, int]:
    """(format tag, bits per sample) from the fmt chunk."""
    with open(path, "rb") as fh:
        riff = fh.read(12)
        if riff[:4] != b"RIFF" or riff[8:12] != b"WAVE":
            raise ValueError(f"{path}: not a RIFF/WAVE file")
        while True:
            head = fh.read(8)
            if len(head) < 8:
                raise ValueError(f"{path}: no fmt chunk")
            cid, size = struct.unpack("<4sI", head)
            body = fh.read(size + (size & 1))
            if cid == b"fmt ":
                tag, _, _, _, _, bits = struct.unpack("<HHIIHH", body[:16])
                if tag == 0xFFFE and size >= 40:
                    tag = struct.unpack("<H", body[24:26])[0]
                return tag, bits


def read_recording_wav(path, bit_depth: int | None = 24, channels: int | None = 32, context: NoteContext | None = None) -> RecordingSet:
    """Read a calibrated multichannel WAV; digital full scale 1.0 is 1 Pa.

    Accepts 24-bit PCM and 32-bit float (``bit_depth=32``); ``None`` skips
    the respective check.
    """
    tag, bits = _wav_bit_depth(path)
    if tag not in (1, 3) or (tag == 1 and bits != 24 and bits not in (16, 32)) or (tag == 3 and bits != 32):
        raise ValueError(f"{path}: unsupported sample format (tag {tag}, {bits} bit)")
    if bit_depth is not None and bits != bit_depth:
        raise ValueError(f"{path}: expected {bit_depth}-bit samples, file has {bits}-bit")
    rate, data = wavfile.read(path)
    data = data.reshape(data.shape[0], -1)
    if channels is not None and data.shape[1] != channels:
        raise ValueError(f"{path}: expected {channels} channels, file has {data.shape[1]}")
    if data.dtype.kind == "f":
        pa = data.astype(float)
    elif bits == 24:
        # scipy left-aligns 24-bit samples in int32
        pa = data.astype(float) / 2.0**31
    else:
        pa = data.astype(float) / _PCM_SCALE[data.dtype]
    return RecordingSet(np.ascontiguousarray(pa.T), float(rate), context)


def write_recording_wav(path, samples, sample_rate: float, bit_depth: int = 24) -> None:
    """Write channels x samples (Pa) as 24-bit PCM or 32-bit float WAV."""
    x = np.atleast_2d(np.asarray(samples, dtype=float))
    if bit_depth == 32:
        wavfile.write(path, int(sample_rate), np.ascontiguousarray(x.T.astype(np.float32)))
        return
    if bit_depth != 24:
        raise ValueError("bit_depth must be 24 or 32")
    q = np.ascontiguousarray(np.clip(np.rint(x.T * 2.0**23), -(2**23), 2**23 - 1).astype("<i4"))
    raw = q.view(np.uint8).reshape(-1, 4)[:, :3].tobytes()
    n_ch = x.shape[0]
    fmt = struct.pack("<HHIIHH", 1, n_ch, int(sample_rate), int(sample_rate) * 3 * n_ch, 3 * n_ch, 24)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(raw) + (len(raw) & 1)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt)) + fmt)
        fh.write(b"data" + struct.pack("<I", len(raw)) + raw)
        if len(raw) & 1:
            fh.write(b"\0")


# ---------------------------------------------------------------- documents


@dataclass(eq=False)
class DirectivityDocument:
    kind: str
    data_real: np.ndarray  # M x R x N
    data_imag: np.ndarray
    frequencies: np.ndarray
    receiver_positions: SphericalGrid
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.data_real = np.asarray(self.data_real, dtype=float)
        self.data_imag = np.asarray(self.data_imag, dtype=float)
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.metadata = {str(k.value if isinstance(k, MetadataKeys) else k): str(v) for k, v in self.metadata.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectivityDocument):
            return NotImplemented
        return (
            self.kind == other.kind
            and _bit_equal(self.data_real, other.data_real)
            and _bit_equal(self.data_imag, other.data_imag)
            and _bit_equal(self.frequencies, other.frequencies)
            and self.receiver_positions == other.receiver_positions
            and self.metadata == other.metadata
        )

    @property
    def data(self) -> np.ndarray:
        return self.data_real + 1j * self.data_imag

    def validate(self) -> None:
        """Raise ``DocumentError`` listing every violated invariant."""
        problems = validation_problems(self)
        if problems:
            raise DocumentError("; ".join(problems))


def _bit_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and a.tobytes() == b.tobytes()


def validation_problems(doc: DirectivityDocument) -> list[str]:
    problems = []
    if doc.kind not in KINDS:
        return [f"unknown kind {doc.kind!r}"]
    for key in REQUIRED_KEYS[doc.kind]:
        if key.value not in doc.metadata:
            problems.append(f"missing metadata {key.value} for kind {doc.kind}")
    for key in FORBIDDEN_KEYS[doc.kind]:
        if key.value in doc.metadata:
            problems.append(f"metadata {key.value} not allowed for kind {doc.kind}")
    if doc.data_real.ndim != 3 or doc.data_real.shape != doc.data_imag.shape:
        problems.append(f"Data.Real {doc.data_real.shape} / Data.Imag {doc.data_imag.shape} must be equal MxRxN")
        return problems
    m, r, n = doc.data_real.shape
    if m != 1:
        problems.append(f"M must be 1, got {m}")
    if r != len(doc.receiver_positions):
        problems.append(f"R={r} does not match {len(doc.receiver_positions)} receiver positions")
    if doc.frequencies.shape != (n,):
        problems.append(f"N={n} does not match {doc.frequencies.size} frequencies")
    elif n and np.any(np.diff(doc.frequencies) <= 0):
        problems.append("frequencies must be strictly increasing")
    if not (np.all(np.isfinite(doc.data_real)) and np.all(np.isfinite(doc.data_imag))):
        problems.append("data contains non-finite values")
    if doc.kind in ("single_note", "third_octave"):
        if np.any(doc.data_imag != 0):
            problems.append(f"Data.Imag must be all zeros for kind {doc.kind}")
        if np.any(doc.data_real < 0):
            problems.append("pressures must be non-negative")
    if doc.kind == "third_octave" and not np.array_equal(doc.frequencies, NOMINAL_CENTERS):
        problems.append("third_octave frequencies must be the 30 nominal centres 25 Hz..20 kHz")
    if doc.kind == "recordings" and doc.frequencies.shape == (n,) and n >= 2:
        df = doc.frequencies[1]
        if doc.frequencies[0] != 0 or not np.allclose(doc.frequencies, np.arange(n) * df, rtol=1e-12, atol=0):
            problems.append("recordings frequencies must be the DFT bins k*fs/N from 0")
        if np.any(doc.data_imag[..., 0] != 0) or np.any(doc.data_imag[..., -1] != 0):
            problems.append("recordings DC and Nyquist bins must be real (real-valued origin)")
    if doc.kind == "single_note" and n == 0:
        problems.append("single_note document needs at least the fundamental")
    md = doc.metadata
    if MetadataKeys.MidiNote.value in md and not re.fullmatch(r"\d{1,3}", md[MetadataKeys.MidiNote.value]):
        problems.append(f"MidiNote {md[MetadataKeys.MidiNote.value]!r} is not an integer")
    if MetadataKeys.SteadyPart.value in md and not re.fullmatch(r"\d+\s+\d+", md[MetadataKeys.SteadyPart.value]):
        problems.append(f"SteadyPart {md[MetadataKeys.SteadyPart.value]!r} must be 'start end' in samples")
    return problems


def describe_note(note_name: str, dynamic: str) -> str:
    """GLOBAL_Description text, e.g. ``note = A4; dynamic = ff``."""
    return f"note = {note_name}; dynamic = {dynamic}"


def parse_description(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(";"):
        if "=" in part:
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


_NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


def midi_note_name(midi: int) -> str:
    return f"{_NOTE_NAMES[midi % 12]}{midi // 12 - 1}"


def document_filename(source_name: str, kind: str, dynamic: str | None = None, midi: int | None = None) -> str:
    if not source_name or "/" in source_name:
        raise ValueError(f"invalid source name {source_name!r}")
    if kind == "recordings":
        if dynamic not in DYNAMICS or midi is None:
            raise ValueError("recordings file names need dynamic and midi note")
        return f"{source_name}_{dynamic}_{int(midi)}_recordings{EXTENSION}"
    if kind == "single_note":
        if midi is None:
            raise ValueError("single-note file names need a midi note")
        return f"{source_name}_{int(midi)}_singleTones{EXTENSION}"
    if kind == "third_octave":
        return f"{source_name}_3rdOctave{EXTENSION}"
    raise ValueError(f"unknown kind {kind!r}")


_NAME_PATTERNS = (
    ("recordings", re.compile(r"^(?P<name>.+)_(?P<dynamic>pp|ff)_(?P<midi>\d{1,3})_recordings$")),
    ("single_note", re.compile(r"^(?P<name>.+)_(?P<midi>\d{1,3})_singleTones$")),
    ("third_octave", re.compile(r"^(?P<name>.+)_3rdOctave$")),
)


def parse_filename(filename: str) -> dict:
    """Inverse of ``document_filename``: kind, source name, dynamic, midi."""
    stem = Path(filename).name
    if stem.endswith(EXTENSION):
        stem = stem[: -len(EXTENSION)]
    for kind, pattern in _NAME_PATTERNS:
        m = pattern.match(stem)
        if m:
            g = m.groupdict()
            return {
                "kind": kind,
                "source_name": g["name"],
                "dynamic": g.get("dynamic"),
                "midi": int(g["midi"]) if g.get("midi") else None,
            }
    raise ValueError(f"{filename!r} does not follow a known naming scheme")


def default_filename(doc: DirectivityDocument) -> str:
    md = doc.metadata
    name = md[MetadataKeys.GLOBAL_SourceName.value]
    midi = int(md[MetadataKeys.MidiNote.value]) if MetadataKeys.MidiNote.value in md else None
    dynamic = parse_description(md.get(MetadataKeys.GLOBAL_Description.value, "")).get("dynamic")
    return document_filename(name, doc.kind, dynamic, midi)


# chunk layout: 4-byte tag, uint64 payload length, payload
_KIND_CODES = {k: i for i, k in enumerate(KINDS)}


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack("<Q", len(payload)) + payload


def _encode_metadata(md: dict[str, str]) -> bytes:
    out = [struct.pack("<I", len(md))]
    for k in sorted(md):
        kb, vb = k.encode("utf-8"), md[k].encode("utf-8")
        out.append(struct.pack("<I", len(kb)) + kb + struct.pack("<I", len(vb)) + vb)
    return b"".join(out)


def _decode_metadata(buf: bytes) -> dict[str, str]:
    stream = io.BytesIO(buf)
    (count,) = struct.unpack("<I", stream.read(4))
    md = {}
    for _ in range(count):
        (kl,) = struct.unpack("<I", stream.read(4))
        k = stream.read(kl).decode("utf-8")
        (vl,) = struct.unpack("<I", stream.read(4))
        md[k] = stream.read(vl).decode("utf-8")
    return md


def _f64(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def encode_document(doc: DirectivityDocument) -> bytes:
    doc.validate()
    m, r, n = doc.data_real.shape
    g = doc.receiver_positions
    rpos = np.column_stack([g.azimuth, g.colatitude, g.radius, g.weights])
    parts = [
        MAGIC,
        struct.pack("<HH", FORMAT_VERSION, _KIND_CODES[doc.kind]),
        _chunk(b"DIMS", struct.pack("<QQQ", m, r, n)),
        _chunk(b"META", _encode_metadata(doc.metadata)),
        _chunk(b"FREQ", _f64(doc.frequencies)),
        _chunk(b"RPOS", _f64(rpos)),
        _chunk(b"DREA", _f64(doc.data_real)),
        _chunk(b"DIMG", _f64(doc.data_imag)),
    ]
    return b"".join(parts)


def decode_document(buf: bytes, source: str = "<bytes>") -> DirectivityDocument:
    if buf[:8] != MAGIC:
        raise DocumentError(f"{source}: not a {EXTENSION} container (bad magic)")
    version, kind_code = struct.unpack("<HH", buf[8:12])
    if version != FORMAT_VERSION:
        raise DocumentError(f"{source}: unsupported container version {version}")
    if kind_code >= len(KINDS):
        raise DocumentError(f"{source}: unknown kind code {kind_code}")
    chunks = {}
    pos = 12
    while pos < len(buf):
        if pos + 12 > len(buf):
            raise DocumentError(f"{source}: truncated chunk header at byte {pos}")
        tag = buf[pos : pos + 4]
        (length,) = struct.unpack("<Q", buf[pos + 4 : pos + 12])
        payload = buf[pos + 12 : pos + 12 + length]
        if len(payload) != length:
            raise DocumentError(f"{source}: chunk {tag!r} truncated")
        chunks[tag] = payload
        pos += 12 + length
    missing = [t.decode() for t in (b"DIMS", b"META", b"FREQ", b"RPOS", b"DREA", b"DIMG") if t not in chunks]
    if missing:
        raise DocumentError(f"{source}: missing chunks {missing}")
    m, r, n = struct.unpack("<QQQ", chunks[b"DIMS"])

    def arr(tag, shape):
        a = np.frombuffer(chunks[tag], dtype="<f8")
        if a.size != int(np.prod(shape)):
            raise DocumentError(f"{source}: chunk {tag.decode()} has {a.size} values, dimensions need {int(np.prod(shape))}")
        return a.reshape(shape).astype(float)

    rpos = arr(b"RPOS", (r, 4))
    try:
        grid = SphericalGrid(rpos[:, 0], rpos[:, 1], rpos[:, 2], rpos[:, 3])
    except ValueError as exc:
        raise DocumentError(f"{source}: invalid receiver positions: {exc}") from None
    doc = DirectivityDocument(
        KINDS[kind_code],
        arr(b"DREA", (m, r, n)),
        arr(b"DIMG", (m, r, n)),
        arr(b"FREQ", (n,)),
        grid,
        _decode_metadata(chunks[b"META"]),
    )
    problems = validation_problems(doc)
    if problems:
        raise DocumentError(f"{source}: " + "; ".join(problems))
    return doc


def write_document(doc: DirectivityDocument, path) -> Path:
    """Write ``doc``; a directory ``path`` gets the kind's canonical file name."""
    path = Path(path)
    if path.is_dir():
        path = path / default_filename(doc)
    path.write_bytes(encode_document(doc))
    return path


def read_document(path) -> DirectivityDocument:
    path = Path(path)
    return decode_document(path.read_bytes(), str(path))


# ------------------------------------------------------------ constructors


def base_metadata(
    source_name: str,
    musician: str = "",
    manufacturer: str = "",
    view_reference: str = "musician facing positive x-axis",
) -> dict[str, str]:
    return {
        MetadataKeys.GLOBAL_SourceName.value: source_name,
        MetadataKeys.GLOBAL_Musician.value: musician,
        MetadataKeys.GLOBAL_SourceManufacturer.value: manufacturer,
        MetadataKeys.SourceView_Reference.value: view_reference,
        MetadataKeys.ReceiverPosition.value: RECEIVER_POSITION_TYPE,
    }


def note_metadata(base: dict[str, str], ctx: NoteContext) -> dict[str, str]:
    md = dict(base)
    md[MetadataKeys.GLOBAL_Description.value] = describe_note(midi_note_name(ctx.midi_note), ctx.dynamic)
    md[MetadataKeys.MidiNote.value] = str(int(ctx.midi_note))
    md[MetadataKeys.SourceTuningFrequency.value] = repr(float(ctx.tuning_frequency))
    if ctx.steady_bounds is not None:
        md[MetadataKeys.SteadyPart.value] = f"{ctx.steady_bounds[0]} {ctx.steady_bounds[1]}"
    return md


def recordings_document(single_sided, sample_rate: float, grid: SphericalGrid, metadata: dict[str, str]) -> DirectivityDocument:
    """Document from a (R x N/2+1) single-sided spectrum of even-length recordings."""
    x = np.asarray(single_sided)
    n = 2 * (x.shape[-1] - 1)
    freqs = np.arange(x.shape[-1]) * (sample_rate / n)
    return DirectivityDocument("recordings", x.real[None], x.imag[None], freqs, grid, metadata)


def single_note_document(frequencies, pressures, grid: SphericalGrid, metadata: dict[str, str]) -> DirectivityDocument:
    p = np.asarray(pressures, dtype=float)
    return DirectivityDocument("single_note", p[None], np.zeros((1,) + p.shape), frequencies, grid, metadata)


def third_octave_document(pressures, grid: SphericalGrid, metadata: dict[str, str]) -> DirectivityDocument:
    md = {k: v for k, v in metadata.items() if k not in {key.value for key in NOTE_KEYS}}
    md[MetadataKeys.GLOBAL_Description.value] = md.get(MetadataKeys.GLOBAL_Description.value, "third-octave average")
    p = np.asarray(pressures, dtype=float)
    return DirectivityDocument("third_octave", p[None], np.zeros((1,) + p.shape), NOMINAL_CENTERS.copy(), grid, md)


def document_sample_rate(doc: DirectivityDocument) -> float:
    if doc.kind != "recordings":
        raise ValueError("only recordings documents carry a sample rate")
    n = 2 * (doc.frequencies.size - 1)
    return float(doc.frequencies[1] * n)


# ------------------------------------------------------------------ OpenDAFF

DAFF_SIGNATURE = b"FW"
DAFF_VERSION = 170
DAFF_CONTENT_MS = 1
DAFF_QUANT_FLOAT32 = 2
DAFF_BLOCK_MAIN, DAFF_BLOCK_CONTENT, DAFF_BLOCK_DATA, DAFF_BLOCK_METADATA = 1, 2, 3, 4
_DAFF_META_STRING = 3
# content type, quantization, channels, records, elements per record, metadata index,
# alpha points/start/end, beta points/start/end, orientation yaw/pitch/roll
_DAFF_MAIN_FORMAT = "<7i2fi5f"


def daff_records(grid: SphericalGrid) -> tuple[float, np.ndarray]:
    """(step, grid index per DAFF record) for an equiangular grid.

    Records run over beta (elevation from the south pole, 0..180) in the
    outer loop and alpha (azimuth) in the inner loop; each pole is stored
    once.  beta = 180 - colatitude, alpha = azimuth.
    """
    step = equiangular_step(grid)
    if step is None:
        raise ValueError("OpenDAFF export requires an equiangular grid")
    n_alpha = int(round(360 / step))
    n_beta = int(round(180 / step)) + 1
    south = len(grid) - 1
    order = [south]
    for b in range(1, n_beta - 1):
        ring = n_beta - 2 - b  # beta ring b holds colatitude 180 - b*step
        order.extend(1 + ring * n_alpha + np.arange(n_alpha))
    order.append(0)
    return step, np.array(order)


def encode_daff(pressures, grid: SphericalGrid, frequencies, metadata: dict[str, str] | None = None) -> bytes:
    """OpenDAFF v1.7 magnitude-spectrum file content (float32, one channel)."""
    p = np.asarray(pressures, dtype=float)
    freqs = np.asarray(frequencies, dtype=float)
    if p.shape != (len(grid), freqs.size):
        raise ValueError("pressures must be (directions x frequencies)")
    step, order = daff_records(grid)
    n_alpha = int(round(360 / step))
    n_beta = int(round(180 / step)) + 1
    n_rec = order.size
    md = {
        "alpha_mapping": "alpha = azimuth (deg, from +x towards +y)",
        "beta_mapping": "beta = 180 - colatitude (deg, 0 = south pole)",
        "record_order": "south pole, beta rings ascending with alpha ascending, north pole",
    }
    md.update(metadata or {})

    main = struct.pack(
        _DAFF_MAIN_FORMAT,
        DAFF_CONTENT_MS, DAFF_QUANT_FLOAT32, 1, n_rec, freqs.size, 0,
        n_alpha, 0.0, 360.0 - step, n_beta, 0.0, 180.0, 0.0, 0.0, 0.0,
    )
    data = np.asarray(p[order], dtype="<f4")
    content = struct.pack("<fi", float(data.max(initial=0.0)), freqs.size) + np.asarray(freqs, "<f4").tobytes()
    record_offsets = np.arange(n_rec, dtype="<u8") * np.uint64(4 * freqs.size)
    content += record_offsets.tobytes()
    meta = [struct.pack("<i", len(md))]
    for k in sorted(md):
        meta.append(struct.pack("<i", _DAFF_META_STRING) + k.encode() + b"\0" + md[k].encode() + b"\0")
    meta_b = b"".join(meta)
    blocks = [(DAFF_BLOCK_MAIN, main), (DAFF_BLOCK_CONTENT, content), (DAFF_BLOCK_METADATA, meta_b), (DAFF_BLOCK_DATA, data.tobytes())]
    header_size = 2 + 4 + 4 + len(blocks) * (4 + 8 + 8)
    out = [DAFF_SIGNATURE, struct.pack("<ii", DAFF_VERSION, len(blocks))]
    offset = header_size
    for bid, payload in blocks:
        out.append(struct.pack("<iQQ", bid, offset, len(payload)))
        offset += len(payload)
    out.extend(payload for _, payload in blocks)
    return b"".join(out)


def write_opendaff(pressures, grid: SphericalGrid, frequencies, path, metadata: dict[str, str] | None = None) -> Path:
    path = Path(path)
    path.write_bytes(encode_daff(pressures, grid, frequencies, metadata))
    return path


def read_opendaff(path) -> dict:
    """Parse a file written by ``write_opendaff``; returns header fields and records."""
    buf = Path(path).read_bytes()
    if buf[:2] != DAFF_SIGNATURE:
        raise ValueError(f"{path}: not a DAFF file")
    version, n_blocks = struct.unpack("<ii", buf[2:10])
    blocks = {}
    for i in range(n_blocks):
        bid, off, size = struct.unpack("<iQQ", buf[10 + 20 * i : 30 + 20 * i])
        blocks[bid] = buf[off : off + size]
    fields = struct.unpack(_DAFF_MAIN_FORMAT, blocks[DAFF_BLOCK_MAIN])
    names = ("content_type", "quantization", "channels", "records", "elements", "metadata_index",
             "alpha_points", "alpha_start", "alpha_end", "beta_points", "beta_start", "beta_end",
             "yaw", "pitch", "roll")
    header = dict(zip(names, fields))
    n_f = header["elements"]
    content = blocks[DAFF_BLOCK_CONTENT]
    fmax, nf = struct.unpack("<fi", content[:8])
    freqs = np.frombuffer(content[8 : 8 + 4 * nf], "<f4").astype(float)
    records = np.frombuffer(blocks[DAFF_BLOCK_DATA], "<f4").reshape(header["records"], n_f).astype(float)
    meta = {}
    mb = blocks.get(DAFF_BLOCK_METADATA, b"")
    if mb:
        (count,) = struct.unpack("<i", mb[:4])
        pos = 4
        for _ in range(count):
            pos += 4
            end = mb.index(b"\0", pos)
            key = mb[pos:end].decode()
            vend = mb.index(b"\0", end + 1)
            meta[key] = mb[end + 1 : vend].decode()
            pos = vend + 1
    return {"version": version, "header": header, "max": fmax, "frequencies": freqs, "records": records, "metadata": meta}


# ----------------------------------------------------------------- FIR bank

FIR_MAGIC = b"SOFALFIR"


def encode_fir_bank(taps, sample_rate: float, grid: SphericalGrid, metadata: dict[str, str]) -> bytes:
    taps = np.asarray(taps, dtype=float)
    rpos = np.column_stack([grid.azimuth, grid.colatitude, grid.radius, grid.weights])
    return b"".join([
        FIR_MAGIC,
        struct.pack("<HH", FORMAT_VERSION, 0),
        _chunk(b"DIMS", struct.pack("<QQd", taps.shape[0], taps.shape[1], float(sample_rate))),
        _chunk(b"META", _encode_metadata(metadata)),
        _chunk(b"RPOS", _f64(rpos)),
        _chunk(b"TAPS", _f64(taps)),
    ])


def decode_fir_bank(buf: bytes) -> tuple[np.ndarray, float, SphericalGrid, dict[str, str]]:
    if buf[:8] != FIR_MAGIC:
        raise DocumentError("not a FIR bank container")
    chunks, pos = {}, 12
    while pos < len(buf):
        if pos + 12 > len(buf):
            raise DocumentError(f"truncated chunk header at byte {pos}")
        tag = buf[pos : pos + 4]
        (length,) = struct.unpack("<Q", buf[pos + 4 : pos + 12])
        chunks[tag] = buf[pos + 12 : pos + 12 + length]
        if len(chunks[tag]) != length:
            raise DocumentError(f"chunk {tag!r} truncated")
        pos += 12 + length
    missing = [t.decode() for t in (b"DIMS", b"META", b"RPOS", b"TAPS") if t not in chunks]
    if missing:
        raise DocumentError(f"missing chunks {missing}")
    r, n, fs = struct.unpack("<QQd", chunks[b"DIMS"])
    rpos = np.frombuffer(chunks[b"RPOS"], "<f8").reshape(r, 4)
    grid = SphericalGrid(rpos[:, 0], rpos[:, 1], rpos[:, 2], rpos[:, 3])
    taps = np.frombuffer(chunks[b"TAPS"], "<f8").reshape(r, n).copy()
    return taps, fs, grid, _decode_metadata(chunks[b"META"])
