"""Command-line front end.

Exit codes: 0 everything succeeded, 1 some inputs or notes failed,
2 invalid invocation (bad arguments, unreadable or invalid manifest).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import containers
from .bands import NOMINAL_CENTERS
from .directivity import P0, BandDirectivity
from .firgen import FIR_LENGTH, SAMPLE_RATE, band_fir_bank
from .geometry import equiangular_step, make_equiangular_grid
from .interpolate import upsample
from .pipeline import ManifestError, load_manifest, process_corpus

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _band_grid(doc: containers.DirectivityDocument, step: float | None, smoothing: float):
    """(pressures, grid) of a third-octave document, upsampled to ``step`` if given."""
    if doc.kind != "third_octave":
        raise UsageError(f"expected a third_octave document, got {doc.kind}")
    p = doc.data_real[0]
    if step is None:
        return p, doc.receiver_positions
    try:
        dense = make_equiangular_grid(step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if equiangular_step(doc.receiver_positions) == step:
        return p, doc.receiver_positions
    # stored third-octave balloons are calibrated
    d = BandDirectivity(p, doc.receiver_positions, "calibrated")
    hi = upsample(d, dense, smoothing)
    return hi.pressures, dense


def _read(path) -> containers.DirectivityDocument:
    try:
        return containers.read_document(path)
    except (OSError, containers.DocumentError) as exc:
        raise UsageError(str(exc)) from None


def cmd_process(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except ManifestError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.output) if args.output else Path(args.manifest).parent / "out"
    result = process_corpus(manifest, out, args.jobs, Path(args.manifest).parent)
    for n in result.notes:
        status = "ok" if n.error is None else f"FAILED ({n.error})"
        extra = f", {n.partials.n_overtones} overtones, stop: {n.partials.termination_reason}" if n.partials else ""
        print(f"note {n.midi}: {status}{extra}")
    if result.error:
        print(f"instrument: FAILED ({result.error})")
    for p in result.outputs + [p for n in result.notes for p in n.outputs]:
        print(f"wrote {p}")
    return EXIT_OK if result.ok else EXIT_PARTIAL


def cmd_validate(args) -> int:
    failed = 0
    for path in args.paths:
        try:
            buf = Path(path).read_bytes()
            if buf[:8] == containers.FIR_MAGIC:
                taps, fs, grid, _ = containers.decode_fir_bank(buf)
                if not np.all(np.isfinite(taps)):
                    raise containers.DocumentError("non-finite taps")
                detail = f"FIR bank, {taps.shape[0]} directions x {taps.shape[1]} taps"
            elif buf[:2] == containers.DAFF_SIGNATURE:
                info = containers.read_opendaff(path)
                if info["records"].shape[0] != info["header"]["records"]:
                    raise containers.DocumentError("record count mismatch")
                detail = f"OpenDAFF, {info['header']['records']} records"
            else:
                doc = containers.decode_document(buf, str(path))
                detail = f"{doc.kind}, R={len(doc.receiver_positions)}, N={doc.frequencies.size}"
            print(f"PASS {path}: {detail}")
        except Exception as exc:  # every file is reported
            failed += 1
            print(f"FAIL {path}: {exc}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_balloon(args) -> int:
    doc = _read(args.document)
    if doc.kind == "recordings":
        raise UsageError("balloons need a single_note or third_octave document")
    if doc.kind == "single_note" and args.interpolate is not None:
        raise UsageError("only third_octave documents can be interpolated")
    if doc.kind == "third_octave":
        if args.index is None:
            matches = np.flatnonzero(NOMINAL_CENTERS == args.frequency) if args.frequency else []
            if len(matches) != 1:
                raise UsageError("give --index or a nominal band centre via --frequency")
            idx = int(matches[0])
        else:
            idx = args.index
        p, grid = _band_grid(doc, args.interpolate, args.smoothing)
    else:
        idx = args.index if args.index is not None else 0
        p, grid = doc.data_real[0], doc.receiver_positions
    if not 0 <= idx < p.shape[1]:
        raise UsageError(f"index {idx} out of range 0..{p.shape[1] - 1}")
    with np.errstate(divide="ignore"):
        level = 20 * np.log10(p[:, idx] / P0)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        out.write("azimuth_deg colatitude_deg level_db\n")
        for az, col, lv in zip(grid.azimuth, grid.colatitude, level):
            out.write(f"{az:.6f} {col:.6f} {lv:.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_interpolate(args) -> int:
    doc = _read(args.document)
    p, grid = _band_grid(doc, args.step, args.smoothing)
    new = containers.third_octave_document(p, grid, doc.metadata)
    containers.write_document(new, args.output)
    print(f"wrote {args.output} ({len(grid)} directions)")
    return EXIT_OK


def cmd_fir(args) -> int:
    doc = _read(args.document)
    p, grid = _band_grid(doc, args.step, args.smoothing)
    bank = band_fir_bank(p, grid, args.length, args.sample_rate)
    Path(args.output).write_bytes(containers.encode_fir_bank(bank.taps, bank.sample_rate, grid, doc.metadata))
    print(f"wrote {args.output} ({len(grid)} filters x {bank.length} taps)")
    return EXIT_OK


def cmd_export_daff(args) -> int:
    doc = _read(args.document)
    p, grid = _band_grid(doc, args.step, args.smoothing)
    try:
        containers.write_opendaff(p, grid, doc.frequencies, args.output,
                                  {"SourceName": doc.metadata.get("GLOBAL_SourceName", "")})
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_info(args) -> int:
    buf = Path(args.document).read_bytes()
    if buf[:8] == containers.FIR_MAGIC:
        taps, fs, grid, md = containers.decode_fir_bank(buf)
        print(f"kind: fir_bank\ndirections: {taps.shape[0]}\ntaps: {taps.shape[1]}\nsample_rate: {fs:g}")
    else:
        doc = _read(args.document)
        md = doc.metadata
        f = doc.frequencies
        print(f"kind: {doc.kind}\ndimensions (M, R, N): {doc.data_real.shape}")
        if f.size:
            print(f"frequencies: {f[0]:g} .. {f[-1]:g} Hz")
        step = equiangular_step(doc.receiver_positions)
        print(f"grid: {'equiangular %g deg' % step if step else 'scattered'}")
    for k in sorted(md):
        print(f"{k}: {md[k]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="instrument-directivity", description="Musical instrument directivity processing.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the full chain over a corpus manifest")
    p.add_argument("manifest", help="YAML corpus manifest")
    p.add_argument("-o", "--output", help="output directory (default: <manifest dir>/out)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="notes processed in parallel (default: logical cores)")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("validate", help="check container invariants of one or more files")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("balloon", help="print azimuth, colatitude, level rows for one band or partial")
    p.add_argument("document")
    p.add_argument("--index", type=int, help="band or partial index (0-based)")
    p.add_argument("--frequency", type=float, help="nominal band centre in Hz (third_octave only)")
    p.add_argument("--interpolate", type=float, metavar="STEP", help="upsample to an equiangular grid first")
    p.add_argument("--smoothing", type=float, default=0.0, help="spline smoothing parameter")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_balloon)

    for name, func, helptext in (
        ("interpolate", cmd_interpolate, "upsample a third_octave document to an equiangular grid"),
        ("fir", cmd_fir, "minimum-phase FIR bank from a third_octave document"),
        ("export-daff", cmd_export_daff, "OpenDAFF magnitude-spectrum export of a third_octave document"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("document")
        p.add_argument("-o", "--output", required=True)
        p.add_argument("--step", type=float, default=5.0, help="equiangular grid step in degrees (default 5)")
        p.add_argument("--smoothing", type=float, default=0.0, help="spline smoothing parameter")
        if name == "fir":
            p.add_argument("--length", type=int, default=FIR_LENGTH)
            p.add_argument("--sample-rate", type=float, default=SAMPLE_RATE)
        p.set_defaults(func=func)

    p = sub.add_parser("info", help="print dimensions and metadata of a document")
    p.add_argument("document")
    p.set_defaults(func=cmd_info)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
