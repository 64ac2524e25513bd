"""Generate a toy corpus, process it and summarize the balloon spread.

    python3 scripts/run_toy_pipeline.py /tmp/toy [--pattern cardioid]

For the monopole the level spread over all directions and bands should
stay well below 0.1 dB; the cardioid shows a front/back ratio instead.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from instrument_directivity.bands import NOMINAL_CENTERS
from instrument_directivity.pipeline import load_manifest, process_corpus
from instrument_directivity.synthetic import write_toy_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory")
    ap.add_argument("--pattern", choices=("monopole", "cardioid"), default="monopole")
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args()
    root = Path(args.directory)
    manifest_path = write_toy_corpus(root / "corpus", args.pattern)
    t0 = time.perf_counter()
    result = process_corpus(load_manifest(manifest_path), root / "out", args.jobs, manifest_path.parent)
    elapsed = time.perf_counter() - t0
    for n in result.notes:
        print(f"note {n.midi}: {n.error or f'{n.partials.n_overtones} overtones ({n.partials.termination_reason})'}")
    if not result.ok:
        raise SystemExit(f"processing failed: {result.error}")
    hi = result.interpolated.pressures
    active = np.flatnonzero(np.any(hi > 0, axis=0))
    db = 20 * np.log10(hi[:, active])
    print(f"processed in {elapsed:.1f} s; bands with energy: {', '.join(f'{f:g}' for f in NOMINAL_CENTERS[active])} Hz")
    print(f"level spread over {hi.shape[0]} directions and {active.size} bands: {np.ptp(db):.2e} dB")
    for p in result.outputs:
        print(f"wrote {p}")


if __name__ == "__main__":
    main()
