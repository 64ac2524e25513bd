"""Write the synthetic three-note toy instrument (WAV files and manifest).

    python3 scripts/make_toy_corpus.py toy/ [--pattern cardioid] [--steady 1.0]
"""

import argparse

from instrument_directivity.synthetic import TOY_NOTES, write_toy_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory")
    ap.add_argument("--pattern", choices=("monopole", "cardioid"), default="monopole")
    ap.add_argument("--steady", type=float, default=1.0, help="steady part in seconds")
    ap.add_argument("--notes", type=int, nargs="+", default=list(TOY_NOTES), help="MIDI note numbers")
    args = ap.parse_args()
    path = write_toy_corpus(args.directory, args.pattern, tuple(args.notes), args.steady)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
