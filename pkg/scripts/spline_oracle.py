"""Pre-register the degree-1 harmonic-field error bound for the spline interpolator.

The oracle rebuilds the interpolant from a truncated Legendre expansion of
the order-1 pseudo-spline kernel (no closed form involved), fits a degree-1
spherical harmonic sampled on the 32-point array and evaluates it on the 5
degree grid.  The relative RMS error, plus a 10 % margin, is written to
tests/data/spline_threshold.json.

    python3 scripts/spline_oracle.py [--terms 6000]
"""

import argparse
import json
from pathlib import Path

import numpy as np

from instrument_directivity.geometry import make_equiangular_grid, pentakis_dodecahedron

FIELD_DIRECTION = np.array([0.3, -0.5, 0.8])
MARGIN = 1.10


def legendre_kernel(z: np.ndarray, terms: int) -> np.ndarray:
    """(1/2pi) sum_{n>=1} P_n(z) / ((n+1)(n+2)(n+3)) by three-term recurrence."""
    z = np.asarray(z, dtype=float)
    p_prev, p = np.ones_like(z), z.copy()
    acc = p / (2 * 3 * 4)
    for n in range(1, terms):
        p_prev, p = p, ((2 * n + 1) * z * p - n * p_prev) / (n + 1)
        m = n + 1
        acc += p / ((m + 1) * (m + 2) * (m + 3))
    return acc / (2 * np.pi)


def harmonic_field(u: np.ndarray) -> np.ndarray:
    d = FIELD_DIRECTION / np.linalg.norm(FIELD_DIRECTION)
    return u @ d


def oracle_error(terms: int) -> float:
    nodes, targets = pentakis_dodecahedron(), make_equiangular_grid(5)
    un, ut = nodes.unit_vectors(), targets.unit_vectors()
    q = len(nodes)
    a = np.zeros((q + 1, q + 1))
    a[:q, :q] = legendre_kernel(np.clip(un @ un.T, -1, 1), terms)
    a[:q, q] = a[q, :q] = 1.0
    rhs = np.append(harmonic_field(un), 0.0)
    coef = np.linalg.solve(a, rhs)
    est = legendre_kernel(np.clip(ut @ un.T, -1, 1), terms) @ coef[:q] + coef[q]
    truth = harmonic_field(ut)
    return float(np.sqrt(np.mean((est - truth) ** 2)) / np.sqrt(np.mean(truth**2)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=6000)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "data" / "spline_threshold.json"))
    args = ap.parse_args()
    err = oracle_error(args.terms)
    record = {
        "field_direction": FIELD_DIRECTION.tolist(),
        "legendre_terms": args.terms,
        "oracle_relative_rms_error": err,
        "margin": MARGIN,
        "threshold": err * MARGIN,
    }
    Path(args.out).write_text(json.dumps(record, indent=2) + "\n")
    print(json.dumps(record, indent=2))


if __name__ == "__main__":
    main()
