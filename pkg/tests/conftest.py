import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def array_grid():
    from instrument_directivity.geometry import pentakis_dodecahedron

    return pentakis_dodecahedron()


@pytest.fixture(scope="session")
def dense_grid():
    from instrument_directivity.geometry import make_equiangular_grid

    return make_equiangular_grid(5)


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory):
    """Monopole toy corpus processed once through the command line.

    Returns (manifest path, output directory, wall time in seconds).
    """
    import time

    from instrument_directivity.cli import main
    from instrument_directivity.synthetic import write_toy_corpus

    root = tmp_path_factory.mktemp("toy")
    manifest = write_toy_corpus(root / "corpus")
    out = root / "out"
    t0 = time.perf_counter()
    code = main(["process", str(manifest), "-o", str(out)])
    elapsed = time.perf_counter() - t0
    assert code == 0
    return manifest, out, elapsed


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in range(1, 11):
        parts = ACCEPTANCE.get(n)
        if parts is None:
            terminalreporter.write_line(f"criterion {n:2d}: FAIL (did not complete)")
            continue
        ok = all(p[0] for p in parts)
        detail = "; ".join(("" if p[0] else "FAILED ") + p[1] for p in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
