import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from m1chain.hilbert import enumerate_basis  # noqa: E402
from m1chain.operators import build_m1, build_supercharge  # noqa: E402
from m1chain.spectra import classify_susy, diagonalize  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def basis(n):
    return enumerate_basis(n)


@functools.lru_cache(maxsize=None)
def supercharge(n):
    return build_supercharge(basis(n))


@functools.lru_cache(maxsize=None)
def m1(n):
    return build_m1(basis(n), supercharge(n))


@functools.lru_cache(maxsize=None)
def m1_spectrum(n):
    return diagonalize(m1(n))


@functools.lru_cache(maxsize=None)
def m1_classified(n):
    return classify_susy(m1_spectrum(n), supercharge(n))


def record(label: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
