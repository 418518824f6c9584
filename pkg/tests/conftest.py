import sys

import numpy as np
import pytest

from cvbound.fock import FockCutoff, TwoModeState
from cvbound.states import MixtureSpec


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_density(rng: np.random.Generator, n_max: int, rank: int = 3) -> TwoModeState:
    cutoff = FockCutoff(n_max)
    g = rng.normal(size=(cutoff.dim2, rank)) + 1j * rng.normal(size=(cutoff.dim2, rank))
    m = g @ g.conj().T
    return TwoModeState(m / np.trace(m).real, cutoff)


@pytest.fixture(scope="session")
def preset_spec():
    return MixtureSpec.build()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
