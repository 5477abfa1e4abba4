import numpy as np
import pytest

from projroc.study import PopulationSample, Study


def make_study(n_f=30, n_g=40, d=2, K=2, x=None, seed=0):
    rng = np.random.default_rng(seed)
    F = PopulationSample(rng.uniform(size=(n_f, d)), rng.normal(size=(n_f, K)), "F")
    G = PopulationSample(rng.uniform(size=(n_g, d)), rng.normal(size=(n_g, K)), "G")
    if x is None:
        x = np.full(d, 0.5)
    return Study(F, G, np.asarray(x, dtype=float))


@pytest.fixture
def small_study():
    return make_study()


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
