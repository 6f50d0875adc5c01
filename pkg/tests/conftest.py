import pytest

from tmwkb import make_constant, make_parabolic, make_sech2

DOMAIN = (-2e-9, 2e-9)


@pytest.fixture(scope="session")
def parabola():
    return make_parabolic(1.0, DOMAIN)


@pytest.fixture(scope="session")
def sech2():
    return make_sech2(1e-18, 1e-9, DOMAIN)


@pytest.fixture(scope="session")
def flat():
    return make_constant(0.0, DOMAIN)


# sweep fixtures shared by the acceptance suite and the sweep invariants

from tmwkb.experiments import NUMERICAL_METHODS, SweepConfig, run_error_analysis  # noqa: E402

SWEEP_N = 100_000


def _full_sweep(pot):
    return run_error_analysis([SweepConfig(pot, m, n_steps=SWEEP_N) for m in NUMERICAL_METHODS])


@pytest.fixture(scope="session")
def parabola_report(parabola):
    return _full_sweep(parabola)


@pytest.fixture(scope="session")
def sech2_report(sech2):
    return _full_sweep(sech2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
