import pytest

from glauberfock import build_glauber_fock_profile, coupling_matrix, evolution_operator

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gf633():
    """59-site lattice with C1 = 0.37 /cm propagated over 10 cm."""
    return evolution_operator(coupling_matrix(build_glauber_fock_profile(59, 0.37)), 10.0)


@pytest.fixture(scope="session")
def gf800():
    """59-site lattice with C1 = 0.36 /cm propagated over 10 cm."""
    return evolution_operator(coupling_matrix(build_glauber_fock_profile(59, 0.36)), 10.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
