import gmpy2
import pytest

PREC = 256


@pytest.fixture(autouse=True)
def working_precision():
    """Test-side arithmetic on mpfr values runs at the package default precision."""
    with gmpy2.context(gmpy2.get_context(), precision=PREC):
        yield PREC


def close(a, b, tol):
    """``|a - b| <= tol * max(1, |b|)``."""
    scale = max(1, abs(b))
    return abs(a - b) <= tol * scale


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
