import pytest

from treatdur import TreatmentModel, constant, piecewise


@pytest.fixture
def base_model():
    """lambda_W = 1, lambda_0 = 0.5, lambda_1 = 2."""
    return TreatmentModel(constant(1.0), constant(0.5), constant(2.0))


@pytest.fixture
def reversed_model():
    """h0 > h1, so the flawed inversion can go negative."""
    return TreatmentModel(constant(1.0), constant(2.0), constant(0.5))


@pytest.fixture
def piecewise_model():
    # breakpoints kept off the 0.1 grid used by finite-difference checks
    return TreatmentModel(
        piecewise([0.75, 1.85], [1.0, 0.4, 1.5]),
        piecewise([1.25, 2.45], [0.5, 1.2, 0.3]),
        piecewise([0.55], [2.0, 0.7]),
    )


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
