"""Session-scoped Monte Carlo runs shared between the harness tests and the
acceptance suite, so each full-scale table design is simulated once."""

import pytest

from levyestim.mc import run_preset


def _by_cell(rows):
    return {(r.estimator, r.param): r for r in rows}


@pytest.fixture(scope="session")
def table1_beta08():
    return _by_cell(run_preset("table1", beta=0.8, n_list=[2001]))


@pytest.fixture(scope="session")
def table1_beta15():
    return _by_cell(run_preset("table1", beta=1.5, n_list=[2001]))


@pytest.fixture(scope="session")
def table3_beta15():
    return _by_cell(run_preset("table3", beta=1.5, n_list=[5000]))


@pytest.fixture(scope="session")
def table4_beta15():
    return _by_cell(run_preset("table4", beta=1.5, n_list=[5000]))
