from __future__ import annotations

import pytest

from tdsforms.errors import SchemaError
from tdsforms.verify import SUITES, laplace_det, oracle_wedge_value, run_suite
from tdsforms.exterior import ExteriorForm


@pytest.mark.parametrize("seed", [3, 11])
@pytest.mark.parametrize("suite", SUITES)
def test_suites_pass_at_other_seeds(suite, seed):
    report = run_suite(suite, seed=seed, samples=16)
    assert report.passed, report.failures()[:3]


def test_reports_are_reproducible():
    assert run_suite("tds", seed=5, samples=16).to_json() == run_suite("tds", seed=5, samples=16).to_json()


def test_unknown_suite():
    with pytest.raises(SchemaError):
        run_suite("nope")


def test_oracles_on_known_values():
    assert laplace_det([[1, 2], [3, 4]]) == -2
    dx, dy = ExteriorForm.basis(2, (0,)), ExteriorForm.basis(2, (1,))
    assert oracle_wedge_value(dx, dy, [[1, 0], [0, 1]]) == 1
