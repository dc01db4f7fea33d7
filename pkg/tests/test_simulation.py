import numpy as np
import pytest

from gmopg import simulation
from gmopg.baseline import Exponential
from gmopg.errors import ConvergenceError, ParameterError
from gmopg.family import GMOPG
from gmopg.simulation import mc_study

TRUTH = GMOPG(2.0, 2.0, 1.0, Exponential(1.0))


def test_diagnostic_mode_has_zero_error():
    rep = mc_study(TRUTH, (20,), N=1, seed=0, diagnostic=True)
    assert all(c.bias == 0 and c.mse == 0 for c in rep.cells)
    assert {c.parameter for c in rep.cells} == {"theta", "alpha", "lam", "beta"}


def test_same_seed_same_report():
    a = mc_study(TRUTH, (30,), N=3, seed=5)
    b = mc_study(TRUTH, (30,), N=3, seed=5)
    assert a.cells == b.cells
    np.testing.assert_array_equal(a.estimates[30], b.estimates[30])


def test_parallel_schedule_does_not_change_report():
    a = mc_study(TRUTH, (15, 30), N=2, seed=8)
    b = mc_study(TRUTH, (15, 30), N=2, seed=8, workers=2)
    assert a.cells == b.cells


def test_cell_invariants():
    rep = mc_study(TRUTH, (15, 30), N=4, seed=1)
    for c in rep.cells:
        assert c.mse >= c.bias**2 - 1e-12
        assert c.converged + c.failed == 4
        assert c.converged <= rep.replicates
    assert len(rep.cells) == 8
    d = rep.as_dict()
    assert d["replicates"] == 4 and len(d["cells"]) == 8 and isinstance(d["trend"], bool)


def test_failures_are_counted_and_flagged(monkeypatch):
    def broken(data, config):
        raise ConvergenceError("nothing worked")

    monkeypatch.setattr(simulation, "fit", broken)
    rep = mc_study(TRUTH, (10,), N=3, seed=0)
    for c in rep.cells:
        assert c.failed == 3 and c.converged == 0 and c.flagged
        assert np.isnan(c.bias)


def test_estimates_are_reported_on_the_truth_side_of_the_mirror():
    truth = TRUTH.replace(lam=-1.0)
    rep = mc_study(truth, (40,), N=3, seed=3)
    assert np.all(rep.estimates[40][:, 2] <= 0)


def test_trend_and_shrinkage_helpers():
    cells = []
    for n, scale in ((10, 2.0), (20, 1.0)):
        for name in ("theta", "alpha"):
            cells.append(simulation.Cell(name, n, 0.1 * scale, 0.02 * scale, 5, 0, 0, False))
    rep = simulation.SimulationReport({"theta": 1.0, "alpha": 1.0}, "gmop-e", (10, 20), 5, 0, cells)
    assert rep.trend
    assert rep.shrinking_parameters(10, 20) == ["theta", "alpha"]


def test_validation():
    with pytest.raises(ParameterError):
        mc_study(TRUTH, (4,), N=2)
    with pytest.raises(ParameterError):
        mc_study(TRUTH, (10,), N=0)
