import pytest

import fitlog
import hierlag.pipeline
import hierlag.solver
from hierlag.hiergroup import HierGroupStructure, is_suffix_closed

_original_fit = hierlag.solver.fit


def _checked_fit(design, structure, lam, config=None, beta0=None):
    beta, trace = _original_fit(design, structure, lam, config, beta0)
    fitlog.record(is_suffix_closed(HierGroupStructure(design.M, design.L), beta), lam)
    return beta, trace


@pytest.fixture(autouse=True)
def _audit_every_fit(monkeypatch):
    """Route all solver calls through a hierarchical-sparsity audit."""
    monkeypatch.setattr(hierlag.solver, "fit", _checked_fit)
    monkeypatch.setattr(hierlag.pipeline, "fit", _checked_fit)
    start = len(fitlog.VIOLATIONS)
    yield
    assert len(fitlog.VIOLATIONS) == start, "a fit produced non-nested zero groups"


def pytest_terminal_summary(terminalreporter):
    lines = fitlog.criterion_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
    if fitlog.FITS:
        # fits made in worker processes are not seen here
        terminalreporter.write_line(
            f"session audit: {len(fitlog.VIOLATIONS)} hierarchical-sparsity violations in "
            f"{len(fitlog.FITS)} in-process solver outputs")
