import os
import sys

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def bhattacharyya_sum(points, probs, sigma2):
    """Hand-expanded rho=1 integral: sum_{x,x'} q q' exp(-|x-x'|^2 / (8 sigma2))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and len(probs) > 1:
        pts = pts.T
    q = np.asarray(probs, dtype=float)
    total = 0.0
    for i in range(len(q)):
        for j in range(len(q)):
            total += q[i] * q[j] * np.exp(-np.sum((pts[i] - pts[j]) ** 2) / (8 * sigma2))
    return total


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
