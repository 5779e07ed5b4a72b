import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def mnist_dir():
    from qcnn.training import default_data_dir

    root = Path(default_data_dir())
    if not (root / "train-images-idx3-ubyte.gz").exists():
        pytest.skip(f"MNIST IDX files not found under {root} (set QCNN_DATA_DIR)")
    return root


# -- acceptance reporting ------------------------------------------------------
# Tests marked ``criterion(n, title)`` get one PASS/FAIL line each in the
# terminal summary; details come from ``record_property("detail", ...)``.

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[marker] = ("PASS" if report.passed else "SKIP" if report.skipped else "FAIL", detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), (status, detail) in sorted(_CRITERIA.items()):
        line = f"criterion {number:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
