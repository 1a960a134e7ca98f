import sys

import pytest

from posettrack import Dataset, Detection


def make_dataset(rows, name="test"):
    """rows: (t, x, y, z[, truth_id[, vel]]) tuples; index = row order."""
    dets = []
    for k, r in enumerate(rows):
        t, x, y, z = r[:4]
        tid = r[4] if len(r) > 4 else None
        vel = r[5] if len(r) > 5 else None
        dets.append(Detection(k, t, (x, y, z), vel, tid))
    return Dataset.from_detections(dets, name)


@pytest.fixture
def air_gates():
    from posettrack import ConstraintGates

    return ConstraintGates(dt_max=300.0, horiz_max=500e3, vert_max=500.0, speed_max=300.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
