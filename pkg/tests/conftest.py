import numpy as np
import pytest

from clusterflow.rng import RngStream


@pytest.fixture
def rng(request):
    return RngStream.for_labels(12345, request.node.name)


@pytest.fixture
def nprng(request):
    return np.random.default_rng(abs(hash(request.node.name)) % 2**32)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and rep.when == "call":
                status = "PASS" if rep.passed else "FAIL"
                lines.append((props["criterion"], f"CRITERION {props['criterion']}: {status}  "
                                                 f"{props.get('detail', '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
