import pytest
from hypothesis import settings

from xbarmap import HWConfig
from xbarmap.zoo import mobilenetv3_small, resnet18, squeezenet

settings.register_profile("artifact", deadline=None)
settings.load_profile("artifact")


@pytest.fixture(scope="session")
def squeeze():
    return squeezenet()


@pytest.fixture(scope="session")
def mobile():
    return mobilenetv3_small()


@pytest.fixture(scope="session")
def resnet():
    return resnet18()


@pytest.fixture
def hw128():
    return HWConfig()


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, printed at the end of the run."""
    def record(n: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE[n])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
