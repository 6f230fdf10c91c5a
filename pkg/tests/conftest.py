import pytest
from hypothesis import settings

from rsspline import kernels
from rsspline.keyspace import validate_dataset

TOY_KEYS = [b"abaa", b"abab", b"abac", b"bcaa", b"cdee", b"cdef", b"cdeg", b"cdeh", b"efgh"]

_acceptance = {}

# wall-clock deadlines are meaningless on a loaded single-core runner
settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(params=kernels.available())
def backend(request):
    return request.param


@pytest.fixture
def toy():
    return validate_dataset(TOY_KEYS)


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when != "call" and not report.failed:
        return
    # parametrized variants of one criterion collapse into a single line
    number = int(report.nodeid.split("::test_criterion_")[1].split("[")[0])
    seen = _acceptance.setdefault(number, [])
    seen.append("failed" if report.failed else report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        outcomes = _acceptance[number]
        verdict = "FAIL" if "failed" in outcomes else "PASS" if "passed" in outcomes else "SKIP"
        terminalreporter.write_line(f"criterion {number}: {verdict} ({len(outcomes)} run(s))")
