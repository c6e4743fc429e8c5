"""Collects one verdict line per acceptance criterion and prints them at the end."""

import pytest

_VERDICTS: dict[int, tuple[str, str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of the calling test under its criterion number."""
    holder = {}

    def declare(number: int, title: str):
        holder["key"] = (number, title)

    yield declare
    if "key" in holder:
        number, title = holder["key"]
        failed = getattr(request.node, "_failed", False)
        # parametrized criteria: any failing case fails the criterion
        if failed or _VERDICTS.get(number, ("PASS",))[0] == "PASS":
            _VERDICTS[number] = ("FAIL" if failed else "PASS", title, request.node.originalname)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed:
        item._failed = True


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        verdict, title, name = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}  ({name})")
