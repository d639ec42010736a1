"""Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""

import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = _CRITERION.match(item.name)
    if not m or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
    _results[int(m.group(1))] = ("PASS" if rep.passed else "FAIL", detail)


@pytest.fixture
def detail(request):
    """Attach a one-line summary to the current criterion."""

    def note(text: str) -> None:
        request.node.user_properties = [p for p in request.node.user_properties if p[0] != "detail"]
        request.node.user_properties.append(("detail", text))

    return note


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, text = _results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {text}".rstrip())
