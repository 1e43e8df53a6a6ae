import pytest

_VERDICTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion.

    Call the returned function with a detail string once the checks have
    run; the verdict is taken from the test outcome.
    """
    name = request.node.name
    detail = {"text": ""}

    def report(text: str) -> None:
        detail["text"] = text

    yield report
    outcome = getattr(request.node, "_criterion_passed", None)
    _VERDICTS.append((name, bool(outcome), detail["text"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._criterion_passed = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, text in _VERDICTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {text}")
