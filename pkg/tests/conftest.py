import pytest

_VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_VERDICTS] = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion; returns the flag."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        request.config.stash[_VERDICTS][number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for number in sorted(verdicts):
            terminalreporter.write_line(verdicts[number])
