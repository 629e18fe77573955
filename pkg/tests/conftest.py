import pytest

from idtrack.geometry import default_camera

_ACCEPTANCE: list[str] = []


@pytest.fixture
def cam():
    return default_camera()


@pytest.fixture(scope="session")
def acceptance_line():
    """Record one pass/fail line per acceptance criterion."""

    def record(tag: str, ok: bool, detail: str) -> None:
        line = f"{tag}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s[2 : s.index(":")])):
            terminalreporter.write_line(line)
