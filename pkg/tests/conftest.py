import pytest

_criteria = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria.append((props["criterion"], report.passed, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_criteria, key=lambda c: int(c[0].split()[0])):
        line = f"{'PASS' if passed else 'FAIL'}  {name}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)


@pytest.fixture
def criterion(record_property):
    """``criterion(name)`` tags the test; ``criterion.detail(text)`` adds the measured values."""

    class Tag:
        def __call__(self, name):
            record_property("criterion", name)

        def detail(self, text):
            record_property("detail", text)
            print(text)

    return Tag()
