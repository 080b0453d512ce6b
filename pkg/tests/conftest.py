import pytest

# lines of the form "PASS criterion N: ..." collected by the acceptance suite
VERDICTS = []


@pytest.fixture
def verdict():
    def record(number, ok, text):
        line = "%s criterion %d: %s" % ("PASS" if ok else "FAIL", number, text)
        VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
