import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance_verdict(request):
    """Records a one-line verdict echoed in the terminal summary."""

    def record(line):
        request.config._acceptance_lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
