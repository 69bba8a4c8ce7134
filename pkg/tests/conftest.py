import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion verdict for the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]
    state = {"recorded": False}

    def record(number, title, ok, detail=""):
        verdict = "PASS" if ok else "FAIL"
        line = f"[{verdict}] criterion {number}: {title}"
        lines.append(line + (f" ({detail})" if detail else ""))
        state["recorded"] = True
        print(lines[-1])
        assert ok, detail

    yield record
    if not state["recorded"]:
        lines.append(f"[FAIL] {request.node.name}: raised before a verdict")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[ACCEPTANCE_KEY]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
