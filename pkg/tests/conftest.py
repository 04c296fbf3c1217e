import pytest

_RESULTS = {}


class Recorder:
    def __init__(self):
        self.line = None

    def __call__(self, number, checks, detail=""):
        """Record a PASS/FAIL line for one acceptance criterion and return whether it passed."""
        failed = [name for name, ok in checks.items() if not ok]
        status = "FAIL" if failed else "PASS"
        text = f"criterion {number}: {status}"
        if failed:
            text += " (failed: " + ", ".join(failed) + ")"
        if detail:
            text += f"  [{detail}]"
        self.number, self.line = number, text
        return not failed


@pytest.fixture
def criterion(request):
    rec = Recorder()
    yield rec
    if rec.line is None:
        _RESULTS[request.node.name] = f"{request.node.name}: FAIL (raised before reporting)"
    else:
        _RESULTS[f"{rec.number:02d}"] = rec.line


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_RESULTS):
            terminalreporter.write_line(_RESULTS[key])
