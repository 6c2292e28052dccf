import os
import sys

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.stderr)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(config, items):
    # long statistical experiments always run unless explicitly skipped
    if os.environ.get("TWOPOINT_SKIP_SLOW"):
        import pytest

        skip = pytest.mark.skip(reason="TWOPOINT_SKIP_SLOW set")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip)
