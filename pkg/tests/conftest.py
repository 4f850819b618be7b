import sys

ACCEPTANCE_LINES = []


def record(number: int, ok, detail: str) -> None:
    """ok is True, False, or None for a skipped criterion."""
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    line = f"ACCEPTANCE {number}: {status}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.stderr)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
