"""Collects acceptance verdicts and prints them after the test run."""

VERDICTS: list[tuple[str, bool, str]] = []


def record(label: str, ok: bool, detail: str) -> bool:
    VERDICTS.append((label, bool(ok), detail))
    print(f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(VERDICTS, key=lambda v: (len(v[0].rstrip("abc")), v[0])):
        terminalreporter.write_line(f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})")
