"""Collects one verdict line per acceptance criterion."""
LINES: dict = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    LINES[number] = line
    print(line)
    return line
