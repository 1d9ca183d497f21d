"""One result line per acceptance criterion, printed at the end of the pytest run."""

LINES = []


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return ok
