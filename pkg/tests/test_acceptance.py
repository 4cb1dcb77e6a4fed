"""Acceptance battery: one test and one PASS/FAIL line per criterion.

Each test runs at its full sample size and tolerance. Lines are collected and
printed again in the terminal summary, so they show without ``-s``.
"""

import pytest

from interlacements import cli, harness

SEED = 1
RESULTS: list[str] = []


def _run(number):
    (check,) = harness.run_battery(SEED, only={number})
    RESULTS.append(check.summary())
    print(check.summary())
    for line in check.lines:
        print("    " + line)
    return check


def _details(check):
    return "\n".join(line for line in check.lines if line.startswith("[FAIL]")) or "\n".join(check.lines)


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number):
    check = _run(number)
    assert check.passed, f"criterion {number} failed:\n{_details(check)}"


def _strip_timing(path):
    return b"".join(line for line in path.read_bytes().splitlines(keepends=True)
                    if not line.startswith(b"wall_time"))


def test_criterion_10_determinism(tmp_path):
    dirs = [tmp_path / "first", tmp_path / "second"]
    codes = [cli.main(["suite", "--seed", str(SEED), "--samples", "2000", "--out", str(d)]) for d in dirs]
    names = sorted(p.name for p in dirs[0].iterdir() if p.name != "timing.txt")
    same = codes[0] == codes[1] and names == sorted(p.name for p in dirs[1].iterdir()
                                                     if p.name != "timing.txt")
    diff = [n for n in names if _strip_timing(dirs[0] / n) != _strip_timing(dirs[1] / n)]
    ok = same and not diff and len(names) > 20
    line = f"[{'PASS' if ok else 'FAIL'}] criterion 10: byte-identical suite artifacts ({len(names)} files)"
    RESULTS.append(line)
    print(line)
    assert ok, f"differing artifacts: {diff}"
