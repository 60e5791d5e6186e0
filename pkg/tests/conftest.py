import contextlib
import io
import json
import os

import pytest
from hypothesis import HealthCheck, settings

from tensorbounds.cli import main

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# D_(1,1,1)^{x2} listed row by row; "ab" is the leg string (a, b)
ALGILL_LISTING = """
00,11,22 00,12,21 01,10,22 01,12,20
02,10,21 02,11,20 00,21,12 00,22,11
01,20,12 01,22,10 02,20,11 02,21,10
10,01,22 10,02,21 11,00,22 11,02,20
12,00,21 12,01,20 10,21,02 10,22,01
11,20,02 11,22,00 12,20,01 12,21,00
20,01,12 20,02,11 21,00,12 21,02,10
22,00,11 22,01,10 20,11,02 20,12,01
21,10,02 21,12,00 22,10,01 22,11,00
"""
ALGILL_SELECTED = [((0, 0), (1, 1), (2, 2)), ((1, 2), (0, 0), (2, 1))]


def parse_listing(text):
    return [
        tuple(tuple(int(c) for c in leg) for leg in tok.split(","))
        for tok in text.split()
    ]


@pytest.fixture(scope="session")
def algill_points():
    return parse_listing(ALGILL_LISTING)


def run_cli(*argv):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def run_cli_json(*argv):
    code, out, err = run_cli(*argv)
    assert code == 0, err
    return json.loads(out)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
