import numpy as np
import pytest

from _helpers import ACCEPTANCE, TRACE_AUDIT


def pytest_terminal_summary(terminalreporter):
    v = TRACE_AUDIT["violations"]
    status = "PASS" if not v else "FAIL"
    terminalreporter.write_line(
        f"[{status}] trace interlacing audit over the whole run: "
        f"{TRACE_AUDIT['traces']} traces, {TRACE_AUDIT['steps']} steps, {len(v)} violations")
    for msg in v[:20]:
        terminalreporter.write_line("    " + msg)
    if not ACCEPTANCE:
        return
    if 3 in ACCEPTANCE:
        # the audit is only complete now that every test has run
        ok, detail = ACCEPTANCE[3]
        ACCEPTANCE[3] = (ok and not v, f"{detail}; whole run: {TRACE_AUDIT['traces']} traces, {len(v)} violations")
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_sessionfinish(session, exitstatus):
    if TRACE_AUDIT["violations"] and exitstatus == 0:
        session.exitstatus = 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
