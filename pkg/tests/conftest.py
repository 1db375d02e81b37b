from __future__ import annotations

import sys

from hypothesis import HealthCheck, settings

settings.register_profile("subdiff", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("subdiff")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(verdicts):
        terminalreporter.write_line(verdicts[k])
