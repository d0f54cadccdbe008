import time
from contextlib import contextmanager

import pytest

VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[VERDICTS] = {}


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(verdicts):
        terminalreporter.write_line(verdicts[num])


class Criterion:
    def __init__(self, num, title, budget_s):
        self.num, self.title, self.budget_s = num, title, budget_s
        self.checks = []

    def check(self, ok, detail):
        self.checks.append((bool(ok), detail))
        return bool(ok)

    @property
    def failures(self):
        return [d for ok, d in self.checks if not ok]


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    verdicts = request.config.stash[VERDICTS]

    @contextmanager
    def run(num, title, budget_s):
        c = Criterion(num, title, budget_s)
        t0 = time.perf_counter()
        try:
            yield c
        except Exception as exc:
            verdicts[num] = f"FAIL  {num:>2}. {title}: {type(exc).__name__}: {exc}"
            raise
        elapsed = time.perf_counter() - t0
        c.check(elapsed < budget_s, f"runtime {elapsed:.1f} s exceeds {budget_s:g} s")
        status = "PASS" if not c.failures else "FAIL"
        # a passing criterion reports its last (summary) check
        detail = "; ".join(c.failures) if c.failures else c.checks[-2][1]
        verdicts[num] = f"{status}  {num:>2}. {title}: {detail} [{elapsed:.1f} s]"
        print(verdicts[num])
        assert not c.failures, verdicts[num]

    return run
