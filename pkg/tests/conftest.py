import pytest

from badapprox.config import RunConfig
from badapprox.pipeline import run_build


@pytest.fixture(scope="session")
def default_cfg():
    # the CLI default: tau=(1,1), window [0,1]^2, global levels 3, tree depth 2
    return RunConfig()


@pytest.fixture(scope="session")
def default_run(default_cfg):
    return run_build(default_cfg)


@pytest.fixture(scope="session")
def criterion(request):
    """Record one acceptance verdict; printed in the terminal summary."""
    store = request.config.stash.setdefault(_VERDICTS, {})

    def record(n: int, ok: bool, detail: str = ""):
        store[n] = (ok, detail)
        return ok
    return record


_VERDICTS = pytest.StashKey()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_VERDICTS, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        ok, detail = store[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
