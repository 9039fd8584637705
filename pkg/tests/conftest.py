import pytest

_ACCEPTANCE = {}


class Recorder:
    def __init__(self, store):
        self.store = store

    def __call__(self, number, title, ok, detail, elapsed, limit=None):
        in_time = limit is None or elapsed < limit
        ok = bool(ok and in_time)
        timing = f"{elapsed:.2f} s" + (f" (limit {limit:g} s)" if limit is not None else "")
        line = f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail}; {timing}"
        self.store[number] = line
        print(line)
        return ok


@pytest.fixture
def record():
    return Recorder(_ACCEPTANCE)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
    n_pass = sum(v.startswith("PASS") for v in _ACCEPTANCE.values())
    terminalreporter.write_line(f"{n_pass}/{len(_ACCEPTANCE)} criteria passed")
