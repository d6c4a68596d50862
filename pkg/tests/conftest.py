import pytest

ACCEPTANCE = pytest.StashKey[dict]()

TITLES = {
    1: "polytope suite",
    2: "fibration suite",
    3: "lattice suite",
    4: "period suite",
    5: "Pfaffian suite",
    6: "monodromy suite",
    7: "determinism",
}


class Criterion:
    """Collects named sub-checks of one acceptance criterion."""

    def __init__(self):
        self.rows = []

    def check(self, name, ok, detail=""):
        self.rows.append((name, bool(ok), detail))
        return ok

    def note(self, name, detail):
        self.rows.append((name, None, detail))

    @property
    def passed(self):
        return all(ok is not False for _, ok, _ in self.rows)

    def failures(self):
        return [f"{n}: {d}" if d else n for n, ok, d in self.rows if ok is False]


@pytest.fixture
def criterion(request):
    store = request.config.stash.setdefault(ACCEPTANCE, {})
    number = int(request.node.name.split("_")[1][1:])
    c = Criterion()
    store[number] = c
    yield c


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE, {})
    if not store:
        return
    tr = terminalreporter
    tr.section("acceptance criteria (tolerance: exact equality)")
    for k in sorted(TITLES):
        c = store.get(k)
        if c is None:
            tr.write_line(f"criterion {k} ({TITLES[k]}): NOT RUN")
            continue
        checked = [r for r in c.rows if r[1] is not None]
        ok = sum(1 for r in checked if r[1])
        status = "PASS" if c.passed else "FAIL"
        line = f"criterion {k} ({TITLES[k]}): {status}  {ok}/{len(checked)} sub-checks exact"
        if not c.passed:
            line += "; failing: " + "; ".join(c.failures())
        notes = [f"{n}: {d}" for n, o, d in c.rows if o is None]
        if notes:
            line += "; reported: " + "; ".join(notes)
        tr.write_line(line)
