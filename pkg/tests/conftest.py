import pytest

from proxident.experiments import make_scenario
from proxident.identification import compute_reference


@pytest.fixture(scope="session")
def lasso42():
    return make_scenario("lasso", 42)


@pytest.fixture(scope="session")
def lasso42_ref(lasso42):
    ref = compute_reference(lasso42.problem, lasso42.x0, budget=lasso42.reference_budget)
    assert ref.converged
    return ref


# -- acceptance summary ---------------------------------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    label, title = mark.args
    if rep.when == "setup" and rep.failed or rep.when == "call":
        entry = _CRITERIA.setdefault(label, {"title": title, "passed": 0, "failed": 0})
        entry["passed" if rep.passed else "failed"] += 1


def pytest_terminal_summary(terminalreporter):
    # one line per criterion; parametrized cases are folded together
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (int(s.rstrip("abc")), s)):
        e = _CRITERIA[label]
        verdict = "FAIL" if e["failed"] else "PASS"
        cases = e["passed"] + e["failed"]
        detail = f" ({e['passed']}/{cases} cases)" if cases > 1 else ""
        terminalreporter.write_line(f"criterion {label:<3} {verdict}{detail}  {e['title']}")
