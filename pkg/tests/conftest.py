import pytest

from trs_fva.config import default_scenario
from trs_fva.curves import CurveSet, YieldCurve
from trs_fva.market import DividendSchedule, MarketSnapshot, TaxRegime

# criterion id -> list of (test id, passed)
_CRITERIA: dict[str, list[tuple[str, bool]]] = {}
_DESCRIPTIONS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, text): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        cid, text = marker.args
        _DESCRIPTIONS[cid] = text
        _CRITERIA.setdefault(cid, []).append((item.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA):
        results = _CRITERIA[cid]
        ok = all(p for _, p in results)
        failed = [n.split("::")[-1] for n, p in results if not p]
        line = f"{'PASS' if ok else 'FAIL'}  [{cid}] {_DESCRIPTIONS[cid]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture
def flat_market():
    return MarketSnapshot(spot=73.0, vol=0.2)


@pytest.fixture
def zero_curves():
    return CurveSet.flat()


def flat_curves(r=0.0, c=0.0, e=0.0, fee=0.0, libor=0.0):
    return CurveSet(YieldCurve.flat(r), YieldCurve.flat(c), YieldCurve.flat(e),
                    YieldCurve.flat(fee), YieldCurve.flat(libor))


def reference_market(**tax_changes):
    taxes = dict(rho_I=0.15, rho_B=0.05, rho_T=0.0, tau=0.001)
    taxes.update(tax_changes)
    return MarketSnapshot(73.0, 0.22, DividendSchedule.from_pairs([(0.05, 3.2)]), TaxRegime(**taxes))
