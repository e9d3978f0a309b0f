import numpy as np
import pytest

from srampuf import sram_model as sm

CRITERIA = {
    1: "Golay exhaustive correctness",
    2: "length law",
    3: "seed and key budgets",
    4: "remaining entropy",
    5: "failure-rate model vs Monte Carlo",
    6: "simulator calibration",
    7: "estimator suite",
    8: "fuzzy-extractor round trip",
    9: "determinism",
}
_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for n in getattr(report, "criteria", ()):
        _outcomes.setdefault(n, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in _outcomes:
            continue
        ok = all(_outcomes[n])
        terminalreporter.write_line(f"criterion {n} ({CRITERIA[n]}): {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def calib_pop():
    """700 devices x 2 KiB, aged profile; shared by the calibration checks."""
    return sm.calibrated_population(2024, aged=True)


@pytest.fixture(scope="session")
def calib_firsts(calib_pop):
    return np.stack([sm.sample_region(calib_pop, d, [0], 0, calib_pop.n_bits)[0]
                     for d in range(calib_pop.n_devices)])


@pytest.fixture(scope="session")
def calib_device0_readouts(calib_pop):
    return sm.sample_region(calib_pop, 0, range(700), 0, calib_pop.n_bits)


@pytest.fixture
def small_pop():
    return sm.new_population(sm.PopulationConfig(n_devices=6, n_bits=512), 11)
