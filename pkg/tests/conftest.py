import sys
import zlib
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ssmgan.bitstream import make_codebooks  # noqa: E402
from ssmgan.model import GeneratorConfig, build_generator, random_weights  # noqa: E402


@pytest.fixture(scope="session")
def config():
    return GeneratorConfig()


@pytest.fixture(scope="session")
def generator(config):
    return build_generator(config, random_weights(config, 7))


@pytest.fixture(scope="session")
def books():
    return make_codebooks(0)


@pytest.fixture
def rng(request):
    # stable per-test seed so failures reproduce
    return np.random.default_rng(zlib.crc32(request.node.name.encode()))


ACCEPTANCE = {
    1: "complexity reproduction",
    2: "parameter budget",
    3: "streaming equivalence",
    4: "chunk invariance",
    5: "PQMF quality",
    6: "bitstream",
    7: "causality",
    8: "output contract",
    9: "determinism and reset",
    10: "throughput report",
}


class AcceptanceLog:
    def __init__(self):
        self.results = {}

    def report(self, number, passed, detail):
        self.results[number] = (bool(passed), detail)
        line = self.line(number)
        print(line)
        return passed

    def line(self, number):
        passed, detail = self.results.get(number, (False, "did not complete"))
        return f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {ACCEPTANCE[number]}: {detail}"


def pytest_configure(config):
    config._acceptance_log = AcceptanceLog()


@pytest.fixture
def acceptance(request):
    return request.config._acceptance_log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config._acceptance_log
    ran = {item.nodeid for item in terminalreporter.stats.get("passed", [])} | {
        r.nodeid for r in terminalreporter.stats.get("failed", [])
    }
    if not any("test_acceptance" in n for n in ran):
        return
    terminalreporter.section("acceptance criteria")
    for n in ACCEPTANCE:
        terminalreporter.write_line(log.line(n))
