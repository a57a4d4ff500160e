import pytest

from adapters.checks import VerificationSuiteRepository
from core.entities.errors import ConfigError

SUITES = ["kernels", "four-point", "gradcheck", "a1-modal", "stationary-vs-direct", "zitterbewegung"]


@pytest.fixture
def suites():
    return VerificationSuiteRepository(seed=0)


def test_every_suite_is_registered(suites):
    assert [s.name for s in suites.get_available_suites()] == SUITES
    assert all(suites.is_suite_available(name) for name in SUITES)


def test_suite_info(suites):
    assert suites.get_suite_info("kernels").description == "two-point kernel normalization"
    assert suites.get_suite_info("missing") is None


def test_unknown_suite_raises(suites):
    with pytest.raises(ConfigError, match="Available suites"):
        suites.run_suite("missing")


@pytest.mark.parametrize("name", ["kernels", "four-point", "gradcheck", "stationary-vs-direct"])
def test_fast_suites_pass(suites, name):
    results = suites.run_suite(name)
    assert results
    assert all(r.passed for r in results), [r for r in results if not r.passed]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["a1-modal", "zitterbewegung"])
def test_slow_suites_pass(suites, name):
    results = suites.run_suite(name)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_suites_are_deterministic_for_a_seed():
    first = VerificationSuiteRepository(seed=4).run_suite("four-point")
    second = VerificationSuiteRepository(seed=4).run_suite("four-point")
    assert [r.value for r in first] == [r.value for r in second]


def test_thread_count_does_not_change_results():
    serial = VerificationSuiteRepository(seed=3, threads=1).run_suite("stationary-vs-direct")
    pooled = VerificationSuiteRepository(seed=3, threads=4).run_suite("stationary-vs-direct")
    assert [r.value for r in serial] == [r.value for r in pooled]
    assert [r.name for r in serial] == [r.name for r in pooled]
