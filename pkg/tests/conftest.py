"""Shared fixtures: small prebuilt tables and an in-process service client."""

from __future__ import annotations

import re
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from chainforge.chains import FUSION
from chainforge.quality import RunSpec, build_quality_table
from chainforge.service.app import create_app

_GATE_TEST = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_runtest_logreport(report):
    """Emit one uncaptured verdict line per acceptance check."""
    match = _GATE_TEST.search(report.nodeid)
    if match and report.when == "call":
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE C{match.group(1)} {verdict}")


@pytest.fixture(scope="session")
def fusion_best_half():
    """Best-mode fusion table at p = 1/2, four starting pairs."""
    return build_quality_table(4, RunSpec(gate=FUSION, p=Fraction(1, 2), mode="best"))


@pytest.fixture(scope="session")
def fusion_worst_half():
    """Worst-mode companion to fusion_best_half."""
    return build_quality_table(4, RunSpec(gate=FUSION, p=Fraction(1, 2), mode="worst"))


@pytest.fixture()
def client():
    """Fresh service instance per test so table caches never leak across tests."""
    with TestClient(create_app()) as c:
        yield c
