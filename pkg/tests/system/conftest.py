import os

import pytest

from epistemic_sim.config import preset
from epistemic_sim.engine import run


def pytest_addoption(parser):
    parser.addoption(
        "--sim-workers",
        action="store",
        type=int,
        default=min(4, os.cpu_count() or 1),
        help="processes used to run the replications of each experiment",
    )


@pytest.fixture(scope="session")
def workers(request) -> int:
    return request.config.getoption("--sim-workers")


@pytest.fixture(scope="session")
def experiment(workers):
    """Run a preset, optionally with overrides, once per test session."""
    cache = {}

    def get(name, **changes):
        key = (name, repr(sorted(changes.items())))
        if key not in cache:
            cfg = preset(name)
            if changes:
                cfg = cfg.replace(**changes)
            cache[key] = run(cfg, workers=workers)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def exp1(experiment):
    return {
        "static": experiment("exp1-static"),
        "high": experiment("exp1-high"),
        "low": experiment("exp1-low"),
    }


@pytest.fixture(scope="session")
def exp2(experiment):
    return {
        "random": experiment("exp2-random"),
        "uncertainty": experiment("exp2-uncertainty"),
    }


@pytest.fixture(scope="session")
def exp3(experiment):
    return {
        "random": experiment("exp3-random"),
        "uncertainty": experiment("exp3-uncertainty"),
    }
