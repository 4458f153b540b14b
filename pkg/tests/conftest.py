from pathlib import Path

import pytest

from sefcsim.core.config import SimConfig, default_config

pytest.register_assert_rewrite("oracles")


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run long randomized suites and full-length simulations",
    )
    parser.addoption(
        "--freeze-golden",
        action="store_true",
        default=False,
        help="rewrite tests/fixtures/e1_trace.jsonl before comparing against it",
    )


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "slow: long randomized suites or simulations of a minute or more",
    )


def pytest_collection_modifyitems(config, items):
    skip_slow = pytest.mark.skip(reason="need --run-slow to run")
    for item in items:
        if "slow" in item.keywords and not config.getoption("--run-slow"):
            item.add_marker(skip_slow)


@pytest.fixture
def fixtures_dir() -> Path:
    return Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def small_config() -> SimConfig:
    """A short, dense run that exercises every phase in well under a second."""
    return default_config(
        n_uavs=12,
        sim_duration=12.0,
        arena={"size_x": 800.0, "size_y": 800.0, "size_z": 200.0},
        clustering_interval=2.0,
        gs={"position": [400.0, 400.0, 0.0], "range": 900.0, "duty_cycle": 1.0},
        traffic={"flows": 4, "packet_interval": 0.5},
        seed=11,
    )


@pytest.fixture
def config_file(tmp_path: Path):
    """Write YAML text to a temporary config file and return its path."""

    def write(text: str, name: str = "config.yaml") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
