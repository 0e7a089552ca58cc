from __future__ import annotations

import time
from pathlib import Path
from types import SimpleNamespace

import pytest

from spbench.harness import load_config, read_records, run_experiment

CONFIG_PATH = Path(__file__).resolve().parent.parent / "configs" / "mini.toml"


@pytest.fixture(scope="session")
def mini_battery(tmp_path_factory):
    """Run the bundled mini benchmark twice (1 thread, then 2) and share results."""
    config = load_config(CONFIG_PATH)
    dir_single = tmp_path_factory.mktemp("battery_single")
    dir_threaded = tmp_path_factory.mktemp("battery_threaded")

    start = time.perf_counter()
    counts = run_experiment(config, dir_single, threads=1)
    elapsed_single = time.perf_counter() - start

    start = time.perf_counter()
    run_experiment(config, dir_threaded, threads=2)
    elapsed_threaded = time.perf_counter() - start

    records = read_records(dir_single / "records.csv")
    return SimpleNamespace(
        config=config,
        dir_single=dir_single,
        dir_threaded=dir_threaded,
        counts=counts,
        records=records,
        elapsed_single=elapsed_single,
        elapsed_threaded=elapsed_threaded,
    )
