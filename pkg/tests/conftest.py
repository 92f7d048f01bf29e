import json
import os
from pathlib import Path

import pytest

from satdp.params import SatelliteParams
from satdp.solve import (DEFAULT_CONFIG, FAULT_CONFIG, load_policy_set,
                         save_policy_set, solve_policy_set)

SMALL_CONFIG = {
    **DEFAULT_CONFIG,
    "n_states": 101,
    "n_actions": 21,
    "dtype": "float64",
    "translation": {**DEFAULT_CONFIG["translation"], "T_final_s": 300.0},
    "rotation": {**DEFAULT_CONFIG["rotation"], "T_final_s": 120.0},
}

SMALL_FAULT_CONFIG = {
    **FAULT_CONFIG,
    "n_states": 101,
    "n_actions": 21,
    "dtype": "float64",
    "translation": {**FAULT_CONFIG["translation"], "T_final_s": 300.0},
    "rotation": {**FAULT_CONFIG["rotation"], "T_final_s": 120.0},
}


def solve_cached(cfg: dict, failed_thruster=None, tag: str = "default"):
    """Solve a policy set, optionally caching across sessions.

    Set SATDP_TEST_CACHE to a directory to reuse solved policies between
    test runs (the cache key covers the full configuration).
    """
    cache_root = os.environ.get("SATDP_TEST_CACHE")
    if not cache_root:
        return solve_policy_set(cfg, failed_thruster=failed_thruster)
    import hashlib
    key = hashlib.sha256(json.dumps(
        {"cfg": cfg, "failed": failed_thruster},
        sort_keys=True).encode()).hexdigest()[:16]
    cache_dir = Path(cache_root) / f"{tag}-{key}"
    try:
        return load_policy_set(cache_dir)
    except FileNotFoundError:
        bundle = solve_policy_set(cfg, failed_thruster=failed_thruster)
        save_policy_set(cache_dir, bundle)
        return bundle


@pytest.fixture(scope="session")
def small_policies():
    return solve_cached(SMALL_CONFIG, tag="small")


@pytest.fixture(scope="session")
def params():
    return SatelliteParams()
