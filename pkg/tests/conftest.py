import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Make the sibling oracle helpers importable regardless of how pytest is
# invoked (rootdir vs tests/ cwd).
sys.path.insert(0, str(Path(__file__).resolve().parent))

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
