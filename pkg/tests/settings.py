"""Shared Hypothesis profiles.

Usage:
    from tests.settings import STANDARD_SETTINGS

    @given(seed=seeds)
    @STANDARD_SETTINGS
    def test_something(seed):
        ...

Tiers:
- STANDARD_SETTINGS: 100 examples - cheap protocol runs
- SLOW_SETTINGS: 25 examples - dense-matrix or multi-stage runs
- QUICK_SETTINGS: 20 examples - input rejection
"""

from hypothesis import HealthCheck, settings

# deadline off: the first call of a cached helper can take much longer than the rest
STANDARD_SETTINGS = settings(max_examples=100, deadline=None)

SLOW_SETTINGS = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

QUICK_SETTINGS = settings(max_examples=20, deadline=None)
