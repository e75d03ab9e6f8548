import numpy as np

from .config import settings
from .exceptions import UsageError

RngLike = np.random.Generator | int | None


def resolve_rng(rng: RngLike) -> tuple[np.random.Generator, int | None]:
    """Return a generator and the seed it came from (``None`` if one was passed in).

    ``None`` falls back to the ``QXOT_SEED`` setting; a run without any seed
    is refused so every transcript stays reproducible.
    """
    if isinstance(rng, np.random.Generator):
        return rng, None
    seed = settings.SEED if rng is None else int(rng)
    if seed is None:
        raise UsageError("a seed is required (pass one or set QXOT_SEED)")
    return np.random.default_rng(seed), seed


def random_bit(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2))
