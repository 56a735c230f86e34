"""Counter-based per-path random streams.

Every Monte Carlo path owns a Philox stream keyed by (master seed,
purpose, path index), so results are bit-identical regardless of how
paths are batched or distributed across workers.
"""

from __future__ import annotations

import numpy as np

# stream purposes; keep values stable, they are part of reproducibility
EVENTS = 0
CLAIMS = 1
GAUSSIAN = 2
PITERBARG = 3

_MASK64 = (1 << 64) - 1
_PATH_BITS = 48


def path_stream(seed: int, path_index: int, purpose: int = EVENTS) -> np.random.Generator:
    """Return the Generator for one (seed, purpose, path) triple."""
    if path_index < 0 or path_index >= (1 << _PATH_BITS):
        raise ValueError(f"path_index out of range: {path_index}")
    key = np.array([seed & _MASK64, ((purpose << _PATH_BITS) | path_index) & _MASK64],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
