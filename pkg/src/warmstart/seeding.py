"""Deterministic seed derivation.

One master seed per run; every sub-experiment derives its own stream with
`derive_seed(master, *keys)`. The expansion is a splitmix64 walk, so derived
seeds are independent of each other and stable across platforms and numpy
versions. Keys may be integers or short strings (labels such as "sweep" or a
grid index), folded into the state byte by byte.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 step: advance `state` by the golden gamma and mix."""
    state = (state + _GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master: int, *keys: int | str) -> int:
    """Derive a 64-bit child seed from `master` and a key path.

    Distinct key paths give unrelated streams; the same path always gives the
    same seed. Strings are folded as UTF-8 bytes so labels can be used
    directly: derive_seed(seed, "variance-sweep", 3).
    """
    state = splitmix64(int(master) & _MASK)
    for key in keys:
        if isinstance(key, str):
            for byte in key.encode("utf-8"):
                state = splitmix64(state ^ byte)
        else:
            state = splitmix64(state ^ (int(key) & _MASK))
    return state


def rng_for(master: int, *keys: int | str) -> np.random.Generator:
    """A numpy Generator seeded from the derived stream for this key path."""
    return np.random.default_rng(derive_seed(master, *keys))
