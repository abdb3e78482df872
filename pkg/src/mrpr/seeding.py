"""Deterministic seed derivation.

Grid points and rng streams get their seeds from a splitmix64 fold of
integer parts, so every run is independently reproducible and documented:
``mix(a, b, c)`` feeds each part through splitmix64 and chains the state.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix(*parts: int) -> int:
    """Fold integer parts into one well-scrambled 64-bit seed."""
    state = 0x243F6A8885A308D3  # arbitrary nonzero start
    for part in parts:
        state = _splitmix64(state ^ (part & _MASK))
    return _splitmix64(state)
