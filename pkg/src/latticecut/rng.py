"""Counter-based pseudo-randomness: 64-bit mixing and seed derivation.

Every random quantity in the package is a pure function of (seed, counter)
through the splitmix64 finalizer, so enlarging a region, reordering edge
evaluations, or changing the worker count never changes a sampled value.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer; bijective on 64-bit words."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _absorb(state: int, value: int) -> int:
    """Fold an arbitrary-size nonnegative int into the 64-bit state."""
    if value < 0:
        raise ValueError("counter values must be nonnegative")
    while True:
        state = mix64((state + _GOLDEN) ^ (value & _MASK))
        value >>= 64
        if value == 0:
            return state


def uniform_bits53(seed: int, counter: int) -> int:
    """53 uniform bits determined by (seed, counter)."""
    return _absorb(mix64(seed & _MASK), counter) >> 11


def derive_seed(master: int, replicate: int, scale: int) -> int:
    """Stateless 64-bit seed for (master, replicate, scale).

    Used to hand each Monte Carlo replicate its own capacity field; the
    canonical test vector derive_seed(0, 0, 0) is frozen in the test suite.
    """
    state = mix64(master & _MASK)
    state = _absorb(state, replicate & _MASK)
    state = _absorb(state, scale & _MASK)
    return state
