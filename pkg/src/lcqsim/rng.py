"""Counter-based random streams keyed by (master seed, purpose, link).

Every draw is addressed as (stream key, counter) instead of being pulled from
a shared sequential generator, so a link's sample path never depends on how
many other links exist or in what order they are visited.  A stream key is
hashed once from the master seed and the stream label; draw ``c`` of a stream
is ``mix64(key + (c + 1) * GAMMA)``, the SplitMix64 construction (Stafford
mix13 finalizer over a Weyl sequence).  The compiled simulation kernel
re-implements the same uint64 arithmetic, so both backends see identical
numbers bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_PURPOSE_SALT = 0xD1342543DE82EF95
_LINK_SALT = 0xDA942042E4DD58B5
_INV_2_53 = 2.0**-53

# Stream purposes.  One channel stream and one arrival stream per link, plus
# a single scheduler stream for tie-breaking draws.
CHANNEL = 0
ARRIVAL = 1
SCHEDULER = 2


def mix64(z: int) -> int:
    """64-bit finalizer with full avalanche (Stafford variant 13)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, purpose: int, link: int) -> int:
    """Derive the 64-bit key of the (purpose, link) stream under a seed."""
    h = mix64((seed + GAMMA) & MASK64)
    h = mix64(h ^ (((purpose + 1) * _PURPOSE_SALT) & MASK64))
    return mix64(h ^ (((link + 1) * _LINK_SALT) & MASK64))


def draw_u64(key: int, counter: int) -> int:
    return mix64((key + (counter + 1) * GAMMA) & MASK64)


def draw_uniform(key: int, counter: int) -> float:
    """Uniform double in [0, 1) from the top 53 bits of draw ``counter``."""
    return (draw_u64(key, counter) >> 11) * _INV_2_53


class RngStream:
    """One reproducible stream; draws are addressed by counter, not consumed.

    Two streams with distinct (purpose, link) labels are independent, and a
    given (seed, label, counter) triple always yields the same value.
    """

    __slots__ = ("seed", "purpose", "link", "key")

    def __init__(self, seed: int, purpose: int, link: int = 0):
        self.seed = seed
        self.purpose = purpose
        self.link = link
        self.key = stream_key(seed, purpose, link)

    def u64(self, counter: int) -> int:
        return draw_u64(self.key, counter)

    def uniform(self, counter: int) -> float:
        return draw_uniform(self.key, counter)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, purpose={self.purpose}, link={self.link})"


def streams(seed: int, purpose: int, n: int) -> list[RngStream]:
    """Per-link streams 0..n-1 for one purpose."""
    return [RngStream(seed, purpose, i) for i in range(n)]


def key_block(seed: int, purpose: int, n: int) -> np.ndarray:
    """Stream keys for links 0..n-1 as a uint64 array (kernel input)."""
    return np.array([stream_key(seed, purpose, i) for i in range(n)], dtype=np.uint64)


def uniform_block(seed: int, purpose: int, link: int, start: int, count: int) -> np.ndarray:
    """Vectorized uniforms for counters start..start+count-1 of one stream.

    Matches draw_uniform value for value; used by bulk statistical checks and
    the benchmark, never by the simulation loop itself.
    """
    key = np.uint64(stream_key(seed, purpose, link))
    c = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + c * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
