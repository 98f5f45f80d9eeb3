"""Per-slot link selection policies.

All policies see the backlog vector Q and the sampled rate vector S for the
slot, and return the served link index (or None to idle).  Ties between
maximal weights are broken uniformly at random using the scheduler's
dedicated stream at the slot counter, so the tie-break draw is addressed by
slot and never depends on how many earlier ties occurred.
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence

from .rng import RngStream


class SchedulerKind(str, Enum):
    LCQ = "lcq"
    MAX_WEIGHT = "maxweight"
    MODIFIED_MAX_WEIGHT = "modified_maxweight"
    RANDOM_CONNECTED = "random_connected"
    ROUND_ROBIN = "round_robin"


# Codes shared with the compiled kernel; LCQ and multi-rate max-weight use
# the same Q*S argmax, LCQ just demands ON/OFF rates.
SCHEDULER_CODES = {
    SchedulerKind.LCQ: 0,
    SchedulerKind.MAX_WEIGHT: 1,
    SchedulerKind.MODIFIED_MAX_WEIGHT: 2,
    SchedulerKind.RANDOM_CONNECTED: 3,
    SchedulerKind.ROUND_ROBIN: 4,
}


def _argmax_uniform_tie(weights: Sequence[int], stream: RngStream, t: int) -> int | None:
    """Index of the largest positive weight; uniform tie-break; None if all <= 0."""
    best = 0
    count = 0
    first = -1
    for i, w in enumerate(weights):
        if w > best:
            best = w
            count = 1
            first = i
        elif count and w == best:
            count += 1
    if count == 0:
        return None
    if count == 1:
        return first
    r = int(stream.uniform(t) * count)
    for i, w in enumerate(weights):
        if w == best:
            if r == 0:
                return i
            r -= 1
    return first  # unreachable


def lcq_select(backlog: Sequence[int], s: Sequence[int], stream: RngStream, t: int) -> int | None:
    """Longest connected queue: argmax Q_i * S_i over ON/OFF rates."""
    for x in s:
        if x not in (0, 1):
            raise ValueError("longest-connected-queue selection needs ON/OFF rates")
    return _argmax_uniform_tie([q * x for q, x in zip(backlog, s)], stream, t)


def maxweight_multirate_select(
    backlog: Sequence[int], s: Sequence[int], stream: RngStream, t: int
) -> int | None:
    """Multi-rate max-weight: argmax Q_i * S_i."""
    return _argmax_uniform_tie([q * x for q, x in zip(backlog, s)], stream, t)


def modified_maxweight_select(
    backlog: Sequence[int], s: Sequence[int], stream: RngStream, t: int
) -> int | None:
    """Modified max-weight: argmax Q_i * min(Q_i, S_i), i.e. weight by what
    the slot can actually drain.  Coincides with max-weight on ON/OFF links."""
    return _argmax_uniform_tie([q * min(q, x) for q, x in zip(backlog, s)], stream, t)


def random_connected_select(
    backlog: Sequence[int], s: Sequence[int], stream: RngStream, t: int
) -> int | None:
    """Queue-blind baseline: uniform choice among links with Q_i > 0 and S_i > 0."""
    eligible = [i for i, (q, x) in enumerate(zip(backlog, s)) if q > 0 and x > 0]
    if not eligible:
        return None
    if len(eligible) == 1:
        return eligible[0]
    return eligible[int(stream.uniform(t) * len(eligible))]


def round_robin_select(
    backlog: Sequence[int], s: Sequence[int], pointer: int
) -> tuple[int | None, int]:
    """Cyclic baseline: first backlogged connected link after the pointer.

    Skips ineligible links (work-conserving); returns (choice, new pointer),
    with the pointer unchanged on an idle slot.
    """
    n = len(backlog)
    if not 0 <= pointer < n:
        raise ValueError(f"pointer {pointer} outside 0..{n - 1}")
    for k in range(1, n + 1):
        i = (pointer + k) % n
        if backlog[i] > 0 and s[i] > 0:
            return i, i
    return None, pointer
