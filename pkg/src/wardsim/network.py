"""Bed-adjacency patient network and trust diffusion between neighbours.

Beds stand in a single row; a patient talks to the patients up to two beds
away on either side.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

NEIGHBOUR_REACH = 2


class EdgeColor(str, enum.Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


@dataclass(frozen=True)
class Thresholds:
    green_max: float = 0.1
    yellow_max: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.green_max < self.yellow_max <= 2.0:
            raise ValueError(
                f"need 0 < greenMax < yellowMax <= 2, got {self.green_max}, {self.yellow_max}"
            )


@dataclass(frozen=True)
class TrustNetwork:
    n_beds: int
    edges: frozenset[tuple[int, int]]
    neighbours: tuple[tuple[int, ...], ...]
    thresholds: Thresholds = Thresholds()
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alphaPerHour must be in (0, 1], got {self.alpha}")

    def neighbours_of(self, bed: int) -> set[int]:
        return set(self.neighbours[bed])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_network(n_beds: int, thresholds: Thresholds | None = None, alpha: float = 0.05) -> TrustNetwork:
    if n_beds < 1:
        raise ValueError("a trust network needs at least one bed")
    edges = frozenset(
        (i, j)
        for i in range(n_beds)
        for j in range(i + 1, min(i + NEIGHBOUR_REACH, n_beds - 1) + 1)
    )
    neighbours = tuple(
        tuple(j for j in range(max(0, i - NEIGHBOUR_REACH), min(n_beds, i + NEIGHBOUR_REACH + 1)) if j != i)
        for i in range(n_beds)
    )
    return TrustNetwork(n_beds, edges, neighbours, thresholds or Thresholds(), alpha)


def _occupied(value) -> bool:
    return value is not None and not (isinstance(value, float) and math.isnan(value))


def diffuse_trust(trust: Sequence[float | None], net: TrustNetwork, alpha: float | None = None) -> list[float | None]:
    """One synchronous hour of relaxation toward the local mean trust.

    The local mean is taken over the patient and its occupied neighbours, so
    two adjacent patients at 0.2 and 0.8 with ``alpha=0.5`` move to 0.35 and
    0.65.  ``trust[i]`` is the trust of the patient in bed ``i``, or None/NaN
    when the bed is empty.  Empty beds and isolated patients are returned
    as-is.
    """
    if len(trust) != net.n_beds:
        raise ValueError(f"expected {net.n_beds} bed values, got {len(trust)}")
    rate = net.alpha if alpha is None else alpha
    out = list(trust)
    for i, own in enumerate(trust):
        if not _occupied(own):
            continue
        total = own
        count = 1
        lo = hi = own
        for j in net.neighbours[i]:
            other = trust[j]
            if _occupied(other):
                total += other
                count += 1
                lo = min(lo, other)
                hi = max(hi, other)
        if count == 1:
            continue
        mean = total / count
        value = own + rate * (mean - own)
        # a convex combination cannot leave the local range; guard against rounding
        value = min(max(value, lo), hi)
        out[i] = min(max(value, 0.0), 1.0)
    return out


def classify_edge(ti: float, tj: float, thresholds: Thresholds = Thresholds()) -> EdgeColor:
    gap = abs(ti - tj)
    if gap < thresholds.green_max:
        return EdgeColor.GREEN
    if gap < thresholds.yellow_max:
        return EdgeColor.YELLOW
    return EdgeColor.RED


def occupied_edges(trust: Sequence[float | None], net: TrustNetwork):
    """Yield (i, j, |gap|, color) for every edge whose two beds are occupied."""
    for i, j in net.sorted_edges():
        if _occupied(trust[i]) and _occupied(trust[j]):
            color = classify_edge(trust[i], trust[j], net.thresholds)
            yield i, j, abs(trust[i] - trust[j]), color


def network_summary(trust: Sequence[float | None], net: TrustNetwork) -> dict[str, int]:
    counts = {c.value: 0 for c in EdgeColor}
    for _, _, _, color in occupied_edges(trust, net):
        counts[color.value] += 1
    return counts
