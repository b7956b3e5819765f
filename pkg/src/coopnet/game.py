"""Prisoner's dilemma payoffs accumulated over all of a node's links.

The payoff scheme is T=b, R=b-c, P=0, S=-c, so a single benefit-cost
ratio r = b/c controls the dilemma.  After one round per link a
cooperator with k neighbors, kc of them cooperating, holds kc*b - k*c;
a defector holds kc*b.  Payoffs are accumulated, never degree-normalised.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .graph import Network


class Strategy(IntEnum):
    DEFECTOR = 0
    COOPERATOR = 1


@dataclass(frozen=True)
class GameParams:
    benefit: float
    cost: float = 1.0

    def __post_init__(self) -> None:
        if not self.cost > 0:
            raise ValueError("cost must be positive")
        if not self.benefit > self.cost:
            raise ValueError("benefit must exceed cost for a proper dilemma")

    @property
    def ratio(self) -> float:
        return self.benefit / self.cost

    @classmethod
    def from_ratio(cls, r: float) -> "GameParams":
        """Single-parameter form: cost pinned to 1, benefit = r."""
        return cls(benefit=float(r), cost=1.0)


def play_round(
    net: Network, strategies: np.ndarray, params: GameParams
) -> np.ndarray:
    """Accumulated payoff of every node after one game round on each link."""
    src, dst = net.edge_endpoints()
    n = net.node_count
    coop_neighbors = np.bincount(
        src, weights=strategies[dst].astype(np.float64), minlength=n
    )
    payoffs = coop_neighbors * params.benefit
    is_coop = strategies == Strategy.COOPERATOR
    payoffs[is_coop] -= net.degrees()[is_coop] * params.cost
    return payoffs


def leaf_defector_threshold(k: int) -> float:
    """Benefit-cost ratio (k+1)/(k-1) above which a cooperator that bridges
    a lone leaf defector to k fellow cooperators out-earns that defector."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return (k + 1) / (k - 1)
