"""Strategy update driven by whole-neighborhood payoff information.

Every focal player splits its neighborhood (itself plus its neighbors)
into the opposing set (neighbors holding the other strategy) and its own
set (itself plus the neighbors sharing its strategy).  The player is
*motivated* only when the opposing set is nonempty and compares
favourably on average payoff: a strict comparison when the selection
intensity alpha is infinite, otherwise a Fermi probability in the
average-payoff difference.

A motivated player switches with a weight given by the rule variant:

* democratic weighted -- Fermi probability in the difference of
  accumulated payoffs of the two sets, steepness beta.  Every member of
  the neighborhood pulls on the focal player with a force proportional
  to its payoff, so both average success and abundance matter.
* learning activity -- (|opposing| / k)**a, an abundance-only weight.

All strategies update synchronously from the same pre-update snapshot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .game import GameParams, play_round
from .graph import Network

# Fermi exponents are clamped so huge payoff differences cannot overflow.
_EXP_CLAMP = 500.0


def _fermi(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_EXP_CLAMP, _EXP_CLAMP)))


def _check_alpha(alpha: float) -> None:
    if math.isnan(alpha) or alpha <= 0:
        raise ValueError("alpha must be positive (math.inf for the hard gate)")


@dataclass(frozen=True)
class DemocraticWeighted:
    """Fermi switch on accumulated-payoff difference with steepness ``beta``;
    ``alpha`` is the motivation (selection) intensity, infinite by default."""

    beta: float = 1.0
    alpha: float = math.inf

    def __post_init__(self) -> None:
        if math.isnan(self.beta) or math.isinf(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class LearningActivity:
    """Abundance-driven switch (|opposing|/k)**exponent behind the same
    motivation gate as the democratic weighted rule."""

    exponent: float = 2.0
    alpha: float = math.inf

    def __post_init__(self) -> None:
        if math.isnan(self.exponent) or math.isinf(self.exponent) or self.exponent <= 0:
            raise ValueError("exponent must be finite and positive")
        _check_alpha(self.alpha)


UpdateRule = Union[DemocraticWeighted, LearningActivity]


@dataclass(frozen=True)
class NeighborhoodSplit:
    """Partition of a focal node's neighborhood by strategy.

    ``own_side`` always contains the focal node itself; ``avg_other`` is
    None when the opposing side is empty (sums over the empty side are 0).
    """

    focal: int
    other_side: tuple[int, ...]
    own_side: tuple[int, ...]
    sum_other: float
    sum_own: float
    avg_other: float | None
    avg_own: float

    @property
    def focal_degree(self) -> int:
        return len(self.other_side) + len(self.own_side) - 1


def split_neighborhood(
    net: Network, payoffs: np.ndarray, strategies: np.ndarray, focal: int
) -> NeighborhoodSplit:
    """Split the neighborhood of ``focal`` using last-round payoffs."""
    if net.degree(focal) < 1:
        raise ValueError(f"node {focal} has no neighbors")
    mine = strategies[focal]
    own = [focal]
    other = []
    for nb in net.neighbors(focal):
        (own if strategies[nb] == mine else other).append(nb)
    sum_other = float(payoffs[other].sum()) if other else 0.0
    sum_own = float(payoffs[own].sum())
    return NeighborhoodSplit(
        focal=focal,
        other_side=tuple(other),
        own_side=tuple(own),
        sum_other=sum_other,
        sum_own=sum_own,
        avg_other=sum_other / len(other) if other else None,
        avg_own=sum_own / len(own),
    )


def transition_probability(split: NeighborhoodSplit, rule: UpdateRule) -> float:
    """Probability that the focal player abandons its strategy this generation."""
    n_other = len(split.other_side)
    if n_other == 0:
        return 0.0
    diff_avg = split.avg_other - split.avg_own
    if math.isinf(rule.alpha):
        if not diff_avg > 0.0:
            return 0.0
        gate = 1.0
    else:
        gate = float(_fermi(rule.alpha * diff_avg))
    if isinstance(rule, DemocraticWeighted):
        weight = float(_fermi(rule.beta * (split.sum_other - split.sum_own)))
    else:
        weight = (n_other / split.focal_degree) ** rule.exponent
    return gate * weight


def node_transition_probabilities(
    net: Network, strategies: np.ndarray, payoffs: np.ndarray, rule: UpdateRule
) -> np.ndarray:
    """Vectorised transition probability for every node at once.

    Equivalent to calling :func:`transition_probability` on each node's
    :func:`split_neighborhood`, up to float summation order.
    """
    n = net.node_count
    src, dst = net.edge_endpoints()
    deg = net.degrees()
    same = strategies[src] == strategies[dst]
    nb_pay = payoffs[dst]
    sum_nb = np.bincount(src, weights=nb_pay, minlength=n)
    sum_same_nb = np.bincount(src, weights=np.where(same, nb_pay, 0.0), minlength=n)
    cnt_same_nb = np.bincount(src[same], minlength=n)

    sum_other = sum_nb - sum_same_nb
    cnt_other = deg - cnt_same_nb
    sum_own = sum_same_nb + payoffs
    cnt_own = cnt_same_nb + 1

    has_other = cnt_other > 0
    diff_avg = sum_other / np.where(has_other, cnt_other, 1) - sum_own / cnt_own
    if math.isinf(rule.alpha):
        gate = (diff_avg > 0.0).astype(np.float64)
    else:
        gate = _fermi(rule.alpha * diff_avg)
    if isinstance(rule, DemocraticWeighted):
        weight = _fermi(rule.beta * (sum_other - sum_own))
    else:
        weight = (cnt_other / deg) ** rule.exponent
    return np.where(has_other, gate * weight, 0.0)


def synchronous_generation(
    net: Network,
    strategies: np.ndarray,
    params: GameParams,
    rule: UpdateRule,
    rng: np.random.Generator,
) -> np.ndarray:
    """One full synchronous update: play a round, then flip every node
    independently with its transition probability.

    All probabilities come from the same pre-update snapshot; the input
    vector is not modified.  One uniform variate is consumed per node,
    in node-id order.
    """
    payoffs = play_round(net, strategies, params)
    p = node_transition_probabilities(net, strategies, payoffs, rule)
    flips = rng.random(net.node_count) < p
    updated = strategies.copy()
    updated[flips] ^= 1
    return updated
