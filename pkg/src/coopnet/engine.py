"""Generational loop: play + synchronous update, then mutation, then growth.

Between two generations the population first mutates (independent
strategy flips with probability ``mutation_prob``) and then grows by a
fraction ``growth_fraction`` of its current size, appending defector
nodes.  Newly added nodes therefore play their first round in the next
generation.  Fractional growth is carried: the real-valued size
compounds by (1 + growth_fraction) each window and the node count is its
floor, so after g generations the population tracks N0*(1+n)**g within
one node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .game import GameParams, Strategy
from .graph import GrowthSpec, Network, add_node, new_clique
from .update import UpdateRule, synchronous_generation


@dataclass(frozen=True)
class DynamicsConfig:
    """Inter-generation dynamics: growth fraction n, mutation probability,
    optional size cap, and the master seed the run was derived from."""

    growth_fraction: float = 0.0
    mutation_prob: float = 0.0
    max_size: int | None = None
    new_node_strategy: Strategy = Strategy.DEFECTOR
    seed: int = 0

    def __post_init__(self) -> None:
        if self.growth_fraction < 0 or math.isnan(self.growth_fraction):
            raise ValueError("growth_fraction must be >= 0")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be in [0, 1]")
        if self.max_size is not None and self.max_size < 2:
            raise ValueError("max_size must be >= 2")


@dataclass
class PopulationState:
    """One run's mutable state; confined to a single thread of execution."""

    network: Network
    strategies: np.ndarray
    generation: int = 0
    growth_remainder: float = 0.0
    # Cooperation fraction measured right after the last synchronous
    # update, before that window's mutation and growth.
    coop_after_update: float | None = None

    def cooperation_fraction(self) -> float:
        """Current cooperator share of the population."""
        return float(self.strategies.mean())


def build_initial_cooperators(
    spec: GrowthSpec, initial_size: int, rng: np.random.Generator
) -> PopulationState:
    """Grow a network to ``initial_size`` nodes, everyone cooperating."""
    if initial_size < spec.links_per_node:
        raise ValueError("initial_size must be at least links_per_node")
    net = new_clique(spec.links_per_node)
    while net.node_count < initial_size:
        add_node(net, spec, rng)
    strategies = np.full(initial_size, Strategy.COOPERATOR, dtype=np.int8)
    return PopulationState(network=net, strategies=strategies)


def mutate(
    strategies: np.ndarray, mutation_prob: float, rng: np.random.Generator
) -> np.ndarray:
    """Flip each node's strategy independently with probability mutation_prob."""
    if not 0.0 <= mutation_prob <= 1.0:
        raise ValueError("mutation_prob must be in [0, 1]")
    flips = rng.random(strategies.shape[0]) < mutation_prob
    out = strategies.copy()
    out[flips] ^= 1
    return out


def step_generation(
    state: PopulationState,
    cfg: DynamicsConfig,
    params: GameParams,
    rule: UpdateRule,
    spec: GrowthSpec,
    rng: np.random.Generator,
) -> PopulationState:
    """Advance one generation in place: update, mutate, grow.

    ``state.coop_after_update`` records the cooperation fraction at the
    measurement point (after the synchronous update, before mutation and
    growth).  Returns the same state object.
    """
    strategies = synchronous_generation(
        state.network, state.strategies, params, rule, rng
    )
    state.coop_after_update = float(strategies.mean())

    if cfg.mutation_prob > 0.0:
        strategies = mutate(strategies, cfg.mutation_prob, rng)

    if cfg.growth_fraction > 0.0:
        net = state.network
        real_size = (net.node_count + state.growth_remainder) * (
            1.0 + cfg.growth_fraction
        )
        # epsilon guards the floor against representation error when the
        # compounded size lands on an integer (e.g. 1000 * 1.001)
        target = int(math.floor(real_size + 1e-9))
        if cfg.max_size is not None and target >= cfg.max_size:
            target = cfg.max_size
            real_size = float(target)
        newcomers = target - net.node_count
        if newcomers > 0:
            for _ in range(newcomers):
                add_node(net, spec, rng)
            strategies = np.concatenate(
                [
                    strategies,
                    np.full(newcomers, cfg.new_node_strategy, dtype=np.int8),
                ]
            )
        state.growth_remainder = max(0.0, real_size - target)

    state.strategies = strategies
    state.generation += 1
    return state
