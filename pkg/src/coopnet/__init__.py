"""Evolutionary prisoner's dilemma on growing networks.

Populations live on undirected graphs grown by preferential or random
attachment.  Each generation every individual plays one round per link,
then all strategies update synchronously under a payoff-weighted
social-influence rule; between generations individuals may mutate and
new defector nodes join.  The :mod:`coopnet.experiments` module packages
the standard measurement protocols, and the ``coopnet`` script exposes
them on the command line.
"""
__version__ = "0.1.0"

from .engine import (
    DynamicsConfig,
    PopulationState,
    build_initial_cooperators,
    mutate,
    step_generation,
)
from .game import GameParams, Strategy, leaf_defector_threshold, play_round
from .graph import (
    EdgePlacementError,
    GrowthModel,
    GrowthSpec,
    Network,
    add_node,
    new_clique,
    sample_preferential,
    write_edge_list,
)
from .streams import substream
from .update import (
    DemocraticWeighted,
    LearningActivity,
    NeighborhoodSplit,
    UpdateRule,
    node_transition_probabilities,
    split_neighborhood,
    synchronous_generation,
    transition_probability,
)

__all__ = [
    "DemocraticWeighted",
    "DynamicsConfig",
    "EdgePlacementError",
    "GameParams",
    "GrowthModel",
    "GrowthSpec",
    "LearningActivity",
    "NeighborhoodSplit",
    "Network",
    "PopulationState",
    "Strategy",
    "UpdateRule",
    "add_node",
    "build_initial_cooperators",
    "leaf_defector_threshold",
    "mutate",
    "new_clique",
    "node_transition_probabilities",
    "play_round",
    "sample_preferential",
    "split_neighborhood",
    "step_generation",
    "substream",
    "synchronous_generation",
    "transition_probability",
    "write_edge_list",
]
