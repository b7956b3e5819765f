import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopnet.game import GameParams, Strategy, leaf_defector_threshold, play_round
from coopnet.graph import Network, new_clique
from coopnet.streams import substream

C, D = Strategy.COOPERATOR, Strategy.DEFECTOR


def strat(*values):
    return np.array(values, dtype=np.int8)


def leaf_defector_graph(k):
    """Defector 0 - cooperator 1 - k further cooperators."""
    net = Network()
    for _ in range(k + 2):
        net.add_isolated_node()
    net.add_edge(0, 1)
    for j in range(2, k + 2):
        net.add_edge(1, j)
    strategies = strat(D, *([C] * (k + 1)))
    return net, strategies


def random_graph(n, p, seed):
    rng = substream(seed)
    net = Network()
    for _ in range(n):
        net.add_isolated_node()
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                net.add_edge(u, v)
    # keep degrees positive so every node actually plays
    for u in range(n):
        if net.degree(u) == 0:
            net.add_edge(u, (u + 1) % n)
    return net


class TestGameParams:
    def test_ratio(self):
        assert GameParams(benefit=3.0, cost=1.5).ratio == 2.0

    def test_from_ratio_pins_cost(self):
        p = GameParams.from_ratio(2.5)
        assert p.benefit == 2.5 and p.cost == 1.0

    @pytest.mark.parametrize("b,c", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0)])
    def test_rejects_improper_dilemma(self, b, c):
        with pytest.raises(ValueError):
            GameParams(benefit=b, cost=c)


class TestPlayRound:
    def test_cooperator_accumulation(self):
        # cooperator with k=4, three cooperating neighbors, b=2, c=1 -> 3*2 - 4*1
        net = Network()
        for _ in range(5):
            net.add_isolated_node()
        for v in range(1, 5):
            net.add_edge(0, v)
        strategies = strat(C, C, C, C, D)
        payoffs = play_round(net, strategies, GameParams(benefit=2.0, cost=1.0))
        assert payoffs[0] == 2.0

    def test_defector_with_no_cooperating_neighbors(self):
        net = new_clique(2)
        payoffs = play_round(net, strat(D, D), GameParams(benefit=5.0, cost=1.0))
        assert payoffs[0] == 0.0

    def test_all_defectors_everywhere_zero(self):
        net = new_clique(5)
        payoffs = play_round(net, strat(D, D, D, D, D), GameParams.from_ratio(7.0))
        assert np.all(payoffs == 0.0)

    def test_fully_cooperative_k4(self):
        net = new_clique(4)
        payoffs = play_round(net, strat(C, C, C, C), GameParams(benefit=2.0, cost=1.0))
        assert np.all(payoffs == 3.0)

    def test_lone_cooperator_pays_full_cost(self):
        net = new_clique(4)
        payoffs = play_round(net, strat(C, D, D, D), GameParams(benefit=2.0, cost=1.0))
        assert payoffs[0] == -3.0  # -k*c
        assert np.all(payoffs[1:] >= 0.0)

    def test_per_edge_accounting_matches_per_node(self):
        rng = substream(31)
        params = GameParams(benefit=1.75, cost=0.5)
        for seed in range(5):
            net = random_graph(12, 0.3, seed=40 + seed)
            strategies = (rng.random(12) < 0.5).astype(np.int8)
            payoffs = play_round(net, strategies, params)
            total = 0.0
            for u, v in net.edges():
                for a, b in ((u, v), (v, u)):
                    if strategies[a] == C:
                        total += (params.benefit if strategies[b] == C else 0.0) - params.cost
                    else:
                        total += params.benefit if strategies[b] == C else 0.0
            assert total == pytest.approx(payoffs.sum(), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    lam=st.sampled_from([2.0, 0.5, 4.0]),
)
def test_scaling_preserves_orderings(seed, lam):
    # power-of-two scale factors keep payoffs exactly proportional
    net = random_graph(10, 0.35, seed=seed)
    strategies = (substream(seed, 1).random(10) < 0.5).astype(np.int8)
    base = play_round(net, strategies, GameParams(benefit=2.0, cost=1.0))
    scaled = play_round(
        net, strategies, GameParams(benefit=2.0 * lam, cost=1.0 * lam)
    )
    assert np.array_equal(scaled, lam * base)
    assert np.array_equal(np.sign(scaled), np.sign(base))
    order = np.argsort(base, kind="stable")
    assert np.array_equal(np.argsort(scaled, kind="stable"), order)


class TestLeafDefectorThreshold:
    def test_quoted_transition_points(self):
        assert leaf_defector_threshold(2) == 3.0
        assert leaf_defector_threshold(3) == 2.0

    @pytest.mark.parametrize("bad", [1, 0, -2])
    def test_rejects_small_k(self, bad):
        with pytest.raises(ValueError):
            leaf_defector_threshold(bad)

    def test_boundary_equality_k2(self):
        net, strategies = leaf_defector_graph(2)
        payoffs = play_round(net, strategies, GameParams.from_ratio(3.0))
        assert payoffs[1] == payoffs[0]

    @pytest.mark.parametrize("k", [2, 3, 4, 7])
    def test_ordering_flips_exactly_at_threshold(self, k):
        net, strategies = leaf_defector_graph(k)
        threshold = leaf_defector_threshold(k)
        for r, expect_coop_ahead in (
            (threshold - 0.25, False),
            (threshold + 0.25, True),
        ):
            payoffs = play_round(net, strategies, GameParams.from_ratio(r))
            assert (payoffs[1] > payoffs[0]) == expect_coop_ahead
        payoffs = play_round(net, strategies, GameParams.from_ratio(threshold))
        assert payoffs[1] == pytest.approx(payoffs[0])
