import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from exactinfer.errors import IndifferentQuery, MalformedDataset
from exactinfer.prefs import PreferenceSpec, PrefOrdering, demand_many, prefers
from exactinfer.revealed import (
    ChoiceData,
    ChoiceInference,
    RevealedGraph,
    binary_choice_infer,
    check_sarp,
    check_sarp_arrays,
    choice_detection_index,
    detection_index,
    first_detection,
    revealed_chain,
    revealed_demand_bounds,
    strictly_revealed_preferred,
    verify_chain,
    verify_sarp_witness,
)
from exactinfer.sequences import DemandObservation, SequenceConfig, gen_demand_dataset, gen_prices
from oracles import brute_force_sarp, floyd_warshall, strict_edges_plain

CD_37 = PreferenceSpec.cobb_douglas([0.3, 0.7])
SPECS = [
    PreferenceSpec.cobb_douglas([0.3, 0.7]),
    PreferenceSpec.cobb_douglas([0.5, 0.5]),
    PreferenceSpec.cobb_douglas([0.8, 0.2]),
    PreferenceSpec.ces([0.5, 0.5], 0.5),
    PreferenceSpec.ces([0.3, 0.7], -1.0),
    PreferenceSpec.ces([0.6, 0.4], -4.0),
]
WIDE = SequenceConfig.square(2, 0.2, 5.0)


def two_cycle():
    p1, x1 = np.array([2.0, 1.0]), np.array([1.0, 1.0])
    p2, x2 = np.array([1.0, 2.0]), np.array([0.5, 1.5])
    return np.stack([p1 / (p1 @ x1), p2 / (p2 @ x2)]), np.stack([x1, x2])


def random_budget_data(rng, n, repeat=False):
    P = rng.uniform(0.2, 3.0, size=(n, 2))
    X = rng.uniform(0.05, 2.0, size=(n, 2))
    if repeat and n >= 2:
        # same bundle chosen at two different prices
        X[1] = X[0]
        d = np.array([X[0][1], -X[0][0]]) * rng.uniform(-0.1, 0.1)
        P[1] = P[0] + d
    P = P / np.einsum("ij,ij->i", P, X)[:, None]
    return P, X


class TestSarp:
    def test_single_observation(self):
        assert check_sarp([DemandObservation(0, [1.0, 1.0], [0.5, 0.5])]).holds

    def test_two_cycle_rejected_with_witness(self):
        P, X = two_cycle()
        raw = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert raw[0] @ X[1] == 2.5 and raw[0] @ X[0] == 3.0
        assert raw[1] @ X[0] == 3.0 and raw[1] @ X[1] == 3.5
        result = check_sarp([DemandObservation(k, P[k], X[k]) for k in range(2)])
        assert not result.holds
        assert sorted(result.witness_cycle) == [0, 1]
        assert verify_sarp_witness(P, X, result.witness_cycle)

    def test_rational_data_holds(self):
        assert check_sarp(gen_demand_dataset(CD_37, SequenceConfig.square(2, 0.5, 2.0), 200)).holds

    @pytest.mark.parametrize("spec", SPECS)
    def test_rational_data_holds_all_specs(self, spec):
        assert check_sarp(gen_demand_dataset(spec, WIDE, 500)).holds

    def test_budget_violation(self):
        with pytest.raises(MalformedDataset):
            check_sarp([DemandObservation(0, [1.0, 1.0], [1.0, 1.0])])

    @settings(max_examples=150, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.booleans())
    def test_agrees_with_subset_enumeration(self, n, seed, repeat):
        P, X = random_budget_data(np.random.default_rng(seed), n, repeat)
        result = check_sarp_arrays(P, X)
        assert result.holds == brute_force_sarp(P, X)
        if not result.holds:
            assert verify_sarp_witness(P, X, result.witness_cycle)

    def test_repeated_bundle_is_not_a_violation(self):
        x = np.array([0.5, 0.5])
        P = np.array([[1.0, 1.0], [0.8, 1.2]])
        assert check_sarp_arrays(P, np.stack([x, x])).holds


class TestGraph:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 64), st.integers(0, 2**32 - 1))
    def test_incremental_closure_equals_recomputation(self, n, seed):
        P, X = random_budget_data(np.random.default_rng(seed), n)
        g = RevealedGraph(2)
        for p, x in zip(P, X):
            g.extend(p, x)
        np.testing.assert_array_equal(g.strict_edges, strict_edges_plain(P, X))
        np.testing.assert_array_equal(g.closure, floyd_warshall(strict_edges_plain(P, X)))

    def test_paths_follow_edges(self):
        P, X = random_budget_data(np.random.default_rng(5), 30)
        g = RevealedGraph.from_arrays(P, X)
        for i in range(30):
            for j in range(30):
                path = g.path(i, j)
                assert (path is not None) == g.reachable(i, j)
                if path:
                    assert path[0] == i and path[-1] == j
                    assert all(g.strict_edges[a, b] for a, b in zip(path, path[1:]))


class TestRevealedRelation:
    def test_dominance_without_data(self):
        assert strictly_revealed_preferred(RevealedGraph(2), [2.0, 2.0], [1.0, 1.0])

    def test_single_node_chain(self):
        g = RevealedGraph.from_arrays([[1.0, 1.0]], [[0.5, 0.5]])
        assert strictly_revealed_preferred(g, [0.6, 0.6], [0.4, 0.4])

    def test_unordered_without_data(self):
        assert not strictly_revealed_preferred(RevealedGraph(2), [1.0, 1.0], [1.2, 0.6])
        assert revealed_chain(RevealedGraph(2), [1.0, 1.0], [1.2, 0.6]) is None

    def test_two_node_chain_by_hand(self):
        # x_0 = (1,1) at p_0 = (0.5,0.5); x_1 = (1.6,0.2) costs 0.9 there
        P = np.array([[0.5, 0.5], [0.5, 1.0]])
        X = np.array([[1.0, 1.0], [1.6, 0.2]])
        P[1] = P[1] / (P[1] @ X[1])
        g = RevealedGraph.from_arrays(P, X)
        x, y = np.array([1.0, 1.05]), np.array([1.5, 0.2])
        chain = revealed_chain(g, x, y)
        assert chain == [0, 1]
        assert verify_chain(P, X, chain, x, y)
        assert not strictly_revealed_preferred(g, y, x)

    def test_indifference_excluded(self):
        with pytest.raises(IndifferentQuery):
            detection_index(PreferenceSpec.cobb_douglas([0.5, 0.5]), WIDE, [1.0, 4.0], [2.0, 2.0], 10)

    def test_dominance_detected_at_zero(self):
        assert detection_index(CD_37, WIDE, [2.0, 2.0], [1.0, 1.0], 10) == 0
        assert detection_index(PreferenceSpec.cobb_douglas([0.5, 0.5]), WIDE, [1.1, 1.1], [1.0, 1.0], 10) == 0

    def test_detection_anchor(self):
        x, y = [0.9, 1.4], [1.4, 0.8]
        assert prefers(CD_37, x, y) is PrefOrdering.STRICTLY_PREFERRED
        assert detection_index(CD_37, WIDE, x, y, 5000) is None
        assert detection_index(CD_37, WIDE, x, y, 20000) == 5376

    def test_narrow_box_cannot_reach(self):
        # good-0 demand is 0.3 / p_0 <= 0.6 on this box, so nothing ever lies above y
        narrow = SequenceConfig.square(2, 0.5, 2.0, seed=42)
        assert detection_index(CD_37, narrow, [1.0, 1.0], [1.2, 0.6], 10) is None
        assert detection_index(CD_37, WIDE, [1.0, 1.0], [1.2, 0.6], 20000) == 7680

    def test_detection_matches_graph_prefixes(self):
        P = np.stack(gen_prices(WIDE, 400))
        X = demand_many(CD_37, P)
        rng = np.random.default_rng(11)
        for _ in range(20):
            x, y = rng.uniform(0.1, 2.0, size=(2, 2))
            n_hat = first_detection(P, X, x, y)
            g = RevealedGraph(2)
            flags = [strictly_revealed_preferred(g, x, y)]
            for p, b in zip(P, X):
                g.extend(p, b)
                flags.append(strictly_revealed_preferred(g, x, y))
            expect = next((i for i, f in enumerate(flags) if f), None)
            assert n_hat == expect

    @pytest.mark.parametrize("spec", SPECS[:3] + SPECS[4:5])
    def test_soundness_and_monotonicity(self, spec):
        P = np.stack(gen_prices(WIDE, 500))
        X = demand_many(spec, P)
        rng = np.random.default_rng(12)
        graphs = {n: RevealedGraph.from_arrays(P[:n], X[:n]) for n in (10, 100, 500)}
        for _ in range(1000):
            x, y = rng.uniform(0.05, 3.0, size=(2, 2))
            flags = [strictly_revealed_preferred(graphs[n], x, y) for n in (10, 100, 500)]
            assert flags == sorted(flags)
            if flags[-1]:
                assert prefers(spec, x, y) is PrefOrdering.STRICTLY_PREFERRED
                chain = revealed_chain(graphs[500], x, y)
                assert verify_chain(P, X, chain, x, y)


class TestDemandBounds:
    def test_empty_graph_is_full_segment(self):
        region = revealed_demand_bounds(RevealedGraph(2), [1.0, 1.0], 8)
        assert region.diameter() == pytest.approx(np.sqrt(2.0))
        assert region.contains([0.0, 1.0]) and region.contains([1.0, 0.0])

    def test_same_price_observation_excludes_nothing(self):
        g = RevealedGraph.from_arrays([[1.0, 1.0]], [[0.3, 0.7]])
        region = revealed_demand_bounds(g, [1.0, 1.0], 8)
        assert region.contains([0.3, 0.7])
        assert region.diameter() == pytest.approx(np.sqrt(2.0))

    def test_chain_excludes_segment(self):
        # x_0 = (0.5, 0.5) is affordable at p = (1, 1); at p_0 = (1.5, 0.5) it
        # beat x_1 = (0.2, 1.2), which costs 0.9 there. Budget points below x_1,
        # those with first coordinate at most 0.2, are revealed worse than x_0.
        P = np.array([[1.5, 0.5], [4.0, 1.0 / 6.0]])
        X = np.array([[0.5, 0.5], [0.2, 1.2]])
        g = RevealedGraph.from_arrays(P, X)
        assert g.strict_edges.tolist() == [[False, True], [False, False]]
        region = revealed_demand_bounds(g, [1.0, 1.0], 12)
        assert not region.contains([0.1, 0.9])
        assert not region.contains([0.19, 0.81])
        assert region.contains([0.21, 0.79])
        assert region.contains([1.0, 0.0])
        assert region.hull().lo[0] == pytest.approx(0.2, abs=2.0**-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 60), st.integers(0, 2**32 - 1), st.sampled_from(SPECS))
    def test_against_grid_oracle(self, n, seed, spec):
        rng = np.random.default_rng(seed)
        P = rng.uniform(0.3, 3.0, size=(n, 2))
        X = demand_many(spec, P)
        p = rng.uniform(0.3, 3.0, size=2)
        depth = 10
        region = revealed_demand_bounds(RevealedGraph.from_arrays(P, X), p, depth)
        reach = floyd_warshall(strict_edges_plain(P, X))
        floors = X[reach[X @ p <= 1.0].any(axis=0)]
        t = np.linspace(0.0, 1.0 / p[0], 2001)
        line = np.column_stack([t, (1.0 - p[0] * t) / p[1]])
        dominated = np.array([np.any(np.all(q <= floors, axis=1)) for q in line]) if len(floors) else np.zeros(len(t), bool)
        width = (1.0 / p[0]) / 2**depth
        for i, q in enumerate(line):
            if not dominated[i]:
                assert region.contains(q)
            else:
                lo, hi = max(0, i - 1), min(len(t), i + 2)
                margin_ok = dominated[lo:hi].all()
                if margin_ok and all(
                    dominated[j] for j in range(len(t)) if abs(t[j] - t[i]) <= 2 * width
                ):
                    assert not region.contains(q, tol=0.0) or _on_edge(region, q)
        truth = demand_many(spec, p[None, :])[0]
        assert region.contains(truth)


def _on_edge(region, q) -> bool:
    return any(np.any(np.isclose(q[0], [b.lo[0], b.hi[0]], atol=1e-12)) for b in region.candidates() if b.contains(q))


class TestBinaryChoice:
    def test_dominance_without_data(self):
        assert binary_choice_infer([], [2.0, 2.0], [1.0, 1.0]) is ChoiceInference.MUST_PREFER
        assert binary_choice_infer([], [1.0, 1.0], [2.0, 2.0]) is ChoiceInference.MUST_DISPREFER

    def test_rectangle_rule(self):
        data = [((1.0, 1.0), (1.5, 0.5), (1.0, 1.0))]
        assert binary_choice_infer(data, [1.1, 1.1], [1.4, 0.4]) is ChoiceInference.MUST_PREFER
        assert binary_choice_infer(data, [0.9, 1.2], [1.4, 0.4]) is ChoiceInference.UNDETERMINED
        assert binary_choice_infer(data, [1.4, 0.4], [1.1, 1.1]) is ChoiceInference.MUST_DISPREFER

    def test_rejected_bundle_above_query_is_required(self):
        # y = (1.6, 0.6) exceeds the rejected (1.5, 0.5), so the choice says nothing about it
        data = [((1.0, 1.0), (1.5, 0.5), (1.0, 1.0))]
        assert binary_choice_infer(data, [1.1, 1.1], [1.6, 0.6]) is ChoiceInference.UNDETERMINED

    def test_equal_corners_need_one_strict_side(self):
        data = ChoiceData.from_choices([((1.0, 1.0), (1.5, 0.5), (1.0, 1.0))])
        assert binary_choice_infer(data, [1.0, 1.0], [1.5, 0.5]) is ChoiceInference.UNDETERMINED
        assert binary_choice_infer(data, [1.0, 1.01], [1.5, 0.5]) is ChoiceInference.MUST_PREFER
        assert choice_detection_index(data, [1.0, 1.01], [1.5, 0.5]) == 1

    def test_invalid_choice(self):
        with pytest.raises(ValueError):
            ChoiceData.from_choices([((1.0, 1.0), (1.5, 0.5), (2.0, 2.0))])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_never_contradicts_oracle(self, seed):
        rng = np.random.default_rng(seed)
        pairs = rng.uniform(0.1, 2.0, size=(50, 2, 2))
        choices = []
        for a, b in pairs:
            if prefers(CD_37, a, b) is PrefOrdering.INDIFFERENT:
                continue
            choices.append((a, b, a if prefers(CD_37, a, b) is PrefOrdering.STRICTLY_PREFERRED else b))
        x, y = rng.uniform(0.1, 2.0, size=(2, 2))
        verdict = binary_choice_infer(choices, x, y)
        truth = prefers(CD_37, x, y)
        if verdict is ChoiceInference.MUST_PREFER:
            assert truth is PrefOrdering.STRICTLY_PREFERRED
        if verdict is ChoiceInference.MUST_DISPREFER:
            assert truth is PrefOrdering.STRICTLY_DISPREFERRED
