import numpy as np
import pytest

from capnet.errors import InputError
from capnet.motifs import (
    FUNNEL_CLASS,
    count_shortcut_edges,
    count_simple_cycles,
    four_node_census,
    triad_census,
)
from capnet.synth import gen_er_digraph, gen_random_tree

from conftest import graph_from_edges

from oracles import dfs_shortcuts, exhaustive_cycles, exhaustive_four_node, exhaustive_triads


# -- triads ---------------------------------------------------------------------


def test_two_parents_one_child_is_021U():
    g = graph_from_edges([(0, 2), (1, 2)])
    assert triad_census(g).counts == {"021U": 1}


def test_two_children_one_parent_is_021D():
    g = graph_from_edges([(0, 1), (0, 2)])
    assert triad_census(g).counts == {"021D": 1}


def test_chain_is_021C():
    g = graph_from_edges([(0, 1), (1, 2)])
    assert triad_census(g).counts == {"021C": 1}


def test_transitive_triangle_is_030T():
    g = graph_from_edges([(0, 1), (1, 2), (0, 2)])
    assert triad_census(g).counts == {"030T": 1}


def test_cycle_triangle_is_030C():
    g = graph_from_edges([(0, 1), (1, 2), (2, 0)])
    assert triad_census(g).counts == {"030C": 1}


def test_mutual_dyad_classes():
    g = graph_from_edges([(0, 1), (1, 0), (2, 1)])  # A<->B<-C
    assert triad_census(g).counts == {"111D": 1}
    g = graph_from_edges([(0, 1), (1, 0), (1, 2)])  # A<->B->C
    assert triad_census(g).counts == {"111U": 1}


def test_triads_match_exhaustive_enumeration():
    for seed in range(12):
        g = gen_er_digraph(6 + seed % 7, 0.08 + 0.05 * (seed % 4), seed=seed)
        got = {k: int(v) for k, v in triad_census(g).counts.items()}
        assert got == exhaustive_triads(g), f"seed={seed}"


def test_triads_match_networkx_census():
    nx = pytest.importorskip("networkx")
    connected = {
        "021D", "021U", "021C", "111D", "111U", "030T", "030C",
        "201", "120D", "120U", "120C", "210", "300",
    }
    for seed in (30, 31, 32):
        g = gen_er_digraph(11, 0.15, seed=seed)
        G = nx.DiGraph()
        G.add_nodes_from(range(g.node_count))
        G.add_edges_from(zip(g.parents.tolist(), g.children.tolist()))
        ref = {k: v for k, v in nx.triadic_census(G).items() if k in connected and v}
        got = {k: int(v) for k, v in triad_census(g).counts.items()}
        assert got == ref


def test_triads_isomorphism_invariant():
    g = gen_er_digraph(10, 0.2, seed=77)
    perm = np.random.default_rng(5).permutation(10)
    relabeled = graph_from_edges(
        [(int(perm[u]), int(perm[v])) for u, v in zip(g.parents, g.children)], n=10
    )
    assert triad_census(g).counts == triad_census(relabeled).counts


def test_triad_shares_sum_to_one():
    g = gen_er_digraph(12, 0.2, seed=4)
    census = triad_census(g)
    assert sum(census.shares.values()) == pytest.approx(1.0)


# -- 4-node census ----------------------------------------------------------------


def test_star_single_quad():
    from capnet.motifs import _BIT4, four_class_code

    g = graph_from_edges([(0, 1), (0, 2), (0, 3)])
    census = four_node_census(g)
    assert census.total == 1
    out_star_code = four_class_code(
        (1 << _BIT4[(0, 1)]) | (1 << _BIT4[(0, 2)]) | (1 << _BIT4[(0, 3)])
    )
    assert census.counts == {out_star_code: 1}
    assert out_star_code != FUNNEL_CLASS


def test_funnel_exclusion():
    g = graph_from_edges([(1, 0), (2, 0), (3, 0)])
    census = four_node_census(g, exclude_funnel=True)
    assert census.counts == {}
    assert census.excluded_funnel_share == 1.0
    raw = four_node_census(g)
    assert raw.counts == {FUNNEL_CLASS: 1}


def test_four_node_matches_exhaustive():
    for seed in range(6):
        g = gen_er_digraph(10, 0.2, seed=40 + seed)
        got = {k: int(v) for k, v in four_node_census(g).counts.items()}
        assert got == exhaustive_four_node(g), f"seed={seed}"


def test_four_node_exact_budget_error():
    g = gen_er_digraph(12, 0.4, seed=1)
    with pytest.raises(InputError):
        four_node_census(g, mode="exact", budget=5)


@pytest.mark.slow
def test_four_node_sampling_converges():
    g = gen_er_digraph(200, 0.1, seed=9)
    exact = four_node_census(g, mode="exact", budget=5_000_000)
    sampled = four_node_census(g, mode="sampled", target_samples=1_000_000, seed=11)
    assert sampled.sampled and sampled.leaf_prob < 1.0
    for code, share in exact.shares.items():
        assert abs(sampled.shares.get(code, 0.0) - share) <= 0.01
    # estimated totals track the exact census
    assert sampled.total == pytest.approx(exact.total, rel=0.05)


def test_four_node_sampling_deterministic():
    g = gen_er_digraph(60, 0.15, seed=2)
    a = four_node_census(g, mode="sampled", target_samples=2_000, seed=5)
    b = four_node_census(g, mode="sampled", target_samples=2_000, seed=5)
    assert a.counts == b.counts and a.leaf_prob == b.leaf_prob


# -- cycles -------------------------------------------------------------------------


def test_dag_has_no_cycles():
    g = graph_from_edges([(0, 1), (0, 2), (1, 3), (2, 3)])
    assert count_simple_cycles(g).cycle_count == 0


def test_two_cycle():
    g = graph_from_edges([(0, 1), (1, 0)])
    report = count_simple_cycles(g)
    assert report.cycle_count == 1
    assert not report.truncated


def test_complete_digraph_k4_has_20_cycles():
    g = gen_er_digraph(4, 1.0, seed=0)
    assert count_simple_cycles(g).cycle_count == 20
    assert exhaustive_cycles(g) == 20


def test_cycles_match_oracle():
    for seed in range(6):
        g = gen_er_digraph(6, 0.3, seed=50 + seed)
        assert count_simple_cycles(g).cycle_count == exhaustive_cycles(g)


def test_cycle_cap_truncates():
    g = gen_er_digraph(4, 1.0, seed=0)
    report = count_simple_cycles(g, cap=5)
    assert report.truncated
    assert report.cycle_count == 5


# -- shortcut edges -------------------------------------------------------------------


def test_classic_shortcut():
    g = graph_from_edges([(0, 1), (1, 2), (0, 2)])
    stats = count_shortcut_edges(g)
    assert stats.count == 1
    assert stats.ratio == pytest.approx(1 / 3)


def test_tree_has_no_shortcuts():
    g = gen_random_tree(400, seed=8)
    assert count_shortcut_edges(g).count == 0


def test_shortcuts_match_dfs_oracle_on_random_dags():
    for seed in range(8):
        er = gen_er_digraph(50, 0.05, seed=60 + seed)
        mask = er.parents < er.children  # orient upward: a DAG
        from capnet.graph import EntityGraph

        g = EntityGraph.from_arrays(er.parents[mask], er.children[mask], 50)
        assert count_shortcut_edges(g).count == dfs_shortcuts(g)


def test_shortcuts_match_dfs_oracle_with_cycles():
    for seed in range(8):
        g = gen_er_digraph(25, 0.12, seed=70 + seed)
        assert count_shortcut_edges(g).count == dfs_shortcuts(g)


def test_shortcut_depth_bound():
    # direct edge 0->9 plus a 9-step path 0->1->...->9
    chain = [(i, i + 1) for i in range(9)]
    g = graph_from_edges(chain + [(0, 9)])
    assert count_shortcut_edges(g).count == 1
    assert count_shortcut_edges(g, depth=5).count == 0
    assert count_shortcut_edges(g, depth=9).count == 1
    assert count_shortcut_edges(g, depth=2).depth_bound == 2
    with pytest.raises(InputError):
        count_shortcut_edges(g, depth=1)


def test_shortcut_depth2_matches_triangle_closure_oracle():
    for seed in range(6):
        g = gen_er_digraph(30, 0.12, seed=80 + seed)
        edge_set = set(zip(g.parents.tolist(), g.children.tolist()))
        expect = sum(
            1
            for u, v in edge_set
            if any((u, w) in edge_set and (w, v) in edge_set for w in range(30))
        )
        fast = count_shortcut_edges(g, depth=2)
        assert fast.count == expect
        assert fast.count <= count_shortcut_edges(g).count


def test_shortcut_relabeling_invariant():
    g = gen_er_digraph(20, 0.15, seed=90)
    perm = np.random.default_rng(3).permutation(20)
    relabeled = graph_from_edges(
        [(int(perm[u]), int(perm[v])) for u, v in zip(g.parents, g.children)], n=20
    )
    assert count_shortcut_edges(g).count == count_shortcut_edges(relabeled).count
