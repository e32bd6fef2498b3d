import numpy as np
import pytest
from scipy.special import zeta

from capnet.degree_stats import ccdf, degree_sequences
from capnet.errors import InputError
from capnet.motifs import count_shortcut_edges, count_simple_cycles
from capnet.powerlaw import fit_power_law
from capnet.synth import (
    ScaleFreeParams,
    gen_directed_scale_free,
    gen_discrete_power_law,
    gen_er_digraph,
    gen_random_tree,
)


def test_power_law_sample_mean_matches_zeta_ratio():
    sample = gen_discrete_power_law(100_000, 2.5, xmin=1, seed=11)
    values = sample.values.astype(np.float64)
    target = zeta(1.5) / zeta(2.5)
    se = values.std() / np.sqrt(len(values))
    assert abs(values.mean() - target) <= 3 * se


def test_power_law_sample_respects_xmin():
    sample = gen_discrete_power_law(5_000, 2.5, xmin=7, seed=12)
    assert sample.values.min() == 7


def test_power_law_sample_deterministic():
    a = gen_discrete_power_law(1_000, 2.2, seed=13)
    b = gen_discrete_power_law(1_000, 2.2, seed=13)
    assert np.array_equal(a.values, b.values)


def test_power_law_gamma_must_exceed_one():
    with pytest.raises(InputError):
        gen_discrete_power_law(100, 1.0, seed=1)


@pytest.mark.slow
def test_ccdf_slope_near_one_minus_gamma():
    sample = gen_discrete_power_law(1_000_000, 2.5, xmin=1, seed=14)
    assert ccdf(sample).loglog_slope() == pytest.approx(-1.5, abs=0.05)


@pytest.mark.slow
def test_scale_free_recovers_analytic_exponents():
    params = ScaleFreeParams(
        p_new_source=0.30, p_new_target=0.20, offset_in=0.72, offset_out=0.59
    )
    assert params.predicted_in_exponent == pytest.approx(2.7)
    assert params.predicted_out_exponent == pytest.approx(2.85)
    for seed in (0, 5):
        g = gen_directed_scale_free(150_000, params, seed=seed)
        out_s, in_s = degree_sequences(g)
        # the attachment body converges slowly, so measure the asymptotic tail
        fit_in = fit_power_law(in_s, xmin=30)
        fit_out = fit_power_law(out_s, xmin=30)
        assert abs(fit_in.gamma - 2.7) <= 0.15
        assert abs(fit_out.gamma - 2.85) <= 0.15


def test_scale_free_all_new_sources_means_out_degree_one():
    params = ScaleFreeParams(p_new_source=1.0, p_new_target=0.0, offset_in=0.7)
    g = gen_directed_scale_free(5_000, params, seed=2)
    out_s, _ = degree_sequences(g)
    assert np.all(out_s.values == 1)


def test_scale_free_deterministic():
    params = ScaleFreeParams(p_new_source=0.4, p_new_target=0.3)
    a = gen_directed_scale_free(2_000, params, seed=9)
    b = gen_directed_scale_free(2_000, params, seed=9)
    assert np.array_equal(a.parents, b.parents)
    assert np.array_equal(a.children, b.children)


def test_scale_free_invalid_probabilities():
    with pytest.raises(InputError):
        ScaleFreeParams(p_new_source=0.7, p_new_target=0.7)
    with pytest.raises(InputError):
        ScaleFreeParams(p_new_source=-0.1, p_new_target=0.2)


def test_random_tree_properties():
    g = gen_random_tree(1000, seed=4)
    assert g.node_count == 1000
    assert g.edge_count == 999
    assert count_simple_cycles(g).cycle_count == 0
    assert count_shortcut_edges(g).count == 0
    from capnet.paths import avg_clustering

    assert avg_clustering(g) == 0.0


def test_er_complete():
    g = gen_er_digraph(10, 1.0, seed=0)
    assert g.edge_count == 90


def test_er_seeding():
    a = gen_er_digraph(200, 0.05, seed=1)
    b = gen_er_digraph(200, 0.05, seed=2)
    c = gen_er_digraph(200, 0.05, seed=1)
    assert not np.array_equal(a.parents, b.parents) or not np.array_equal(
        a.children, b.children
    )
    assert np.array_equal(a.parents, c.parents)
    assert np.array_equal(a.children, c.children)


def test_csv_round_trip(tmp_path):
    from capnet.graph import build_graph
    from capnet.ingest import parse_edges_csv, parse_nodes_csv
    from capnet.synth import attach_financials, write_network_csv

    g = attach_financials(gen_random_tree(50, seed=6), seed=7)
    write_network_csv(g, tmp_path / "n.csv", tmp_path / "e.csv")
    g2 = build_graph(
        parse_nodes_csv(tmp_path / "n.csv"), parse_edges_csv(tmp_path / "e.csv")
    )
    assert g2.node_count == g.node_count
    assert g2.edge_count == g.edge_count
    assert sorted(g2.out_degrees) == sorted(g.out_degrees)
