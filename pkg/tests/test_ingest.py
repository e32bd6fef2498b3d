import io

import pytest
from hypothesis import given, settings, strategies as st

from capnet.errors import InputError
from capnet.graph import build_graph
from capnet.ingest import (
    NetworkScope,
    dedupe_edges,
    filter_network,
    parse_edges_csv,
    parse_nodes_csv,
)
from capnet.records import EdgeSource, NodeKind, ParseStats

from conftest import edge, node


def nodes_csv(rows):
    return io.BytesIO(("id,kind,naics,assets,wages\n" + "\n".join(rows) + "\n").encode())


def edges_csv(rows):
    return io.BytesIO(
        ("parent_id,child_id,share_pct,source\n" + "\n".join(rows) + "\n").encode()
    )


def test_parse_node_full_row():
    recs = parse_nodes_csv(nodes_csv(["x1,tb_partnership,5313,100000,0"]))
    assert recs[0].id == "x1"
    assert recs[0].kind is NodeKind.TB_PARTNERSHIP
    assert recs[0].naics == "5313"
    assert recs[0].assets == 100000
    assert recs[0].wages == 0


def test_parse_node_optionals_absent():
    recs = parse_nodes_csv(nodes_csv(["x2,person,,,"]))
    assert recs[0].kind is NodeKind.PERSON
    assert recs[0].naics is None and recs[0].assets is None and recs[0].wages is None


def test_parse_node_negative_assets_names_row():
    with pytest.raises(InputError) as err:
        parse_nodes_csv(nodes_csv(["ok,person,,,", "bad,person,,-5,"]))
    assert "row 3" in str(err.value)


def test_parse_node_kind_case_insensitive():
    recs = parse_nodes_csv(nodes_csv(["x,S_CORP,,,"]))
    assert recs[0].kind is NodeKind.S_CORP


def test_parse_node_unknown_kind_warns():
    stats = ParseStats()
    recs = parse_nodes_csv(nodes_csv(["x,llc?,,,"]), stats)
    assert recs[0].kind is NodeKind.OTHER
    assert stats.unknown_kinds == 1


def test_parse_node_duplicate_id():
    with pytest.raises(InputError) as err:
        parse_nodes_csv(nodes_csv(["x,person,,,", "x,person,,,"]))
    assert "row 3" in str(err.value)


def test_parse_node_bad_naics():
    with pytest.raises(InputError):
        parse_nodes_csv(nodes_csv(["x,person,53aa,,"]))


def test_parse_edge_share_percent():
    recs = parse_edges_csv(edges_csv(["p,c,100,parent_report"]))
    assert recs[0].share == 1.0
    assert recs[0].source is EdgeSource.PARENT_REPORT


def test_parse_edge_share_absent_defaults_merged():
    recs = parse_edges_csv(edges_csv(["p,c,,child_report", "p,d,,"]))
    assert recs[0].share is None
    assert recs[1].source is EdgeSource.MERGED


def test_parse_edge_self_loop():
    with pytest.raises(InputError) as err:
        parse_edges_csv(edges_csv(["p,p,50,"]))
    assert "row 2" in str(err.value)


@pytest.mark.parametrize("pct", ["0", "-10", "201"])
def test_parse_edge_share_out_of_range(pct):
    with pytest.raises(InputError):
        parse_edges_csv(edges_csv([f"p,c,{pct},"]))


def test_parse_edge_over_100_allowed():
    recs = parse_edges_csv(edges_csv(["p,c,150,"]))
    assert recs[0].share == 1.5


def test_parse_crlf_accepted():
    data = io.BytesIO(b"id,kind,naics,assets,wages\r\nx,person,,,\r\n")
    assert parse_nodes_csv(data)[0].id == "x"


def test_bad_header_rejected():
    with pytest.raises(InputError):
        parse_nodes_csv(io.BytesIO(b"id,type\nx,person\n"))


def test_dedupe_agreeing_duplicates():
    out = dedupe_edges(
        [
            edge("p", "c", 0.5, EdgeSource.PARENT_REPORT),
            edge("p", "c", 0.5, EdgeSource.CHILD_REPORT),
        ]
    )
    assert len(out) == 1
    assert out[0].share == 0.5
    assert out[0].source is EdgeSource.MERGED


def test_dedupe_conflict_prefers_child_report():
    stats = ParseStats()
    out = dedupe_edges(
        [
            edge("p", "c", 0.4, EdgeSource.PARENT_REPORT),
            edge("p", "c", 0.6, EdgeSource.CHILD_REPORT),
        ],
        stats,
    )
    assert out[0].share == 0.6
    assert stats.share_discrepancies == 1


def test_dedupe_single_missing_share():
    out = dedupe_edges([edge("p", "c", None, EdgeSource.PARENT_REPORT)])
    assert len(out) == 1
    assert out[0].share is None
    assert out[0].source is EdgeSource.MERGED


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["a", "b", "c", "d"]),
            st.sampled_from(["a", "b", "c", "d"]),
            st.one_of(st.none(), st.floats(0.01, 2.0)),
            st.sampled_from(list(EdgeSource)),
        ).filter(lambda t: t[0] != t[1]),
        max_size=20,
    )
)
def test_dedupe_idempotent(raw):
    recs = [edge(p, c, s, src) for p, c, s, src in raw]
    once = dedupe_edges(recs)
    twice = dedupe_edges(once)
    assert once == twice


def _scope_graph():
    nodes = [
        node("P", NodeKind.PERSON),
        node("A", NodeKind.TB_PARTNERSHIP),
        node("B", NodeKind.S_CORP),
    ]
    edges = [edge("P", "A"), edge("A", "B")]
    return build_graph(nodes, edges)


def test_filter_strips_person():
    g = filter_network(_scope_graph(), NetworkScope.named("entities"))
    assert sorted(g.ids) == ["A", "B"]
    assert g.edge_count == 1


def test_filter_keeps_person_in_all_scope():
    g = filter_network(_scope_graph(), NetworkScope.named("all"))
    assert sorted(g.ids) == ["A", "B", "P"]
    assert g.edge_count == 2


def test_filter_fire_only_graph_is_empty_signal():
    nodes = [node("A", naics="52"), node("B", naics="53")]
    g = build_graph(nodes, [edge("A", "B")])
    out = filter_network(g, NetworkScope.named("no-fire"))
    assert out.is_empty


def test_filter_drops_isolated_nodes():
    nodes = [node("A"), node("B"), node("C", NodeKind.PERSON)]
    g = build_graph(nodes, [edge("A", "B"), edge("C", "A")])
    out = filter_network(g, NetworkScope.named("entities"))
    assert sorted(out.ids) == ["A", "B"]
    assert ((out.out_degrees + out.in_degrees) >= 1).all()


def test_filter_idempotent_and_shrinking():
    g = _scope_graph()
    scope = NetworkScope.named("entities")
    once = filter_network(g, scope)
    twice = filter_network(once, scope)
    assert once.node_count >= twice.node_count
    assert once.node_count <= g.node_count
    assert list(once.ids) == list(twice.ids)
    assert once.edge_count == twice.edge_count


def test_scope_requires_kinds():
    with pytest.raises(InputError):
        NetworkScope(include_kinds=frozenset())


def test_gcc_only_scope():
    nodes = [node(x) for x in "ABCDE"]
    edges = [edge("A", "B"), edge("C", "D"), edge("C", "E")]
    g = build_graph(nodes, edges)
    out = filter_network(g, NetworkScope.named("entities", gcc_only=True))
    assert sorted(out.ids) == ["C", "D", "E"]
