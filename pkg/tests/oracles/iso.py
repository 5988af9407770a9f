"""Graph isomorphism that respects kinds, attributes, edge kinds and positions."""

from __future__ import annotations

import networkx as nx
from networkx.algorithms.isomorphism import MultiDiGraphMatcher, categorical_multiedge_match, categorical_node_match

from firmkit.ir import Graph


def to_networkx(graph: Graph) -> nx.MultiDiGraph:
    out = nx.MultiDiGraph()
    for n, node in graph.nodes.items():
        attrs = tuple(sorted((k, str(v)) for k, v in node.attrs().items()))
        out.add_node(n, label=(node.kind.name, attrs))
    for e in graph.edges.values():
        out.add_edge(e.source, e.target, label=(e.kind.value, e.position))
    return out


def isomorphic(a: Graph, b: Graph) -> bool:
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    ga, gb = to_networkx(a), to_networkx(b)
    matcher = MultiDiGraphMatcher(
        ga, gb,
        node_match=categorical_node_match("label", None),
        edge_match=categorical_multiedge_match("label", None),
    )
    return matcher.is_isomorphic()
