"""GXL reading and writing, and Graphviz DOT export.

Node and edge types are referenced as ``#<KindName>``; only the fragment of
the href is used.  Attributes are ``<attr name=...>`` elements holding one
``<int>``, ``<string>`` or ``<bool>`` child.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

from .ir import (
    BINARY_KINDS, BLOCK_KINDS, VOLATILE_ATTR_KINDS, EdgeKind, Graph, GraphError, K, NodeKind,
    Relation,
)

XLINK = "http://www.w3.org/1999/xlink"

# GXL attribute name -> (Node field, expected GXL type)
_NODE_ATTRS = {
    "value": ("value", "int"),
    "symbol": ("symbol", "string"),
    "relation": ("relation", "string"),
    "volatile": ("volatile", "bool"),
    "associative": ("associative", "bool"),
    "commutative": ("commutative", "bool"),
    "position": ("arg_position", "int"),
}


class GxlError(Exception):
    def __init__(self, message: str, line: Optional[int] = None, gxl_id: Optional[str] = None) -> None:
        self.message = message
        self.line = line
        self.gxl_id = gxl_id
        where = []
        if line is not None:
            where.append(f"line {line}")
        if gxl_id is not None:
            where.append(f"id {gxl_id!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class _Element:
    tag: str
    attrs: dict[str, str]
    line: int
    children: list["_Element"] = field(default_factory=list)
    text: str = ""

    def find_all(self, tag: str) -> list["_Element"]:
        return [c for c in self.children if c.tag == tag]


def _local(name: str) -> str:
    return name.rsplit(":", 1)[-1]


def _read_tree(data: bytes) -> _Element:
    parser = expat.ParserCreate()
    stack: list[_Element] = []
    root: list[_Element] = []

    def start(name, attrs):
        el = _Element(_local(name), {_local(k): v for k, v in attrs.items()}, parser.CurrentLineNumber)
        if stack:
            stack[-1].children.append(el)
        else:
            root.append(el)
        stack.append(el)

    def end(name):
        stack.pop()

    def chars(text):
        if stack:
            stack[-1].text += text

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise GxlError(f"malformed XML: {expat.ErrorString(exc.code)}", exc.lineno) from None
    except (LookupError, ValueError) as exc:
        # e.g. an unknown encoding named in the XML declaration
        raise GxlError(f"malformed XML: {exc}", parser.CurrentLineNumber) from None
    return root[0]


def _type_name(el: _Element, what: str, gxl_id: str) -> str:
    types = el.find_all("type")
    if len(types) != 1 or "href" not in types[0].attrs:
        raise GxlError(f"{what} needs exactly one <type> with an href", el.line, gxl_id)
    return types[0].attrs["href"].rsplit("#", 1)[-1]


def _attributes(el: _Element, gxl_id: str) -> dict[str, tuple[str, object, int]]:
    found = {}
    for attr in el.find_all("attr"):
        name = attr.attrs.get("name")
        if name is None:
            raise GxlError("<attr> without a name", attr.line, gxl_id)
        if len(attr.children) != 1:
            raise GxlError(f"attribute {name!r} needs exactly one typed value", attr.line, gxl_id)
        val = attr.children[0]
        raw = val.text.strip()
        if val.tag == "int":
            try:
                value: object = int(raw)
            except ValueError:
                raise GxlError(f"attribute {name!r}: {raw!r} is not an integer", val.line, gxl_id) from None
        elif val.tag == "bool":
            if raw.lower() not in ("true", "false"):
                raise GxlError(f"attribute {name!r}: {raw!r} is not a boolean", val.line, gxl_id)
            value = raw.lower() == "true"
        elif val.tag == "string":
            value = val.text
        else:
            raise GxlError(f"attribute {name!r}: unsupported value type <{val.tag}>", val.line, gxl_id)
        found[name] = (val.tag, value, attr.line)
    return found


def _node_attrs(kind: NodeKind, raw: dict, gxl_id: str) -> dict:
    attrs: dict = {}
    for name, (gtype, value, line) in raw.items():
        if name not in _NODE_ATTRS:
            continue
        field_name, expected = _NODE_ATTRS[name]
        if name == "position" and kind is not K.Argument:
            continue
        if gtype != expected:
            raise GxlError(f"attribute {name!r} must be <{expected}>, got <{gtype}>", line, gxl_id)
        if name == "relation":
            try:
                value = Relation[value.strip()]
            except KeyError:
                raise GxlError(f"unknown relation {value!r}", line, gxl_id) from None
        attrs[field_name] = value
    if kind in BINARY_KINDS:
        attrs.setdefault("associative", False)
        attrs.setdefault("commutative", False)
    if kind in VOLATILE_ATTR_KINDS:
        attrs.setdefault("volatile", False)
    return attrs


def parse_gxl(data: Union[bytes, str]) -> Graph:
    """Read the first graph of a GXL document."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    root = _read_tree(data)
    if root.tag != "gxl":
        raise GxlError(f"root element is <{root.tag}>, expected <gxl>", root.line)
    graphs = root.find_all("graph")
    if not graphs:
        raise GxlError("document contains no <graph>", root.line)
    gel = graphs[0]
    graph = Graph(gel.attrs.get("id", "graph"))

    ids: dict[str, int] = {}
    for el in gel.find_all("node"):
        gxl_id = el.attrs.get("id")
        if gxl_id is None:
            raise GxlError("<node> without an id", el.line)
        if gxl_id in ids:
            raise GxlError("duplicate node id", el.line, gxl_id)
        type_name = _type_name(el, "node", gxl_id)
        try:
            kind = K[type_name]
        except KeyError:
            raise GxlError(f"unknown node type {type_name!r}", el.line, gxl_id) from None
        attrs = _node_attrs(kind, _attributes(el, gxl_id), gxl_id)
        try:
            ids[gxl_id] = graph.add_node(kind, **attrs)
        except GraphError as exc:
            raise GxlError(str(exc), el.line, gxl_id) from None

    keep_next: dict[int, int] = {}
    for n, el in enumerate(gel.find_all("edge")):
        gxl_id = el.attrs.get("id", f"<edge #{n + 1}>")
        ends = []
        for end in ("from", "to"):
            ref = el.attrs.get(end)
            if ref is None:
                raise GxlError(f"edge without '{end}'", el.line, gxl_id)
            if ref not in ids:
                raise GxlError(f"edge '{end}' references undeclared node {ref!r}", el.line, gxl_id)
            ends.append(ids[ref])
        type_name = _type_name(el, "edge", gxl_id)
        try:
            ekind = EdgeKind(type_name)
        except ValueError:
            raise GxlError(f"unknown edge type {type_name!r}", el.line, gxl_id) from None
        raw = _attributes(el, gxl_id)
        if "position" in raw:
            gtype, position, line = raw["position"]
            if gtype != "int":
                raise GxlError(f"attribute 'position' must be <int>, got <{gtype}>", line, gxl_id)
        elif ekind is EdgeKind.Keep:
            position = keep_next.get(ends[0], 0)
        else:
            raise GxlError(f"{ekind.value} edge without a position", el.line, gxl_id)
        if ekind is EdgeKind.Keep:
            keep_next[ends[0]] = max(keep_next.get(ends[0], 0), position + 1)
        try:
            graph.add_edge(ends[0], ends[1], ekind, position)
        except GraphError as exc:
            raise GxlError(str(exc), el.line, gxl_id) from None
    return graph


def _attr_xml(name: str, value: object) -> str:
    if isinstance(value, bool):
        body = f"<bool>{'true' if value else 'false'}</bool>"
    elif isinstance(value, int):
        body = f"<int>{value}</int>"
    elif isinstance(value, Relation):
        body = f"<string>{value.name}</string>"
    else:
        body = f"<string>{escape(str(value))}</string>"
    return f"      <attr name={quoteattr(name)}>{body}</attr>\n"


_GXL_NAME = {field_name: gxl for gxl, (field_name, _) in _NODE_ATTRS.items()}


def write_gxl(graph: Graph) -> bytes:
    """Serialize deterministically: nodes, then edges, each in id order."""
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<gxl xmlns:xlink="{XLINK}">\n',
        f'  <graph id={quoteattr(graph.name)} edgeids="true" edgemode="directed">\n',
    ]
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        parts.append(f'    <node id="n{nid}">\n      <type xlink:href="#{node.kind.name}"/>\n')
        for name, value in node.attrs().items():
            parts.append(_attr_xml(_GXL_NAME[name], value))
        parts.append("    </node>\n")
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        parts.append(f'    <edge id="e{eid}" from="n{e.source}" to="n{e.target}">\n'
                     f'      <type xlink:href="#{e.kind.value}"/>\n')
        parts.append(_attr_xml("position", e.position))
        parts.append("    </edge>\n")
    parts.append("  </graph>\n</gxl>\n")
    return "".join(parts).encode("utf-8")


def _dot_str(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_label(node) -> str:
    label = node.kind.name
    if node.value is not None:
        label += f" {node.value}"
    if node.symbol is not None:
        label += f" {node.symbol}"
    if node.relation is not None:
        label += f" {node.relation.name}"
    if node.arg_position is not None:
        label += f" {node.arg_position}"
    return label


_EDGE_STYLE = {
    EdgeKind.Dataflow: "",
    EdgeKind.Memory: ", color=blue",
    EdgeKind.Controlflow: ", color=red",
    EdgeKind.True_: ", color=darkgreen",
    EdgeKind.False_: ", color=orange",
    EdgeKind.Keep: ", style=dashed",
}


def write_dot(graph: Graph, cluster_blocks: bool = False) -> str:
    """Graphviz digraph; with ``cluster_blocks`` each block becomes a cluster
    around its operations and containment edges are left out."""
    lines = [f"digraph {_dot_str(graph.name)} {{", "  node [shape=box];"]

    def node_line(nid: int, indent: str) -> str:
        node = graph.nodes[nid]
        shape = ", shape=ellipse" if node.kind in BLOCK_KINDS else ""
        return f"{indent}n{nid} [label={_dot_str(_dot_label(node) + f' #{nid}')}{shape}];"

    if cluster_blocks:
        lines.insert(1, "  compound=true;")
        placed = set()
        for b in sorted(n for n, node in graph.nodes.items() if node.kind in BLOCK_KINDS):
            lines.append(f"  subgraph cluster_{b} {{")
            lines.append(f"    label={_dot_str(graph.nodes[b].kind.name + f' #{b}')};")
            lines.append(node_line(b, "    "))
            placed.add(b)
            for n in sorted(graph.contents(b)):
                if n not in placed:
                    lines.append(node_line(n, "    "))
                    placed.add(n)
            lines.append("  }")
        for n in sorted(set(graph.nodes) - placed):
            lines.append(node_line(n, "  "))
    else:
        for n in sorted(graph.nodes):
            lines.append(node_line(n, "  "))
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        if cluster_blocks and e.position == -1:
            continue
        label = str(e.position) if e.kind is EdgeKind.Dataflow else f"{e.kind.value} {e.position}"
        lines.append(f"  n{e.source} -> n{e.target} [label={_dot_str(label)}{_EDGE_STYLE[e.kind]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
