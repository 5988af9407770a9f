"""Graph-based compiler IR with verification, local optimization and
instruction selection."""

from .build import Builder
from .gxl import GxlError, parse_gxl, write_dot, write_gxl
from .ir import Edge, EdgeKind, Graph, GraphError, Node, NodeKind, Relation
from .isel import SelectionReport, select
from .opt import OptConfig, PassReport, VerificationError, optimize
from .verify import Diagnostic, verify

__all__ = [
    "Builder", "Diagnostic", "Edge", "EdgeKind", "Graph", "GraphError", "GxlError", "Node",
    "NodeKind", "OptConfig", "PassReport", "Relation", "SelectionReport", "VerificationError",
    "optimize", "parse_gxl", "select", "verify", "write_dot", "write_gxl",
]
