"""In-memory typed property graph.

Vertices are identified by (type_name, key); edges belong to a declared edge
type that fixes endpoint types and directedness. Parallel edges between the
same endpoints are kept and distinguishable by edge id, because downstream
co-context construction stores multiple timestamped edges per account pair.

Concurrency: single writer, many readers. All mutation goes through a lock;
analytics grab a consistent edge snapshot under the same lock and then work
off-lock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

SCALAR_KINDS = ("string", "integer", "float", "timestamp")


class GraphError(Exception):
    pass


class SchemaError(GraphError):
    pass


class UnknownVertexError(GraphError):
    pass


class VertexRef(NamedTuple):
    type_name: str
    key: str


@dataclass(frozen=True)
class VertexType:
    name: str
    # attribute name -> scalar kind ("string" | "integer" | "float" | "timestamp")
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class EdgeType:
    name: str
    from_type: str
    to_type: str
    directed: bool = True
    attributes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class GraphSchema:
    vertex_types: tuple[VertexType, ...]
    edge_types: tuple[EdgeType, ...] = ()

    def validate(self) -> None:
        names: set[str] = set()
        for vt in self.vertex_types:
            if vt.name in names:
                raise SchemaError(f"duplicate type name: {vt.name}")
            names.add(vt.name)
            for _, kind in vt.attributes:
                if kind not in SCALAR_KINDS:
                    raise SchemaError(f"unknown scalar kind {kind!r} in {vt.name}")
        vnames = {vt.name for vt in self.vertex_types}
        for et in self.edge_types:
            if et.name in names:
                raise SchemaError(f"duplicate type name: {et.name}")
            names.add(et.name)
            if et.from_type not in vnames or et.to_type not in vnames:
                raise SchemaError(
                    f"edge type {et.name} references undeclared vertex type "
                    f"({et.from_type} -> {et.to_type})"
                )
            for _, kind in et.attributes:
                if kind not in SCALAR_KINDS:
                    raise SchemaError(f"unknown scalar kind {kind!r} in {et.name}")


@dataclass
class Edge:
    eid: int
    edge_type: str
    src: VertexRef
    dst: VertexRef
    attributes: dict = field(default_factory=dict)

    def other(self, ref: VertexRef) -> VertexRef:
        return self.dst if ref == self.src else self.src


def _check_scalar(kind: str, value):
    """Coerce/validate one attribute value against its declared kind."""
    if kind == "string":
        if not isinstance(value, str):
            raise SchemaError(f"expected string, got {type(value).__name__}")
        return value
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"expected integer, got {type(value).__name__}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"expected float, got {type(value).__name__}")
        return float(value)
    if kind == "timestamp":
        # timestamps are integer epoch seconds; parsing of ISO strings happens
        # at the ingest layer, the graph only stores the resolved value
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"expected timestamp (epoch seconds), got {type(value).__name__}")
        return value
    raise SchemaError(f"unknown scalar kind {kind!r}")


class PropertyGraph:
    """Typed property graph with adjacency indexes per edge type.

    Vertices upsert idempotently: a second upsert of the same (type, key)
    merges the newly bound attributes over the old ones and never duplicates.
    Edge endpoints are auto-created as bare vertices when absent, since log
    files routinely reference vertices that arrive in another file.
    """

    def __init__(self, schema: GraphSchema):
        schema.validate()
        self.schema = schema
        self._vtypes = {vt.name: dict(vt.attributes) for vt in schema.vertex_types}
        self._etypes = {et.name: et for et in schema.edge_types}
        self._eattrs = {et.name: dict(et.attributes) for et in schema.edge_types}
        # type -> key -> attribute dict
        self._vertices: dict[str, dict[str, dict]] = {vt.name: {} for vt in schema.vertex_types}
        self._edges: list[Edge] = []
        # adjacency: ref -> edge_type -> list of edge ids
        self._out: dict[VertexRef, dict[str, list[int]]] = {}
        self._in: dict[VertexRef, dict[str, list[int]]] = {}
        self.lock = threading.RLock()

    # -- vertices ------------------------------------------------------

    def upsert_vertex(self, type_name: str, key: str, attributes: dict | None = None) -> VertexRef:
        decl = self._vtypes.get(type_name)
        if decl is None:
            raise SchemaError(f"unknown vertex type: {type_name}")
        if not isinstance(key, str) or not key:
            raise SchemaError(f"vertex key must be a non-empty string, got {key!r}")
        checked = {}
        for name, value in (attributes or {}).items():
            if name not in decl:
                raise SchemaError(f"{type_name} has no attribute {name!r}")
            checked[name] = _check_scalar(decl[name], value)
        ref = VertexRef(type_name, key)
        with self.lock:
            existing = self._vertices[type_name].get(key)
            if existing is None:
                self._vertices[type_name][key] = checked
            else:
                existing.update(checked)
        return ref

    def has_vertex(self, ref: VertexRef) -> bool:
        vs = self._vertices.get(ref.type_name)
        return vs is not None and ref.key in vs

    def vertex_attributes(self, ref: VertexRef) -> dict:
        try:
            return dict(self._vertices[ref.type_name][ref.key])
        except KeyError:
            raise UnknownVertexError(f"no vertex {ref.type_name}({ref.key})") from None

    def vertices(self, type_name: str) -> Iterator[str]:
        if type_name not in self._vtypes:
            raise SchemaError(f"unknown vertex type: {type_name}")
        return iter(list(self._vertices[type_name].keys()))

    def vertex_count(self, type_name: str) -> int:
        if type_name not in self._vtypes:
            raise SchemaError(f"unknown vertex type: {type_name}")
        return len(self._vertices[type_name])

    # -- edges ---------------------------------------------------------

    def _resolve_endpoint(self, value, expected_type: str) -> VertexRef:
        if isinstance(value, VertexRef):
            if value.type_name != expected_type:
                raise SchemaError(
                    f"endpoint type {value.type_name} does not match declared {expected_type}"
                )
            return value
        return VertexRef(expected_type, value)

    def insert_edge(self, edge_type: str, src, dst, attributes: dict | None = None) -> int:
        et = self._etypes.get(edge_type)
        if et is None:
            raise SchemaError(f"unknown edge type: {edge_type}")
        src_ref = self._resolve_endpoint(src, et.from_type)
        dst_ref = self._resolve_endpoint(dst, et.to_type)
        decl = self._eattrs[edge_type]
        checked = {}
        for name, value in (attributes or {}).items():
            if name not in decl:
                raise SchemaError(f"{edge_type} has no attribute {name!r}")
            checked[name] = _check_scalar(decl[name], value)
        with self.lock:
            if not self.has_vertex(src_ref):
                self.upsert_vertex(src_ref.type_name, src_ref.key)
            if not self.has_vertex(dst_ref):
                self.upsert_vertex(dst_ref.type_name, dst_ref.key)
            eid = len(self._edges)
            edge = Edge(eid, edge_type, src_ref, dst_ref, checked)
            self._edges.append(edge)
            self._out.setdefault(src_ref, {}).setdefault(edge_type, []).append(eid)
            self._in.setdefault(dst_ref, {}).setdefault(edge_type, []).append(eid)
            if not et.directed:
                # undirected: both endpoints see the edge from either side
                self._out.setdefault(dst_ref, {}).setdefault(edge_type, []).append(eid)
                self._in.setdefault(src_ref, {}).setdefault(edge_type, []).append(eid)
        return eid

    def edge(self, eid: int) -> Edge:
        return self._edges[eid]

    def edges(self, edge_type: str | None = None) -> Iterator[Edge]:
        for e in self.snapshot_edges(edge_type):
            yield e

    def snapshot_edges(
        self,
        edge_type: str | None = None,
        predicate: Callable[[Edge], bool] | None = None,
    ) -> list[Edge]:
        """Consistent edge list for analytics; taken under the writer lock."""
        if edge_type is not None and edge_type not in self._etypes:
            raise SchemaError(f"unknown edge type: {edge_type}")
        with self.lock:
            es = list(self._edges)
        if edge_type is not None:
            es = [e for e in es if e.edge_type == edge_type]
        if predicate is not None:
            es = [e for e in es if predicate(e)]
        return es

    def edge_count(self, edge_type: str | None = None) -> int:
        if edge_type is None:
            return len(self._edges)
        if edge_type not in self._etypes:
            raise SchemaError(f"unknown edge type: {edge_type}")
        return sum(1 for e in self._edges if e.edge_type == edge_type)

    def _incident_ids(self, ref: VertexRef, edge_type: str, direction: str) -> list[int]:
        if direction not in ("in", "out", "any"):
            raise ValueError(f"direction must be in|out|any, got {direction!r}")
        et = self._etypes.get(edge_type)
        if et is None:
            raise SchemaError(f"unknown edge type: {edge_type}")
        if not self.has_vertex(ref):
            raise UnknownVertexError(f"no vertex {ref.type_name}({ref.key})")
        out_ids = self._out.get(ref, {}).get(edge_type, [])
        in_ids = self._in.get(ref, {}).get(edge_type, [])
        if not et.directed:
            # out and in mirror each other for undirected types
            return list(out_ids)
        if direction == "out":
            return list(out_ids)
        if direction == "in":
            return list(in_ids)
        return list(out_ids) + list(in_ids)

    def degree(self, ref: VertexRef, edge_type: str, direction: str = "any") -> int:
        return len(self._incident_ids(ref, edge_type, direction))

    def incident_edges(self, ref: VertexRef, edge_type: str, direction: str = "any") -> list[Edge]:
        return [self._edges[i] for i in self._incident_ids(ref, edge_type, direction)]

    def neighbors(self, ref: VertexRef, edge_type: str, direction: str = "any") -> list[VertexRef]:
        """Distinct adjacent vertices, in first-seen insertion order."""
        seen: dict[VertexRef, None] = {}
        et = self._etypes[edge_type] if edge_type in self._etypes else None
        for edge in self.incident_edges(ref, edge_type, direction):
            if et is not None and not et.directed:
                other = edge.other(ref)
            elif direction == "out":
                other = edge.dst
            elif direction == "in":
                other = edge.src
            else:
                other = edge.other(ref)
            seen.setdefault(other, None)
        return list(seen.keys())


def invitation_schema() -> GraphSchema:
    """Incentive-campaign account graph: 3 vertex types and 4 edge types."""
    return GraphSchema(
        vertex_types=(
            VertexType("Account", (("phone", "string"), ("reg_time", "timestamp"))),
            VertexType("IMEI", (("imei", "string"),)),
            VertexType("Order", (("order_date", "timestamp"),)),
        ),
        edge_types=(
            EdgeType("use_imei", "Account", "IMEI", directed=False),
            EdgeType("invite", "Account", "Account", directed=True),
            EdgeType("send_bonus", "Account", "Order", directed=True),
            EdgeType("recv_bonus", "Order", "Account", directed=True),
        ),
    )


def risk_graph_schema() -> GraphSchema:
    """Invitation schema plus the undirected shared_ip co-context edge type."""
    base = invitation_schema()
    return GraphSchema(
        vertex_types=base.vertex_types,
        edge_types=base.edge_types
        + (
            EdgeType(
                "shared_ip",
                "Account",
                "Account",
                directed=False,
                attributes=(
                    ("created_at", "timestamp"),
                    ("delta", "integer"),
                    ("value", "string"),
                ),
            ),
        ),
    )
