"""Ordered network ("circle plot") built from segment start/stop events.

Distinct event timestamps become nodes; each segment contributes one edge
from its start node to its stop node, weighted by its largest magnitude.
Maximal groups of interleaved segments are N-components; each maps to a
tied, non-negative walk (the open-segment count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .core import US_PER_DAY
from .disloc import DislocationSegment

NODES_CSV_HEADER = "index,ts_us,starts,stops,ray,pos_in_ray,angle"
EDGES_CSV_HEADER = "i,j,weight_e4,count"
COMPONENTS_CSV_HEADER = "component_id,node_indices,walk_steps"

NODES_PER_RAY = 10


@dataclass(slots=True)
class EventNode:
    index: int
    ts: int
    starts: int = 0
    stops: int = 0


@dataclass(slots=True)
class Edge:
    weight: int = 0     # sum of per-segment max(|min_dp|, |max_dp|)
    count: int = 0


@dataclass
class OrderedNetwork:
    nodes: list[EventNode] = field(default_factory=list)
    edges: dict[tuple[int, int], Edge] = field(default_factory=dict)

    def total_edge_weight(self) -> int:
        return sum(e.weight for e in self.edges.values())


@dataclass(slots=True)
class Component:
    id: int
    node_indices: list[int]


@dataclass(slots=True)
class TiedWalk:
    steps: list[int]

    @property
    def values(self) -> list[int]:
        out = [0]
        for step in self.steps:
            out.append(out[-1] + step)
        return out

    @property
    def tied(self) -> bool:
        return self.values[-1] == 0

    @property
    def non_negative(self) -> bool:
        return all(v >= 0 for v in self.values)


@dataclass(slots=True)
class LayoutRow:
    index: int
    ts: int
    starts: int
    stops: int
    ray: int
    pos_in_ray: int
    angle: float


def build(segments: Iterable[DislocationSegment],
          modulo_day: bool = False) -> OrderedNetwork:
    """Aggregate segments into nodes and weighted edges.

    ``modulo_day`` maps timestamps to time of day first, merging nodes at
    identical microseconds across days.
    """
    endpoints: list[tuple[int, int, int]] = []  # (start_ts, stop_ts, weight)
    for seg in segments:
        start, stop = seg.start, seg.end
        if modulo_day:
            start %= US_PER_DAY
            stop %= US_PER_DAY
        endpoints.append((start, stop, seg.max_mag))

    stamps = sorted({ts for a, b, _ in endpoints for ts in (a, b)})
    index_of = {ts: i for i, ts in enumerate(stamps)}
    net = OrderedNetwork(nodes=[EventNode(index=i, ts=ts) for i, ts in enumerate(stamps)])
    for start, stop, weight in endpoints:
        i, j = index_of[start], index_of[stop]
        net.nodes[i].starts += 1
        net.nodes[j].stops += 1
        edge = net.edges.setdefault((i, j), Edge())
        edge.weight += weight
        edge.count += 1
    return net


def components(net: OrderedNetwork) -> list[Component]:
    """Split nodes into N-components.

    A component closes at the node where the running open-segment count
    returns to zero; the next node with activity opens a new one.
    """
    out: list[Component] = []
    current: list[int] = []
    open_count = 0
    for node in net.nodes:
        current.append(node.index)
        open_count += node.starts - node.stops
        if open_count == 0:
            out.append(Component(id=len(out), node_indices=current))
            current = []
    if current:     # only possible on malformed input (stop without start)
        out.append(Component(id=len(out), node_indices=current))
    return out


def walk(net: OrderedNetwork, component: Component) -> TiedWalk:
    """Net step at each node of the component: +starts then −stops."""
    return TiedWalk(steps=[net.nodes[i].starts - net.nodes[i].stops
                           for i in component.node_indices])


def renormalize(net: OrderedNetwork, mode: str = "event_space") -> list[LayoutRow]:
    """Node coordinates for the circle plot.

    Nodes are placed on rays of ``NODES_PER_RAY``: node index k sits at
    position k mod 10 along ray k // 10.  ``event_space`` spreads rays
    uniformly; ``real_time`` sets each node's angle proportional to its
    time of day.
    """
    if mode not in ("event_space", "real_time"):
        raise ValueError(f"unknown layout mode {mode!r}")
    num_rays = max(1, math.ceil(len(net.nodes) / NODES_PER_RAY))
    rows: list[LayoutRow] = []
    for node in net.nodes:
        ray, pos = divmod(node.index, NODES_PER_RAY)
        if mode == "event_space":
            angle = 2 * math.pi * ray / num_rays
        else:
            angle = 2 * math.pi * (node.ts % US_PER_DAY) / US_PER_DAY
        rows.append(LayoutRow(index=node.index, ts=node.ts, starts=node.starts,
                              stops=node.stops, ray=ray, pos_in_ray=pos, angle=angle))
    return rows


# -- CSV exports -------------------------------------------------------------

def nodes_csv_rows(layout: Sequence[LayoutRow]) -> Iterator[str]:
    for row in layout:
        yield (f"{row.index},{row.ts},{row.starts},{row.stops},"
               f"{row.ray},{row.pos_in_ray},{row.angle:.9f}")


def edges_csv_rows(net: OrderedNetwork) -> Iterator[str]:
    for (i, j), edge in sorted(net.edges.items()):
        yield f"{i},{j},{edge.weight},{edge.count}"


def components_csv_rows(net: OrderedNetwork,
                        comps: Optional[Sequence[Component]] = None) -> Iterator[str]:
    if comps is None:
        comps = components(net)
    for comp in comps:
        indices = ";".join(str(i) for i in comp.node_indices)
        steps = ";".join(str(s) for s in walk(net, comp).steps)
        yield f"{comp.id},{indices},{steps}"
