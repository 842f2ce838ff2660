"""This module contains the inference graph of an instance and everything decided on it:
reachability, bad nodes and items, bad path witnesses and the constructive placement.

Node a_i^s stands for "item i is placed in table s". If the slot vectors of items i and j
in table s intersect, placing one of them in s forces the other into 1-s, giving the edges
a_i^s -> a_j^(1-s) and a_j^s -> a_i^(1-s). A slot vector that repeats a slot gives the edge
a_i^s -> a_i^(1-s), since the item cannot use that table at all.

Internally node a_i^s is the integer 2*i + s, so flipping the side is `u ^ 1`.
"""
import logging
from collections import defaultdict, deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from typing import NamedTuple, cast

from src.cuckooinference.constants import SIDES
from src.cuckooinference.core_model import Instance, Placement
from src.cuckooinference.hash_types import Side

logger = logging.getLogger(__name__)


class NodeId(NamedTuple):
    item: int
    side: Side

    @property
    def index(self) -> int:
        return 2 * self.item + self.side

    def flipped(self) -> "NodeId":
        return NodeId(self.item, cast(Side, 1 - self.side))

    def __str__(self) -> str:
        return f"a_{self.item}^{self.side}"


def _node(index: int) -> NodeId:
    return NodeId(index >> 1, cast(Side, index & 1))


class InferenceGraph:
    """Directed inference graph over the live items of an instance.

    A graph built from a subset of the items, or narrowed with `without`, keeps the
    original item numbering; nodes of the other items are simply absent.
    Instances of this class are never mutated after construction.
    """

    __slots__ = ("_instance", "_adjacency", "_witness", "_live")

    def __init__(
        self,
        instance: Instance,
        adjacency: tuple[tuple[int, ...], ...],
        witness: dict[tuple[int, int], int],
        live: bytes,
    ) -> None:
        self._instance = instance
        self._adjacency = adjacency
        self._witness = witness
        self._live = live

    @property
    def instance(self) -> Instance:
        return self._instance

    def is_live(self, item: int) -> bool:
        return 0 <= item < len(self._live) and bool(self._live[item])

    def live_items(self) -> list[int]:
        return [i for i, alive in enumerate(self._live) if alive]

    def nodes(self) -> Iterator[NodeId]:
        for i in self.live_items():
            yield NodeId(i, 0)
            yield NodeId(i, 1)

    def successors(self, v: NodeId) -> list[NodeId]:
        self._check(v)
        return [_node(u) for u in self._adjacency[v.index] if self._live[u >> 1]]

    def edges(self) -> Iterator[tuple[NodeId, NodeId]]:
        for v in self.nodes():
            for w in self.successors(v):
                yield v, w

    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())

    def has_edge(self, v: NodeId, w: NodeId) -> bool:
        return self.is_live(v.item) and self.is_live(w.item) and w.index in self._adjacency[v.index]

    def shared_slot(self, v: NodeId, w: NodeId) -> int:
        """Smallest slot of table v.side behind the edge v -> w."""
        try:
            return self._witness[v.index, w.index]
        except KeyError:
            msg = f"no edge {v} -> {w}"
            raise ValueError(msg) from None

    def without(self, items: Iterable[int]) -> "InferenceGraph":
        """Residual graph over the remaining items. Edges only depend on the pair of
        items they join, so this equals building the graph of the remaining items."""
        live = bytearray(self._live)
        for i in items:
            live[i] = 0

        return InferenceGraph(self._instance, self._adjacency, self._witness, bytes(live))

    def drop_edge(self, v: NodeId, w: NodeId) -> "InferenceGraph":
        """Copy without one edge. Only useful for testing the cross-checks against a damaged graph."""
        adjacency = list(self._adjacency)
        adjacency[v.index] = tuple(u for u in adjacency[v.index] if u != w.index)
        witness = {e: s for e, s in self._witness.items() if e != (v.index, w.index)}

        return InferenceGraph(self._instance, tuple(adjacency), witness, self._live)

    def _check(self, v: NodeId) -> None:
        if v.side not in SIDES or not self.is_live(v.item):
            msg = f"{v} is not a node of this graph"
            raise ValueError(msg)

    def _reach(self, start: int) -> dict[int, int]:
        """Breadth-first search from start. Maps every reached node to its parent (start -> -1);
        dict order is discovery order."""
        adjacency = self._adjacency
        live = self._live
        parents = {start: -1}
        queue = deque([start])

        while queue:
            u = queue.popleft()
            for w in adjacency[u]:
                if w not in parents and live[w >> 1]:
                    parents[w] = u
                    queue.append(w)

        return parents

    def __repr__(self) -> str:
        return f"InferenceGraph(items={sum(self._live)}, edges={self.edge_count()})"


def build_graph(inst: Instance, items: Iterable[int] | None = None) -> InferenceGraph:
    """Builds the inference graph of inst, or of the given items only, by bucketing
    items by slot per table. Cost is O(nd + E)."""
    n = inst.n
    live_items = range(n) if items is None else sorted(set(items))
    table = inst.slot_table()

    successors: list[set[int]] = [set() for _ in range(2 * n)]
    witness: dict[tuple[int, int], int] = {}

    for side in SIDES:
        buckets: defaultdict[int, list[int]] = defaultdict(list)

        for i in live_items:
            vector = table[i][side]
            distinct = set(vector)
            if len(distinct) < len(vector):
                u = 2 * i + side
                successors[u].add(u ^ 1)
                witness[u, u ^ 1] = min(s for s in distinct if vector.count(s) > 1)

            for slot in distinct:
                buckets[slot].append(i)

        for slot in sorted(buckets):
            members = buckets[slot]
            for i in members:
                u = 2 * i + side
                for j in members:
                    if i != j:
                        w = 2 * j + 1 - side
                        successors[u].add(w)
                        witness.setdefault((u, w), slot)

    live = bytearray(n)
    for i in live_items:
        live[i] = 1

    adjacency = tuple(tuple(sorted(s)) for s in successors)

    return InferenceGraph(inst, adjacency, witness, bytes(live))


def reachable_set(g: InferenceGraph, v: NodeId) -> frozenset[NodeId]:
    """Nodes reachable from v, v included."""
    g._check(v)  # noqa: SLF001
    return frozenset(_node(u) for u in g._reach(v.index))  # noqa: SLF001


def _has_pair(reached: Iterable[int]) -> bool:
    nodes = set(reached)
    return any(u ^ 1 in nodes for u in nodes)


def is_bad_node(g: InferenceGraph, v: NodeId) -> bool:
    """True iff both nodes of some item, possibly v's own, are reachable from v."""
    g._check(v)  # noqa: SLF001
    return _has_pair(g._reach(v.index))  # noqa: SLF001


def is_bad_item(g: InferenceGraph, item: int) -> bool:
    return is_bad_node(g, NodeId(item, 0)) and is_bad_node(g, NodeId(item, 1))


def has_bad_item(g: InferenceGraph) -> bool:
    return any(is_bad_item(g, i) for i in g.live_items())


def bad_nodes(g: InferenceGraph) -> list[NodeId]:
    return [v for v in g.nodes() if is_bad_node(g, v)]


class Hop(NamedTuple):
    source: NodeId
    target: NodeId
    slot: int

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}  (A{self.source.side}[{self.slot}])"


@dataclass(frozen=True)
class BadPathReport:
    """A basic bad path: a simple path from root a_i^s to a_i^(1-s) that visits at most
    one node of every other item. lead_in is a path from the queried node (origin) to root;
    it is just (root,) when the path is rooted at the queried node itself."""

    origin: NodeId
    root: NodeId
    nodes: tuple[NodeId, ...]
    edges: tuple[Hop, ...]
    lead_in: tuple[NodeId, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def rooted_at_origin(self) -> bool:
        return self.root == self.origin

    def describe(self) -> str:
        lines = [f"{self.origin} is bad"]
        if not self.rooted_at_origin:
            lead = " -> ".join(str(v) for v in self.lead_in)
            lines.append(f"  forces {self.root} via {lead}")
        lines.append(f"  basic bad path rooted at {self.root}, {self.length} hop(s):")
        lines.extend(f"    {hop}" for hop in self.edges)

        return "\n".join(lines)


def _tree_path(parents: dict[int, int], target: int) -> list[int]:
    path = [target]
    while parents[path[-1]] != -1:
        path.append(parents[path[-1]])
    path.reverse()

    return path


def _witness_item(parents: dict[int, int], root_item: int) -> int:
    """Picks an item j with both nodes reached such that no other item has both nodes
    on the two tree paths to a_j^0 and a_j^1. Tree paths to nodes on a tree path are its
    prefixes, so every replacement shrinks the paths and the loop ends."""
    order = {u: k for k, u in enumerate(parents)}
    candidates = [u >> 1 for u in parents if u & 1 == 0 and u | 1 in parents]
    j = min(candidates, key=lambda k: max(order[2 * k], order[2 * k + 1]))

    while j != root_item:
        on_paths = set(_tree_path(parents, 2 * j)) | set(_tree_path(parents, 2 * j + 1))
        inner = [u >> 1 for u in on_paths if u & 1 == 0 and u | 1 in on_paths and u >> 1 != j]
        if not inner:
            break
        j = min(inner, key=lambda k: max(order[2 * k], order[2 * k + 1]))

    return j


def _erase_loops(walk: list[int]) -> list[int]:
    path: list[int] = []
    position: dict[int, int] = {}
    for u in walk:
        if u in position:
            cut = position[u]
            for w in path[cut + 1 :]:
                del position[w]
            del path[cut + 1 :]
        else:
            position[u] = len(path)
            path.append(u)

    return path


def _innermost_pair(path: list[int]) -> tuple[int, int]:
    """Positions s < t holding both nodes of one item, with t - s minimal."""
    last: dict[int, int] = {}
    best = (0, len(path) - 1)
    for t, u in enumerate(path):
        item = u >> 1
        if item in last and t - last[item] < best[1] - best[0]:
            best = (last[item], t)
        last[item] = t

    return best


def find_basic_bad_path(g: InferenceGraph, v: NodeId) -> BadPathReport | None:
    """Returns a basic bad path witnessing that v is bad, or None when v is not bad.

    Follows the path reversal argument: pick a reached pair a_j^0, a_j^1 with no other
    complete pair on the paths to it, then join v ~> a_j^s with the mirror of v ~> a_j^(1-s)
    (reversed, every side flipped), which ends at a_i^(1-s). When the two paths share a
    prefix the joined path repeats those items, and the innermost repeated pair is reported
    instead, reached from v through lead_in.
    """
    g._check(v)  # noqa: SLF001
    start = v.index
    parents = g._reach(start)  # noqa: SLF001
    if not _has_pair(parents):
        return None

    j = _witness_item(parents, v.item)
    if j == v.item:
        walk = _tree_path(parents, start ^ 1)
    else:
        forward = _tree_path(parents, 2 * j + v.side)
        mirrored = [u ^ 1 for u in reversed(_tree_path(parents, 2 * j + 1 - v.side))]
        walk = forward + mirrored[1:]

    for a, b in zip(walk, walk[1:], strict=False):
        if not g.has_edge(_node(a), _node(b)):
            msg = f"mirror hop {_node(a)} -> {_node(b)} is missing; the graph is not edge-symmetric"
            raise RuntimeError(msg)

    path = _erase_loops(walk)
    s, t = _innermost_pair(path)
    nodes = tuple(_node(u) for u in path[s : t + 1])
    hops = tuple(Hop(a, b, g.shared_slot(a, b)) for a, b in zip(nodes, nodes[1:], strict=False))

    return BadPathReport(
        origin=v,
        root=nodes[0],
        nodes=nodes,
        edges=hops,
        lead_in=tuple(_node(u) for u in path[: s + 1]),
    )


def shortest_bad_path(g: InferenceGraph, v: NodeId) -> tuple[NodeId, ...] | None:
    """Shortest path from v to its flipped node, which exists exactly when v is bad.
    The path is simple but need not be basic."""
    g._check(v)  # noqa: SLF001
    parents = g._reach(v.index)  # noqa: SLF001
    if v.index ^ 1 not in parents:
        return None

    return tuple(_node(u) for u in _tree_path(parents, v.index ^ 1))


def place_from(g: InferenceGraph, v: NodeId) -> Placement:
    """Places item v.item in table v.side and every item forced by it: item j goes to
    table s for each reachable a_j^s. Legal among those items whenever v is not bad."""
    g._check(v)  # noqa: SLF001
    parents = g._reach(v.index)  # noqa: SLF001
    if _has_pair(parents):
        msg = f"cannot place from bad node {v}"
        raise RuntimeError(msg)

    return Placement({u >> 1: cast(Side, u & 1) for u in parents})


def place_all(inst: Instance, *, graph: InferenceGraph | None = None, rebuild: bool = False) -> Placement | None:
    """Places every item, or returns None when some item is bad.

    Scans unplaced items in index order, places from the first non-bad side (side 0 first)
    in the residual graph of the unplaced items, and repeats. With rebuild the residual graph
    is rebuilt from scratch each round instead of narrowed. Each round is checked against the
    slots already taken; a clash means the graph does not match the instance.
    """
    residual = graph if graph is not None else build_graph(inst)
    sides: dict[int, Side] = {}
    occupied: dict[tuple[int, int], int] = {}
    rounds = 0

    for i in range(inst.n):
        if i in sides:
            continue

        for side in SIDES:
            reached = residual._reach(2 * i + side)  # noqa: SLF001
            if not _has_pair(reached):
                break
        else:
            logger.debug("item %d is bad after %d rounds, no legal placement", i, rounds)
            return None

        placed = {u >> 1: cast(Side, u & 1) for u in reached}
        for item, s in placed.items():
            for slot in inst.slots(item, s):
                if (s, slot) in occupied:
                    msg = f"item {item} clashes with placed item {occupied[s, slot]} at A{s}[{slot}]"
                    raise RuntimeError(msg)
                occupied[s, slot] = item

        sides.update(placed)
        rounds += 1

        if rebuild:
            residual = build_graph(inst, [j for j in range(inst.n) if j not in sides])
        else:
            residual = residual.without(placed)

    logger.debug("placed %d items in %d rounds", inst.n, rounds)

    return Placement(sides)
