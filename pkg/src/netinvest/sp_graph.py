"""Series-parallel technology graphs stored as decomposition trees.

A tree is built from three node types: :class:`Edge` leaves and n-ary
:class:`Series` / :class:`Parallel` compositions.  The two terminals are
implicit, so every tree is a valid two-terminal series-parallel graph.

Hot numerical code does not walk the node objects; it works on the
post-order arrays of :class:`FlatTree` (see :func:`flatten`).
"""
from __future__ import annotations

import itertools
import json
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ArityError, DuplicateEdgeId, TreeSyntaxError, UnknownEdge

DEFAULT_PATH_CAP = 4096

EDGE, SERIES, PARALLEL = 0, 1, 2


@dataclass(frozen=True)
class Edge:
    id: str
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)


@dataclass(frozen=True)
class Series:
    children: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ArityError(f"series composition needs >= 2 children, got {len(self.children)}")


@dataclass(frozen=True)
class Parallel:
    children: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ArityError(f"parallel composition needs >= 2 children, got {len(self.children)}")


SPTree = Union[Edge, Series, Parallel]


def edge(edge_id: str) -> Edge:
    return Edge(str(edge_id))


def series(*children: SPTree) -> Series:
    return Series(children)


def parallel(*children: SPTree) -> Parallel:
    return Parallel(children)


def path_tree(k: int, prefix: str = "e") -> SPTree:
    """A single s-t path with ``k`` edges (the canonical reduced game)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return Edge(f"{prefix}1")
    return Series(tuple(Edge(f"{prefix}{j}") for j in range(1, k + 1)))


def iter_edges(tree: SPTree) -> Iterator[Edge]:
    if isinstance(tree, Edge):
        yield tree
    else:
        for child in tree.children:
            yield from iter_edges(child)


def edge_ids(tree: SPTree) -> tuple[str, ...]:
    """Edge ids in left-to-right order; raises on duplicates."""
    ids = tuple(e.id for e in iter_edges(tree))
    if len(set(ids)) != len(ids):
        seen = set()
        for i in ids:
            if i in seen:
                raise DuplicateEdgeId(f"edge id {i!r} occurs more than once")
            seen.add(i)
    return ids


# ---------------------------------------------------------------------------
# instance-format (de)serialization

def parse_tree(obj) -> SPTree:
    """Build a tree from the nested ``{"op": ...}`` object (or its JSON text)."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise TreeSyntaxError(f"invalid JSON: {exc}") from exc
    tree = _parse_node(obj, "$")
    edge_ids(tree)
    return tree


def _parse_node(obj, where: str) -> SPTree:
    if not isinstance(obj, Mapping):
        raise TreeSyntaxError(f"{where}: expected an object, got {type(obj).__name__}")
    op = obj.get("op")
    if op == "edge":
        eid = obj.get("id")
        if not isinstance(eid, str) or not eid:
            raise TreeSyntaxError(f"{where}: edge needs a non-empty string 'id'")
        return Edge(eid)
    if op in ("series", "parallel"):
        children = obj.get("children")
        if not isinstance(children, list):
            raise TreeSyntaxError(f"{where}: {op} needs a 'children' list")
        nodes = tuple(_parse_node(c, f"{where}.children[{j}]") for j, c in enumerate(children))
        if len(nodes) < 2:
            raise ArityError(f"{where}: {op} composition needs >= 2 children, got {len(nodes)}")
        return Series(nodes) if op == "series" else Parallel(nodes)
    raise TreeSyntaxError(f"{where}: unknown op {op!r}")


def to_dict(tree: SPTree) -> dict:
    if isinstance(tree, Edge):
        return {"op": "edge", "id": tree.id}
    op = "series" if isinstance(tree, Series) else "parallel"
    return {"op": op, "children": [to_dict(c) for c in tree.children]}


# ---------------------------------------------------------------------------
# structural queries

def shortest_path_length(tree: SPTree) -> int:
    """Minimum number of edges over all s-t paths."""
    if isinstance(tree, Edge):
        return 1
    lengths = [shortest_path_length(c) for c in tree.children]
    return sum(lengths) if isinstance(tree, Series) else min(lengths)


def count_paths(tree: SPTree) -> int:
    if isinstance(tree, Edge):
        return 1
    counts = [count_paths(c) for c in tree.children]
    if isinstance(tree, Series):
        out = 1
        for c in counts:
            out *= c
        return out
    return sum(counts)


def prune_relevant(tree: SPTree, b: Mapping[str, float]) -> SPTree | None:
    """Keep exactly the edges lying on some s-t path with all-positive investment.

    Returns ``None`` if no such path exists.  A parallel block left with a
    single survivor collapses to that survivor, so the result is again a
    valid tree.
    """
    if isinstance(tree, Edge):
        return tree if b.get(tree.id, 0.0) > 0 else None
    kept = [prune_relevant(c, b) for c in tree.children]
    if isinstance(tree, Series):
        if any(k is None for k in kept):
            return None
        return Series(tuple(kept))
    kept = [k for k in kept if k is not None]
    if not kept:
        return None
    if len(kept) == 1:
        return kept[0]
    return Parallel(tuple(kept))


@dataclass(frozen=True)
class PathSet:
    paths: tuple[tuple[str, ...], ...]
    truncated: bool

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def _gen_paths(tree: SPTree, shortest_only: bool) -> Iterator[tuple[str, ...]]:
    if isinstance(tree, Edge):
        yield (tree.id,)
        return
    if isinstance(tree, Parallel):
        children = tree.children
        if shortest_only:
            lens = [shortest_path_length(c) for c in children]
            m = min(lens)
            children = [c for c, L in zip(children, lens) if L == m]
        for c in children:
            yield from _gen_paths(c, shortest_only)
        return
    yield from _gen_series(tree.children, shortest_only)


def _gen_series(children, shortest_only):
    if len(children) == 1:
        yield from _gen_paths(children[0], shortest_only)
        return
    for head in _gen_paths(children[0], shortest_only):
        for rest in _gen_series(children[1:], shortest_only):
            yield head + rest


def enumerate_paths(tree: SPTree, cap: int = DEFAULT_PATH_CAP) -> PathSet:
    """All simple s-t paths as edge-id tuples, at most ``cap`` of them."""
    if cap < 1:
        raise ValueError("cap must be positive")
    paths = tuple(itertools.islice(_gen_paths(tree, False), cap + 1))
    return PathSet(paths[:cap], len(paths) > cap)


def enumerate_shortest_paths(tree: SPTree, cap: int = DEFAULT_PATH_CAP) -> PathSet:
    if cap < 1:
        raise ValueError("cap must be positive")
    paths = tuple(itertools.islice(_gen_paths(tree, True), cap + 1))
    return PathSet(paths[:cap], len(paths) > cap)


def one_shortest_path(tree: SPTree) -> tuple[str, ...]:
    """The leftmost minimum-edge-count path."""
    if isinstance(tree, Edge):
        return (tree.id,)
    if isinstance(tree, Series):
        return tuple(itertools.chain.from_iterable(one_shortest_path(c) for c in tree.children))
    best = min(tree.children, key=shortest_path_length)
    return one_shortest_path(best)


# ---------------------------------------------------------------------------
# flat post-order form consumed by the kernels

@dataclass(frozen=True, eq=False)
class FlatTree:
    """Post-order array encoding of a tree.

    Node ``v``'s children are ``children[child_ptr[v]:child_ptr[v+1]]`` and
    always have smaller indices than ``v``; the root is the last node.
    """

    edge_ids: tuple[str, ...]
    index: dict
    kind: np.ndarray
    child_ptr: np.ndarray
    children: np.ndarray
    edge_slot: np.ndarray
    nodes: tuple
    node_edges: tuple
    length: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    def child_list(self, v: int) -> list[int]:
        return self.children[self.child_ptr[v]:self.child_ptr[v + 1]].tolist()

    def vector(self, b: Mapping[str, float] | np.ndarray) -> np.ndarray:
        """Edge-indexed float vector from a mapping (missing ids count as 0)."""
        if isinstance(b, np.ndarray):
            if b.shape != (self.n_edges,):
                raise ValueError(f"expected shape ({self.n_edges},), got {b.shape}")
            return b.astype(float, copy=False)
        out = np.zeros(self.n_edges)
        for eid, val in b.items():
            try:
                out[self.index[eid]] = val
            except KeyError:
                raise UnknownEdge(f"unknown edge id {eid!r}") from None
        return out


def flatten(tree: SPTree) -> FlatTree:
    cached = tree._cache.get("flat")
    if cached is not None:
        return cached
    ids = edge_ids(tree)
    index = {e: j for j, e in enumerate(ids)}
    kinds, ptr, kids, slots, nodes, node_edges, lengths = [], [0], [], [], [], [], []

    def visit(node) -> int:
        if isinstance(node, Edge):
            child_idx = []
            kinds.append(EDGE)
            slots.append(index[node.id])
            node_edges.append(np.array([index[node.id]], dtype=np.int32))
            lengths.append(1)
        else:
            child_idx = [visit(c) for c in node.children]
            kinds.append(SERIES if isinstance(node, Series) else PARALLEL)
            slots.append(-1)
            node_edges.append(np.concatenate([node_edges[c] for c in child_idx]))
            sub = [lengths[c] for c in child_idx]
            lengths.append(sum(sub) if isinstance(node, Series) else min(sub))
        kids.extend(child_idx)
        ptr.append(len(kids))
        nodes.append(node)
        return len(nodes) - 1

    visit(tree)
    flat = FlatTree(
        edge_ids=ids,
        index=index,
        kind=np.array(kinds, dtype=np.int32),
        child_ptr=np.array(ptr, dtype=np.int32),
        children=np.array(kids, dtype=np.int32),
        edge_slot=np.array(slots, dtype=np.int32),
        nodes=tuple(nodes),
        node_edges=tuple(node_edges),
        length=np.array(lengths, dtype=np.int64),
    )
    tree._cache["flat"] = flat
    return flat


# ---------------------------------------------------------------------------
# random instances for property tests and verification runs

def random_tree(rng: np.random.Generator, max_paths: int = 8, max_depth: int = 4,
                leaf_prob: float = 0.35, max_arity: int = 3) -> SPTree:
    """Random tree with at most ``max_paths`` s-t paths; edge ids e0, e1, ..."""
    while True:
        counter = itertools.count()

        def grow(depth):
            if depth >= max_depth or (depth > 0 and rng.random() < leaf_prob):
                return Edge(f"e{next(counter)}")
            arity = int(rng.integers(2, max_arity + 1))
            kids = tuple(grow(depth + 1) for _ in range(arity))
            return Series(kids) if rng.random() < 0.5 else Parallel(kids)

        tree = grow(0)
        if count_paths(tree) <= max_paths:
            return tree
