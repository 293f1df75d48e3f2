"""Graphs of groups: underlying graph with edge involution, attached groups,
edge monomorphisms, spanning data, elementary collapses and the
non-elementarity decision.

Oriented edges are integers: the unoriented edge ``k`` carries orientations
``2k`` (forward, as written in the DSL) and ``2k+1`` (reverse), so
``bar(y) == y ^ 1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .backends import FINITE, Elem, GroupBackend
from .errors import (
    EdgeIsLoop,
    EmbeddingNotInjective,
    GraphDisconnected,
    NotIsomorphism,
)
from .groups import FiniteGroup, Monomorphism, check_monomorphism


def bar(y: int) -> int:
    return y ^ 1


@dataclass(frozen=True)
class Graph:
    """Finite graph with explicit edge involution; loops and parallel edges allowed."""

    vertex_names: tuple[str, ...]
    edge_names: tuple[str, ...]          # unoriented edge names
    alpha: tuple[int, ...]               # oriented edge -> initial vertex
    omega: tuple[int, ...]               # oriented edge -> final vertex

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_names)

    @property
    def n_edges(self) -> int:
        return len(self.edge_names)

    def oriented_edges(self) -> range:
        return range(2 * self.n_edges)

    def unoriented(self, y: int) -> int:
        return y // 2

    def is_loop(self, y: int) -> bool:
        return self.alpha[y] == self.omega[y]

    def oriented_name(self, y: int) -> str:
        base = self.edge_names[y // 2]
        return base if y % 2 == 0 else f"~{base}"

    def incident_into(self, v: int) -> list[int]:
        """Oriented edges y with omega(y) == v, in id order."""
        return [y for y in self.oriented_edges() if self.omega[y] == v]

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for y in self.oriented_edges():
                if self.alpha[y] == v and self.omega[y] not in seen:
                    seen.add(self.omega[y])
                    queue.append(self.omega[y])
        return len(seen) == self.n_vertices


def build_graph(vertex_names: list[str], edges: list[tuple[str, str, str]]) -> Graph:
    """edges: (edge_name, left_vertex, right_vertex); orientation 2k runs left->right."""
    vidx = {name: i for i, name in enumerate(vertex_names)}
    alpha: list[int] = []
    omega: list[int] = []
    for _, a, b in edges:
        alpha += [vidx[a], vidx[b]]
        omega += [vidx[b], vidx[a]]
    return Graph(
        vertex_names=tuple(vertex_names),
        edge_names=tuple(name for name, _, _ in edges),
        alpha=tuple(alpha),
        omega=tuple(omega),
    )


class EdgeEmbedding:
    """Monomorphism of a finite edge group into a vertex-group backend.

    For finite targets this wraps a :class:`Monomorphism` and precomputes the
    right-coset decomposition g = i(h) * rep used by normal forms.  Backends
    (Z^n, F_n) are torsion-free, so only the trivial edge group embeds there.
    """

    def __init__(self, edge_group: FiniteGroup, target: GroupBackend,
                 mono: Monomorphism | None):
        self.edge_group = edge_group
        self.target = target
        self.mono = mono
        if target.kind == FINITE:
            assert mono is not None
            G = target.finite
            self._image = frozenset(mono.map)
            self._pre = mono.inverse_on_image()
            # right cosets im*g: rep = least-index element of the coset
            rep = [0] * G.order
            for g in G.elements():
                rep[g] = min(G.mul(m, g) for m in mono.map)
            self._rcoset_rep = tuple(rep)
            # left cosets g*im: canonical reps in index order (for star enumeration)
            seen: set[int] = set()
            lreps: list[int] = []
            for g in G.elements():
                if g in seen:
                    continue
                coset = {G.mul(g, m) for m in mono.map}
                lreps.append(min(coset))
                seen.update(coset)
            self._lcoset_reps = tuple(sorted(lreps))
        else:
            if edge_group.order != 1:
                raise EmbeddingNotInjective(
                    "only the trivial group embeds into a torsion-free backend"
                )

    def apply(self, h: int) -> Elem:
        if self.target.kind == FINITE:
            return self.mono.apply(h)
        return self.target.identity()

    def image_elements(self) -> list[Elem]:
        if self.target.kind == FINITE:
            return sorted(self._image)
        return [self.target.identity()]

    def contains(self, g: Elem) -> bool:
        if self.target.kind == FINITE:
            return g in self._image
        return self.target.is_identity(g)

    def preimage(self, g: Elem) -> int:
        if self.target.kind == FINITE:
            return self._pre[g]
        return self.edge_group.identity_index

    def index_in_target(self) -> int | None:
        """[G_v : im]; None when the target is infinite."""
        if self.target.kind == FINITE:
            return self.target.finite.order // self.edge_group.order
        return None

    def right_decompose(self, g: Elem) -> tuple[int, Elem]:
        """g = apply(h) * r with r the canonical right-coset representative."""
        if self.target.kind == FINITE:
            G = self.target.finite
            r = self._rcoset_rep[g]
            h = self._pre[G.mul(g, G.inv(r))]
            return h, r
        return self.edge_group.identity_index, g

    def is_canonical_rep(self, g: Elem) -> bool:
        if self.target.kind == FINITE:
            return self._rcoset_rep[g] == g
        return True

    def left_coset_reps(self) -> tuple[int, ...]:
        """Finite targets only: canonical reps of the cosets g*im, sorted."""
        return self._lcoset_reps


@dataclass(frozen=True)
class GraphOfGroups:
    graph: Graph
    vertex_groups: tuple[GroupBackend, ...]
    edge_groups: tuple[FiniteGroup, ...]          # per unoriented edge
    embeddings: tuple[EdgeEmbedding, ...]          # per oriented edge, into omega(y)
    generating_sets: tuple[tuple[tuple[str, Elem], ...], ...]  # per vertex: (label, elem)

    def vertex_group(self, v: int) -> GroupBackend:
        return self.vertex_groups[v]

    def edge_group(self, y: int) -> FiniteGroup:
        return self.edge_groups[y // 2]

    def embedding(self, y: int) -> EdgeEmbedding:
        return self.embeddings[y]

    @property
    def all_edge_groups_trivial(self) -> bool:
        return all(g.order == 1 for g in self.edge_groups)

    def has_infinite_vertex_group(self) -> bool:
        return any(not g.is_finite for g in self.vertex_groups)


@dataclass(frozen=True)
class SpanningData:
    """A BFS spanning tree plus the Bass-Serre orientation A."""

    root: int
    tree_edges: frozenset[int]        # unoriented ids
    orientation: frozenset[int]       # oriented ids, one per unoriented pair
    parent_edge: tuple[int, ...]      # per vertex: oriented tree edge into it (root: -1)
    bfs_vertices: tuple[int, ...]

    def in_tree(self, y: int) -> bool:
        return (y // 2) in self.tree_edges

    def tree_path(self, g: Graph, v: int) -> list[int]:
        """Oriented tree edges from the root to v."""
        path: list[int] = []
        while v != self.root:
            y = self.parent_edge[v]
            path.append(y)
            v = g.alpha[y]
        path.reverse()
        return path


def spanning_tree(gog: GraphOfGroups, root: int = 0) -> SpanningData:
    """BFS spanning tree from ``root``, ties broken by edge id order.

    Orientation A: tree edges point away from the root; for non-tree pairs the
    lesser oriented id (the DSL forward orientation) is chosen.
    """
    g = gog.graph
    if not g.is_connected():
        raise GraphDisconnected("underlying graph is not connected")
    parent_edge = [-1] * g.n_vertices
    seen = {root}
    order = [root]
    queue = deque([root])
    tree: set[int] = set()
    while queue:
        v = queue.popleft()
        for y in g.oriented_edges():
            if g.alpha[y] == v and g.omega[y] not in seen:
                w = g.omega[y]
                seen.add(w)
                order.append(w)
                parent_edge[w] = y
                tree.add(y // 2)
                queue.append(w)
    orientation: set[int] = set()
    for k in range(g.n_edges):
        if k in tree:
            fwd = 2 * k if parent_edge[g.omega[2 * k]] == 2 * k else 2 * k + 1
            orientation.add(fwd)
        else:
            orientation.add(2 * k)
    return SpanningData(
        root=root,
        tree_edges=frozenset(tree),
        orientation=frozenset(orientation),
        parent_edge=tuple(parent_edge),
        bfs_vertices=tuple(order),
    )


def elementary_collapse(gog: GraphOfGroups, edge_name: str) -> GraphOfGroups:
    """Contract a non-loop edge whose forward embedding i_y is an isomorphism.

    The collapsed vertex keeps the alpha-side group; embeddings formerly
    landing in G_{omega(y)} are transported by i_{bar y} o i_y^{-1}.
    """
    g = gog.graph
    k = g.edge_names.index(edge_name)
    y = 2 * k
    if g.is_loop(y):
        raise EdgeIsLoop(f"edge {edge_name} is a loop")
    emb_fwd = gog.embedding(y)
    target = gog.vertex_group(g.omega[y])
    if not (target.kind == FINITE and emb_fwd.edge_group.order == target.finite.order):
        raise NotIsomorphism(
            f"i_{edge_name} is not an isomorphism onto the vertex group of "
            f"{g.vertex_names[g.omega[y]]}"
        )

    va, vo = g.alpha[y], g.omega[y]
    # transport G_{omega(y)} -> G_{alpha(y)}
    inv_fwd = emb_fwd.mono.inverse_on_image()
    emb_bwd = gog.embedding(y + 1)

    def transport(elem: int) -> Elem:
        return emb_bwd.apply(inv_fwd[elem])

    keep_vertices = [v for v in range(g.n_vertices) if v != vo]
    new_names = [g.vertex_names[v] for v in keep_vertices]
    remap = {v: i for i, v in enumerate(keep_vertices)}
    remap[vo] = remap[va]

    new_edges: list[tuple[str, str, str]] = []
    kept_unoriented: list[int] = []
    for j in range(g.n_edges):
        if j == k:
            continue
        kept_unoriented.append(j)
        a, b = g.alpha[2 * j], g.omega[2 * j]
        new_edges.append((g.edge_names[j], new_names[remap[a]], new_names[remap[b]]))
    new_graph = build_graph(new_names, new_edges)

    new_vgroups = tuple(gog.vertex_groups[v] for v in keep_vertices)
    new_egroups = tuple(gog.edge_groups[j] for j in kept_unoriented)

    new_embs: list[EdgeEmbedding] = []
    for j in kept_unoriented:
        for orient in (2 * j, 2 * j + 1):
            old = gog.embedding(orient)
            if gog.graph.omega[orient] == vo:
                # post-compose with the transport into G_{alpha(y)}
                tgt = gog.vertex_group(va)
                if tgt.kind == FINITE:
                    mapped = tuple(transport(old.mono.apply(h))
                                   for h in old.edge_group.elements())
                    mono = check_monomorphism(old.edge_group, tgt.finite, mapped)
                    new_embs.append(EdgeEmbedding(old.edge_group, tgt, mono))
                else:
                    new_embs.append(EdgeEmbedding(old.edge_group, tgt, None))
            else:
                new_embs.append(old)

    new_gens = tuple(gog.generating_sets[v] for v in keep_vertices)
    return GraphOfGroups(
        graph=new_graph,
        vertex_groups=new_vgroups,
        edge_groups=new_egroups,
        embeddings=tuple(new_embs),
        generating_sets=new_gens,
    )


# --- non-elementarity -------------------------------------------------------

@dataclass(frozen=True)
class NonElementary:
    verdict: str = "NonElementary"


@dataclass(frozen=True)
class SimplyElementary:
    case: int
    verdict: str = "SimplyElementary"


@dataclass(frozen=True)
class ReducesTo:
    case: int
    sequence: tuple[str, ...]
    verdict: str = "ReducesTo"


def _simply_elementary_case(gog: GraphOfGroups) -> int | None:
    g = gog.graph
    if g.n_vertices == 1 and g.n_edges == 0:
        return 1
    if g.n_vertices == 2 and g.n_edges == 1 and not g.is_loop(0):
        if gog.embedding(0).index_in_target() == 2 and gog.embedding(1).index_in_target() == 2:
            return 2
    if g.n_vertices == 1 and g.n_edges == 1 and g.is_loop(0):
        fwd, bwd = gog.embedding(0), gog.embedding(1)
        if fwd.index_in_target() == 1 and bwd.index_in_target() == 1:
            return 3
    return None


def _collapsible_edges(gog: GraphOfGroups) -> list[str]:
    g = gog.graph
    out = []
    for k in range(g.n_edges):
        for y in (2 * k, 2 * k + 1):
            if g.is_loop(y):
                continue
            if gog.embedding(y).index_in_target() == 1:
                out.append(g.oriented_name(y))
    return out


def _collapse_oriented(gog: GraphOfGroups, name: str) -> GraphOfGroups:
    """Collapse along either orientation; ``~name`` collapses the reverse."""
    if name.startswith("~"):
        base = name[1:]
        flipped = _flip_edge(gog, base)
        return elementary_collapse(flipped, base)
    return elementary_collapse(gog, name)


def _flip_edge(gog: GraphOfGroups, edge_name: str) -> GraphOfGroups:
    """Rebuild the gog with one edge written in the opposite direction."""
    g = gog.graph
    k = g.edge_names.index(edge_name)
    edges = []
    for j in range(g.n_edges):
        a = g.vertex_names[g.alpha[2 * j]]
        b = g.vertex_names[g.omega[2 * j]]
        edges.append((g.edge_names[j], b, a) if j == k else (g.edge_names[j], a, b))
    new_graph = build_graph(list(g.vertex_names), edges)
    embs = list(gog.embeddings)
    embs[2 * k], embs[2 * k + 1] = embs[2 * k + 1], embs[2 * k]
    return GraphOfGroups(
        graph=new_graph,
        vertex_groups=gog.vertex_groups,
        edge_groups=gog.edge_groups,
        embeddings=tuple(embs),
        generating_sets=gog.generating_sets,
    )


def is_non_elementary(gog: GraphOfGroups):
    """Decide non-elementarity by exhaustive search over collapse sequences.

    Each collapse removes an edge, so the search tree has depth <= |edges|.
    Returns NonElementary, SimplyElementary(case), or ReducesTo(case, sequence).
    """
    case = _simply_elementary_case(gog)
    if case is not None:
        return SimplyElementary(case)

    def search(current: GraphOfGroups) -> tuple[int, tuple[str, ...]] | None:
        for name in _collapsible_edges(current):
            collapsed = _collapse_oriented(current, name)
            c = _simply_elementary_case(collapsed)
            if c is not None:
                return c, (name,)
            deeper = search(collapsed)
            if deeper is not None:
                c2, seq = deeper
                return c2, (name,) + seq
        return None

    found = search(gog)
    if found is None:
        return NonElementary()
    case2, seq = found
    return ReducesTo(case2, seq)
