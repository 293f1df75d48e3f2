"""Depth-d approximations of the Bass-Serre tree boundary, limit-set proxies,
branch/vertex direction classification, and the dense-amalgam checker.

The boundary approximation at depth d is the set of immersed length-d edge
paths from the root; in a tree these are exactly the geodesics to depth-d
vertices.  The visual metric is 2^(-split) with split the common prefix
length, an ultrametric.

Limit sets of infinite vertex-group cosets have no faithful image among tree
branches (their orbits stay tree-close to the fixed coset vertex), so the
toolkit uses a declared finite-depth proxy: for a coset vertex C with a
truncated infinite star, the member consists of one witness branch per
"escaping" star edge (top shortlex band of the budgeted parameters), each
continued by the canonical tame descent (smallest non-escaping parameter at
every later vertex).  Escaping exits model orbit sequences leaving through
ever-fresh star edges, which is how vertex points arise as limits; the tame
continuation never exits freshly again, so distinct cosets own disjoint
packets.  Packet diameters are 2^(-depth(C)), which yields the nullness
scaling checked by (a2).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bass_serre import TreeBall, TreeBallConfig
from .errors import DepthTooSmall
from .fundgroup import FundamentalGroup, NormalForm


@dataclass(frozen=True)
class Branch:
    """A depth-d geodesic from the root: vertex ids and edge ids along it."""

    leaf: int
    vids: tuple[int, ...]     # length d+1, root first
    eids: tuple[int, ...]     # length d


class BoundaryApprox:
    """All depth-d branches with the visual ultrametric and clopen basis."""

    def __init__(self, tree: TreeBall, depth: int):
        self.tree = tree
        self.depth = depth
        branches = []
        for v in tree.vertices:
            if v.depth != depth:
                continue
            eids = tree.root_path(v.vid)
            vids = [0]
            for e in eids:
                vids.append(tree.edges[e].child)
            branches.append(Branch(leaf=v.vid, vids=tuple(vids), eids=tuple(eids)))
        self.branches: tuple[Branch, ...] = tuple(branches)
        self._by_leaf = {b.leaf: i for i, b in enumerate(self.branches)}
        self._edge_sets = [frozenset(b.eids) for b in self.branches]

    def __len__(self) -> int:
        return len(self.branches)

    def index_of_leaf(self, leaf_vid: int) -> int | None:
        return self._by_leaf.get(leaf_vid)

    def split(self, i: int, j: int) -> int:
        """Common prefix length of two branches."""
        if i == j:
            return self.depth
        bi, bj = self.branches[i], self.branches[j]
        k = 0
        while k < self.depth and bi.eids[k] == bj.eids[k]:
            k += 1
        return k

    def visual_dist(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return 2.0 ** (-self.split(i, j))

    def basis_members(self, eid: int) -> frozenset[int]:
        """U_e: indices of branches passing through tree edge eid."""
        return frozenset(i for i, s in enumerate(self._edge_sets) if eid in s)

    def prefix_vertex(self, i: int, k: int) -> int:
        return self.branches[i].vids[k]

    def groups_by_prefix(self, k: int) -> dict[int, list[int]]:
        """Branch indices grouped by their depth-k ancestor vertex."""
        out: dict[int, list[int]] = {}
        for i, b in enumerate(self.branches):
            out.setdefault(b.vids[k], []).append(i)
        return out


def boundary_approx(fg: FundamentalGroup, depth: int,
                    config: TreeBallConfig | None = None,
                    tree: TreeBall | None = None) -> BoundaryApprox:
    tree = tree if tree is not None else TreeBall(fg, depth, config)
    return BoundaryApprox(tree, depth)


# --- Cantor check -------------------------------------------------------------


@dataclass
class CantorVerdict:
    passed: bool
    perfect_ok: bool
    no_dead_ends: bool
    separation_ok: bool
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "cantor_verdict",
            "passed": self.passed,
            "perfect_at_depth": self.perfect_ok,
            "no_dead_ends": self.no_dead_ends,
            "basis_separates": self.separation_ok,
            "witnesses": self.witnesses,
        }


def cantor_check(b: BoundaryApprox, window: int = 3) -> CantorVerdict:
    """Finite-depth Cantor surrogate: windowed branching plus basis separation.

    Perfect-at-depth: every branch must pass a vertex with >= 2 children in
    every ``window`` consecutive levels.  Totally-disconnected-at-depth: the
    clopen basis separates every pair of branches.
    """
    if b.depth < 3:
        raise DepthTooSmall(f"depth {b.depth} < 3")
    tree = b.tree
    verdict = CantorVerdict(passed=False, perfect_ok=True, no_dead_ends=True,
                            separation_ok=True)
    if not b.branches:
        verdict.perfect_ok = False
        verdict.witnesses.append({"reason": "no branches at this depth"})
        return verdict

    for v in tree.vertices:
        if v.depth == b.depth - 1 and not v.children:
            verdict.no_dead_ends = False
            verdict.witnesses.append({"reason": "dead end", "vertex": v.rep.display()})

    n_children = {v.vid: len(v.children) for v in tree.vertices}
    for i, br in enumerate(b.branches):
        for start in range(0, b.depth - window + 1):
            if not any(n_children[br.vids[k]] >= 2 for k in range(start, start + window)):
                verdict.perfect_ok = False
                verdict.witnesses.append({
                    "reason": "no branching in window",
                    "branch": i, "window_start": start,
                })
                break
        if not verdict.perfect_ok:
            break

    # distinct edge paths <=> the basis separates every pair (the first
    # divergence edge contains exactly one); verify the cell property
    # explicitly on a deterministic sample of pairs
    if len(set(br.eids for br in b.branches)) != len(b.branches):
        verdict.separation_ok = False
        verdict.witnesses.append({"reason": "indistinct branches"})
    n = len(b.branches)
    rng = random.Random(0)
    pairs = [(i, j) for i in range(min(n, 25)) for j in range(i + 1, min(n, 25))]
    if n > 25:
        pairs += [tuple(sorted(rng.sample(range(n), 2))) for _ in range(300)]
    for i, j in pairs:
        if i == j:
            continue
        s = b.split(i, j)
        e = b.branches[i].eids[s]
        cell = b.basis_members(e)
        if not ((i in cell) ^ (j in cell)):
            verdict.separation_ok = False
            verdict.witnesses.append({"reason": "basis fails to separate", "pair": [i, j]})
    verdict.passed = verdict.perfect_ok and verdict.no_dead_ends and verdict.separation_ok
    return verdict


# --- limit-set proxies ----------------------------------------------------------


@dataclass(frozen=True)
class LimitSetApprox:
    """Finite-depth proxy of the limit set of one infinite vertex-group coset."""

    coset_vid: int
    vtype: int
    coset_depth: int
    depth: int
    directions: tuple[int, ...]      # branch indices in the BoundaryApprox
    label: str = ""


def _tame_descent(tree: TreeBall, vid: int, target_depth: int) -> int | None:
    """Follow smallest non-escaping children down to target depth; leaf vid."""
    v = tree.vertices[vid]
    while v.depth < target_depth:
        options = [tree.edges[e] for e in v.children]
        if not options:
            return None
        tame = [e for e in options if not e.fresh]
        chosen = min(tame or options, key=lambda e: e.param_sort)
        v = tree.vertices[chosen.child]
    return v.vid


def limit_set_approx(b: BoundaryApprox, vid: int) -> LimitSetApprox:
    """Member packet for the coset vertex vid: one branch per escaping star
    edge, each continued tamely to the full depth.  Finite vertex groups have
    empty limit sets."""
    tree = b.tree
    v = tree.vertices[vid]
    backend = tree.fg.vertex_backend(v.vtype)
    dirs: list[int] = []
    if not backend.is_finite:
        fresh_edges = sorted(
            (tree.edges[e] for e in v.children if tree.edges[e].fresh),
            key=lambda e: e.param_sort,
        )
        for e in fresh_edges:
            leaf = _tame_descent(tree, e.child, b.depth)
            if leaf is None:
                continue
            idx = b.index_of_leaf(leaf)
            if idx is not None:
                dirs.append(idx)
    return LimitSetApprox(
        coset_vid=vid, vtype=v.vtype, coset_depth=v.depth, depth=b.depth,
        directions=tuple(sorted(set(dirs))),
        label=f"{tree.fg.gog.graph.vertex_names[v.vtype]}:{v.rep.display()}",
    )


def limit_set_family(b: BoundaryApprox) -> list[LimitSetApprox]:
    """W = limit-set proxies of every infinite-type coset vertex in the ball."""
    out = []
    for v in b.tree.vertices:
        if not b.tree.fg.vertex_backend(v.vtype).is_finite:
            out.append(limit_set_approx(b, v.vid))
    return out


# --- dense-amalgam checker -------------------------------------------------------


@dataclass
class AmalgamCertificate:
    depth: int
    conditions: dict
    family_size: int
    nonempty_members: int

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.conditions.values())

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "amalgam_certificate",
            "depth": self.depth,
            "passed": self.passed,
            "family_size": self.family_size,
            "nonempty_members": self.nonempty_members,
            "conditions": self.conditions,
        }


def _in_subtree(tree: TreeBall, vid: int, ancestor: int) -> bool:
    v = tree.vertices[vid]
    while True:
        if v.vid == ancestor:
            return True
        if v.parent_edge < 0:
            return False
        v = tree.vertices[tree.edges[v.parent_edge].parent]


def amalgam_check(b: BoundaryApprox, family: list[LimitSetApprox],
                  seed: int = 0, samples: int = 20) -> AmalgamCertificate:
    """Check the five dense-amalgam conditions at finite depth.

    (a1) pairwise disjointness; (a2) nullness with diameter bound 2^(-k+1)
    per coset tree-distance k; (a3) each member's complement is eps-dense;
    (a4) each per-type union is eps-dense; (a5) sampled cross-member pairs
    are separated by an explicit saturated clopen built from an edge split.
    eps = 2^(-depth+2).
    """
    if b.depth < 4:
        raise DepthTooSmall(f"depth {b.depth} < 4")
    tree = b.tree
    d = b.depth
    eps_split = d - 2  # dist <= 2^(-d+2)  <=>  split >= d-2
    conditions: dict[str, dict] = {}
    nonempty = [m for m in family if m.directions]

    # (a1) pairwise disjoint
    witnesses = []
    owner: dict[int, int] = {}
    for mi, m in enumerate(family):
        for di in m.directions:
            if di in owner:
                witnesses.append({
                    "branch": di,
                    "members": [family[owner[di]].label, m.label],
                })
            else:
                owner[di] = mi
    conditions["a1_disjoint"] = {"passed": not witnesses, "witnesses": witnesses[:10]}

    # (a2) nullness
    witnesses = []
    max_diam_per_k = {}
    for k in range(0, d + 1):
        diams = [
            max((b.visual_dist(i, j) for i in m.directions for j in m.directions),
                default=0.0)
            for m in nonempty if m.coset_depth >= k
        ]
        max_diam_per_k[k] = max(diams, default=0.0)
        if max_diam_per_k[k] > 2.0 ** (-k + 1):
            witnesses.append({"k": k, "max_diam": max_diam_per_k[k]})
    non_increasing = all(
        max_diam_per_k[k + 1] <= max_diam_per_k[k] for k in range(d)
    )
    if not non_increasing:
        witnesses.append({"reason": "diameters not non-increasing in k"})
    conditions["a2_null"] = {
        "passed": not witnesses,
        "witnesses": witnesses[:10],
        "max_diam_per_tree_distance": {str(k): v for k, v in max_diam_per_k.items()},
    }

    # (a3) boundary subsets: complement of each member is eps-dense
    witnesses = []
    groups = b.groups_by_prefix(eps_split)
    for m in nonempty:
        dirset = set(m.directions)
        for anc, members in groups.items():
            if set(members) <= dirset:
                witnesses.append({"member": m.label, "prefix_vertex": anc})
    conditions["a3_boundary"] = {"passed": not witnesses, "witnesses": witnesses[:10]}

    # (a4) each per-type union is eps-dense
    witnesses = []
    types = sorted({m.vtype for m in family})
    for vtype in types:
        union = set()
        for m in family:
            if m.vtype == vtype:
                union.update(m.directions)
        for anc, members in groups.items():
            if not (set(members) & union):
                witnesses.append({
                    "vtype": tree.fg.gog.graph.vertex_names[vtype],
                    "prefix_vertex": anc,
                })
    conditions["a4_union_dense"] = {"passed": not witnesses, "witnesses": witnesses[:10]}

    # (a5) saturated clopen separation for sampled cross-member pairs
    witnesses = []
    checked = 0
    rng = random.Random(seed)
    if len(nonempty) >= 2:
        for _ in range(samples):
            m1, m2 = rng.sample(range(len(nonempty)), 2)
            W1, W2 = nonempty[m1], nonempty[m2]
            z1 = W1.directions[rng.randrange(len(W1.directions))]
            z2 = W2.directions[rng.randrange(len(W2.directions))]
            C1, C2 = W1.coset_vid, W2.coset_vid
            if C2 != 0 and not _in_subtree(tree, C1, C2):
                side_in, z_in, z_out = C2, z2, z1
            else:
                side_in, z_in, z_out = C1, z1, z2
            e = tree.vertices[side_in].parent_edge
            cell = set(b.basis_members(e))
            removed = 0
            H = set(cell)
            for m in family:
                if not m.directions:
                    continue
                if not _in_subtree(tree, m.coset_vid, side_in):
                    inside = set(m.directions) & cell
                    if inside:
                        H -= set(m.directions)
                        removed += 1
            checked += 1
            saturated = all(
                set(m.directions) <= H or not (set(m.directions) & H)
                for m in family if m.directions
            )
            ok = saturated and (z_in in H) and (z_out not in H)
            if not ok:
                witnesses.append({
                    "pair": [nonempty[m1].label, nonempty[m2].label],
                    "edge": e,
                    "saturated": saturated,
                    "z_in_ok": z_in in H,
                    "z_out_ok": z_out not in H,
                    "removed_members": removed,
                })
    conditions["a5_saturated_separation"] = {
        "passed": not witnesses,
        "witnesses": witnesses[:10],
        "pairs_checked": checked,
    }

    return AmalgamCertificate(
        depth=d, conditions=conditions,
        family_size=len(family), nonempty_members=len(nonempty),
    )


@dataclass
class DensityVerdict:
    status: str               # "pass" | "fail" | "not_applicable"
    witnesses: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "branch_density",
            "status": self.status,
            "witnesses": self.witnesses,
        }


def branch_density_check(b: BoundaryApprox, family: list[LimitSetApprox]) -> DensityVerdict:
    """Every member direction must have a non-member direction within
    visual distance 2^(-d+2): branch-point proxies are dense."""
    if b.depth < 4:
        raise DepthTooSmall(f"depth {b.depth} < 4")
    if b.tree.fg.gog.graph.n_edges == 0:
        return DensityVerdict(status="not_applicable",
                              witnesses=[{"reason": "no tree edges"}])
    owned: set[int] = set()
    for m in family:
        owned.update(m.directions)
    groups = b.groups_by_prefix(b.depth - 2)
    by_branch = {}
    for anc, members in groups.items():
        for i in members:
            by_branch[i] = members
    witnesses = []
    for m in family:
        for di in m.directions:
            if not any(j not in owned for j in by_branch[di]):
                witnesses.append({"member": m.label, "branch": di})
    return DensityVerdict(status="pass" if not witnesses else "fail",
                          witnesses=witnesses[:10])


# --- direction classification ------------------------------------------------------


@dataclass
class ClassifyResult:
    kind: str                     # "vertex_point" | "branch_point" | "inconclusive"
    coset_label: str | None = None
    coset_vid: int | None = None
    prefix_eids: tuple[int, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "classification",
            "result": self.kind,
            "coset": self.coset_label,
            "prefix_length": len(self.prefix_eids),
            "diagnostics": self.diagnostics,
        }


def dist_to_vertex_coset(fg: FundamentalGroup, tree: TreeBall, x: NormalForm,
                         vid: int) -> int:
    """Exact d_S(x, rep*G_v); backend cosets are searched out to the radius
    where candidates can no longer beat the identity translate."""
    v = tree.vertices[vid]
    backend = fg.vertex_backend(v.vtype)
    if backend.is_finite:
        return min(fg.dist(x, fg.multiply(v.rep, h))
                   for h in fg.vertex_subgroup_elements(v.vtype))
    z = fg.multiply(fg.invert(v.rep), x)
    bound = fg.wordlen(z)
    best = bound
    for g in backend.ball(2 * bound):
        cand = fg.dist(fg.vertex_element(v.vtype, g), z)
        best = min(best, cand)
    return best


def classify_direction(fg: FundamentalGroup, tree: TreeBall, elements,
                       r_bound: int = 4, slack: int | None = None) -> ClassifyResult:
    """Classify a diverging sample of group elements as heading to a vertex
    point (bounded distance from one coset) or a branch point (projections
    move monotonically along a ray), else inconclusive."""
    elements = list(elements)
    if len(elements) < 3:
        return ClassifyResult(kind="inconclusive",
                              diagnostics={"reason": "need at least 3 samples"})
    g = fg.gog.graph
    if slack is None:
        slack = max(1, g.n_edges)

    candidates: list[int] = []
    seen = set()
    for x in elements[:3]:
        for vtype in range(g.n_vertices):
            vid = tree.find_vertex(x, vtype)
            if vid is not None and vid not in seen:
                seen.add(vid)
                candidates.append(vid)
    for vid in candidates:
        dmax = max(dist_to_vertex_coset(fg, tree, x, vid) for x in elements)
        if dmax <= r_bound:
            v = tree.vertices[vid]
            return ClassifyResult(
                kind="vertex_point", coset_vid=vid,
                coset_label=f"{g.vertex_names[v.vtype]}:{v.rep.display()}",
                diagnostics={"max_distance": dmax, "r_bound": r_bound},
            )

    projections = []
    for x in elements:
        vid = tree.find_vertex(x, fg.root)
        if vid is None:
            return ClassifyResult(kind="inconclusive",
                                  diagnostics={"reason": "projection left the ball"})
        projections.append(tree.root_path(vid))
    depths = [len(p) for p in projections]
    monotone = all(b >= a for a, b in zip(depths, depths[1:]))
    moving = depths[-1] - depths[0] >= 2
    along_ray = True
    for p, q in zip(projections, projections[1:]):
        lcp = 0
        while lcp < len(p) and lcp < len(q) and p[lcp] == q[lcp]:
            lcp += 1
        if lcp < len(p) - slack:
            along_ray = False
            break
    if monotone and moving and along_ray:
        p, q = projections[-2], projections[-1]
        lcp = 0
        while lcp < len(p) and lcp < len(q) and p[lcp] == q[lcp]:
            lcp += 1
        return ClassifyResult(
            kind="branch_point", prefix_eids=tuple(q[:lcp]),
            diagnostics={"depths": depths, "slack": slack},
        )
    return ClassifyResult(
        kind="inconclusive",
        diagnostics={"depths": depths, "monotone": monotone, "along_ray": along_ray},
    )
