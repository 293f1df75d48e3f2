"""Text DSL for graphs of groups, plus JSON export/import.

One statement per line, ``#`` starts a comment::

    group G2 cyclic 2
    group G3 table [[0,1,2],[1,2,0],[2,0,1]] labels [e,b,b2]
    group ZZ free_abelian 2
    vertex v1 G2 gens [a]
    vertex v2 G3 gens [b]
    edge e1 v1 -- v2 group trivial embed_fwd {} embed_bwd {}

``embed_fwd`` is i_y into the right-hand vertex group, ``embed_bwd`` is
i_{bar y} into the left-hand one.  Images are given on generators and are
extended multiplicatively (the named elements must generate the edge group).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backends import FINITE, FREE, FREE_ABELIAN, GroupBackend
from .errors import (
    EdgeGroupInfinite,
    EmbeddingNotInjective,
    GogSyntaxError,
    NotInjective,
    UnknownGroupRef,
)
from .gog import EdgeEmbedding, GraphOfGroups, build_graph
from .groups import FiniteGroup, check_group, check_monomorphism, cyclic_group

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<arrow>--)
      | (?P<punct>[\[\]{}:,])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\^-?[0-9]+)?)
      | (?P<num>-?[0-9]+)
    """,
    re.X,
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    out: list[_Tok] = []
    pos = 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = _TOKEN.match(line, pos)
        if m is None:
            raise GogSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, toks: list[_Tok], lineno: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, expect_kind: str | None = None, expect_text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise GogSyntaxError(
                f"unexpected end of line (expected {expect_text or expect_kind})",
                self.lineno,
                len(" ".join(t.text for t in self.toks)) + 1,
            )
        if expect_kind and tok.kind != expect_kind:
            raise GogSyntaxError(f"expected {expect_kind}, got {tok.text!r}", self.lineno, tok.col)
        if expect_text and tok.text != expect_text:
            raise GogSyntaxError(f"expected {expect_text!r}, got {tok.text!r}", self.lineno, tok.col)
        self.i += 1
        return tok

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise GogSyntaxError(f"trailing input {tok.text!r}", self.lineno, tok.col)


def _parse_int_list_list(cur: _Cursor) -> list[list[int]]:
    cur.next(expect_text="[")
    rows: list[list[int]] = []
    while True:
        tok = cur.peek()
        if tok and tok.text == "]":
            cur.next()
            break
        cur.next(expect_text="[")
        row: list[int] = []
        while True:
            tok = cur.next()
            if tok.text == "]":
                break
            if tok.kind != "num":
                raise GogSyntaxError(f"expected integer, got {tok.text!r}", cur.lineno, tok.col)
            row.append(int(tok.text))
            tok = cur.peek()
            if tok and tok.text == ",":
                cur.next()
        rows.append(row)
        tok = cur.peek()
        if tok and tok.text == ",":
            cur.next()
    return rows


def _parse_name_list(cur: _Cursor) -> list[str]:
    cur.next(expect_text="[")
    names: list[str] = []
    while True:
        tok = cur.next()
        if tok.text == "]":
            break
        if tok.kind not in ("ident", "num"):
            raise GogSyntaxError(f"expected name, got {tok.text!r}", cur.lineno, tok.col)
        names.append(tok.text)
        tok = cur.peek()
        if tok and tok.text == ",":
            cur.next()
    return names


def _parse_map(cur: _Cursor) -> dict[str, str]:
    cur.next(expect_text="{")
    mapping: dict[str, str] = {}
    while True:
        tok = cur.next()
        if tok.text == "}":
            break
        if tok.kind != "ident":
            raise GogSyntaxError(f"expected element name, got {tok.text!r}", cur.lineno, tok.col)
        key = tok.text
        cur.next(expect_text=":")
        val = cur.next(expect_kind="ident").text
        mapping[key] = val
        tok = cur.peek()
        if tok and tok.text == ",":
            cur.next()
    return mapping


def _extend_generator_map(edge_group: FiniteGroup, target: GroupBackend,
                          gen_images: dict[str, str], lineno: int):
    """Extend generator images multiplicatively to a total monomorphism."""
    if target.kind != FINITE:
        if gen_images and any(k != "e" for k in gen_images):
            raise EmbeddingNotInjective(
                "only the trivial group embeds into a torsion-free backend "
                f"(line {lineno})"
            )
        return EdgeEmbedding(edge_group, target, None)

    G = target.finite
    images: dict[int, int] = {edge_group.identity_index: G.identity_index}
    try:
        for key, val in gen_images.items():
            images[edge_group.index_of(key)] = G.index_of(val)
    except KeyError as exc:
        raise GogSyntaxError(f"embed map: {exc.args[0]}", lineno) from None
    changed = True
    while changed:
        changed = False
        known = list(images.items())
        for (a, fa) in known:
            for (b, fb) in known:
                ab = edge_group.mul(a, b)
                fab = G.mul(fa, fb)
                if ab not in images:
                    images[ab] = fab
                    changed = True
                elif images[ab] != fab:
                    raise EmbeddingNotInjective(
                        f"generator images are inconsistent at line {lineno}"
                    )
    if len(images) != edge_group.order:
        raise GogSyntaxError(
            "embed map images do not determine the embedding "
            "(named elements do not generate the edge group)", lineno
        )
    try:
        mono = check_monomorphism(edge_group, G, [images[a] for a in edge_group.elements()])
    except NotInjective as exc:
        raise EmbeddingNotInjective(str(exc)) from exc
    return EdgeEmbedding(edge_group, target, mono)


def parse_gog(text: str) -> GraphOfGroups:
    """Parse and fully validate a graph of groups from DSL text."""
    groups: dict[str, GroupBackend] = {"trivial": GroupBackend.from_finite(cyclic_group(1))}
    vertices: list[tuple[str, str, list[str] | None]] = []   # (name, groupref, gens)
    edges: list[tuple[str, str, str, str, dict, dict, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        toks = _tokenize(raw, lineno)
        if not toks:
            continue
        cur = _Cursor(toks, lineno)
        head = cur.next(expect_kind="ident").text

        if head == "group":
            name = cur.next(expect_kind="ident").text
            if name in groups:
                raise GogSyntaxError(f"duplicate group name {name!r}", lineno)
            kind = cur.next(expect_kind="ident").text
            if kind == "cyclic":
                n = int(cur.next(expect_kind="num").text)
                groups[name] = GroupBackend.from_finite(cyclic_group(n))
            elif kind == "trivial":
                groups[name] = GroupBackend.from_finite(cyclic_group(1))
            elif kind == "table":
                table = _parse_int_list_list(cur)
                labels = None
                tok = cur.peek()
                if tok and tok.text == "labels":
                    cur.next()
                    labels = _parse_name_list(cur)
                groups[name] = GroupBackend.from_finite(check_group(table, labels))
            elif kind == "free":
                n = int(cur.next(expect_kind="num").text)
                if n < 1:
                    raise GogSyntaxError("free rank must be >= 1", lineno)
                groups[name] = GroupBackend.free(n)
            elif kind == "free_abelian":
                n = int(cur.next(expect_kind="num").text)
                if n < 1:
                    raise GogSyntaxError("free_abelian rank must be >= 1", lineno)
                groups[name] = GroupBackend.free_abelian(n)
            else:
                raise GogSyntaxError(f"unknown group kind {kind!r}", lineno)
            cur.done()

        elif head == "vertex":
            name = cur.next(expect_kind="ident").text
            ref = cur.next(expect_kind="ident").text
            gens = None
            tok = cur.peek()
            if tok and tok.text == "gens":
                cur.next()
                gens = _parse_name_list(cur)
            cur.done()
            vertices.append((name, ref, gens, lineno))

        elif head == "edge":
            name = cur.next(expect_kind="ident").text
            left = cur.next(expect_kind="ident").text
            cur.next(expect_kind="arrow")
            right = cur.next(expect_kind="ident").text
            cur.next(expect_text="group")
            ref = cur.next(expect_kind="ident").text
            cur.next(expect_text="embed_fwd")
            fwd = _parse_map(cur)
            cur.next(expect_text="embed_bwd")
            bwd = _parse_map(cur)
            cur.done()
            edges.append((name, left, right, ref, fwd, bwd, lineno))

        else:
            raise GogSyntaxError(f"unknown statement {head!r}", lineno, toks[0].col)

    if not vertices:
        raise GogSyntaxError("no vertices declared", len(text.splitlines()) or 1)

    vertex_names = [v[0] for v in vertices]
    if len(set(vertex_names)) != len(vertex_names):
        raise GogSyntaxError("duplicate vertex name", 1)
    vgroups: list[GroupBackend] = []
    gensets: list[tuple[tuple[str, object], ...]] = []
    for name, ref, gens, lineno in vertices:
        if ref not in groups:
            raise UnknownGroupRef(f"vertex {name} references unknown group {ref!r}")
        backend = groups[ref]
        vgroups.append(backend)
        if backend.kind == FINITE:
            labels = gens if gens is not None else list(backend.generator_labels)
            try:
                genset = tuple((lbl, backend.finite.index_of(lbl)) for lbl in labels)
            except KeyError as exc:
                raise GogSyntaxError(f"vertex {name}: {exc.args[0]}", lineno) from None
            gen_elems = {e for _, e in genset}
            if backend.finite.subgroup_generated(gen_elems) != frozenset(backend.finite.elements()):
                raise GogSyntaxError(
                    f"gens of vertex {name} do not generate its group", lineno)
        else:
            # backends always use the standard basis for the word metric
            genset = tuple(zip(backend.generator_labels, backend.generators()))
        gensets.append(genset)

    edge_triples = [(e[0], e[1], e[2]) for e in edges]
    names = [e[0] for e in edge_triples]
    if len(set(names)) != len(names):
        raise GogSyntaxError("duplicate edge name", 1)
    for name, a, b in edge_triples:
        for v in (a, b):
            if v not in vertex_names:
                raise UnknownGroupRef(f"edge {name} references unknown vertex {v!r}")
    graph = build_graph(vertex_names, edge_triples)

    egroups: list[FiniteGroup] = []
    embeddings: list[EdgeEmbedding] = []
    vidx = {n: i for i, n in enumerate(vertex_names)}
    for name, left, right, ref, fwd, bwd, lineno in edges:
        if ref not in groups:
            raise UnknownGroupRef(f"edge {name} references unknown group {ref!r}")
        backend = groups[ref]
        if backend.kind in (FREE, FREE_ABELIAN):
            raise EdgeGroupInfinite(f"edge {name} has infinite edge group {ref!r}")
        egroup = backend.finite
        egroups.append(egroup)
        embeddings.append(_extend_generator_map(egroup, vgroups[vidx[right]], fwd, lineno))
        embeddings.append(_extend_generator_map(egroup, vgroups[vidx[left]], bwd, lineno))

    return GraphOfGroups(
        graph=graph,
        vertex_groups=tuple(vgroups),
        edge_groups=tuple(egroups),
        embeddings=tuple(embeddings),
        generating_sets=tuple(gensets),
    )


# --- JSON round trip --------------------------------------------------------

def gog_to_json(gog: GraphOfGroups) -> dict:
    g = gog.graph

    def group_spec(backend: GroupBackend) -> dict:
        if backend.kind == FINITE:
            return {
                "kind": "finite",
                "order": backend.finite.order,
                "labels": list(backend.finite.labels),
                "table": [list(r) for r in backend.finite.table],
            }
        return {"kind": backend.kind, "rank": backend.rank}

    edges = []
    for k in range(g.n_edges):
        fwd = gog.embedding(2 * k)
        bwd = gog.embedding(2 * k + 1)
        eg = gog.edge_groups[k]

        def emb_spec(emb: EdgeEmbedding) -> dict:
            return {
                "images": [emb.target.label(emb.apply(h)) for h in eg.elements()],
            }

        edges.append({
            "name": g.edge_names[k],
            "left": g.vertex_names[g.alpha[2 * k]],
            "right": g.vertex_names[g.omega[2 * k]],
            "group": group_spec(GroupBackend.from_finite(eg)),
            "embed_fwd": emb_spec(fwd),
            "embed_bwd": emb_spec(bwd),
        })

    return {
        "schema_version": 1,
        "kind": "graph_of_groups",
        "vertices": [
            {
                "name": g.vertex_names[v],
                "group": group_spec(gog.vertex_groups[v]),
                "gens": [lbl for lbl, _ in gog.generating_sets[v]],
            }
            for v in range(g.n_vertices)
        ],
        "edges": edges,
    }


def gog_from_json(data: dict) -> GraphOfGroups:
    if data.get("kind") != "graph_of_groups":
        raise UnknownGroupRef("JSON payload is not a graph_of_groups artifact")

    def backend_of(spec: dict) -> GroupBackend:
        if spec["kind"] == "finite":
            return GroupBackend.from_finite(check_group(spec["table"], spec["labels"]))
        if spec["kind"] == FREE:
            return GroupBackend.free(spec["rank"])
        return GroupBackend.free_abelian(spec["rank"])

    vertex_names = [v["name"] for v in data["vertices"]]
    vgroups = [backend_of(v["group"]) for v in data["vertices"]]
    gensets = []
    for v, backend in zip(data["vertices"], vgroups):
        if backend.kind == FINITE:
            gensets.append(tuple((lbl, backend.finite.index_of(lbl)) for lbl in v["gens"]))
        else:
            gensets.append(tuple(zip(backend.generator_labels, backend.generators())))

    vidx = {n: i for i, n in enumerate(vertex_names)}
    triples = [(e["name"], e["left"], e["right"]) for e in data["edges"]]
    graph = build_graph(vertex_names, triples)
    egroups = []
    embeddings = []
    for e in data["edges"]:
        eg = backend_of(e["group"]).finite
        egroups.append(eg)
        for key, tgt_vertex in (("embed_fwd", e["right"]), ("embed_bwd", e["left"])):
            target = vgroups[vidx[tgt_vertex]]
            images = e[key]["images"]
            if target.kind == FINITE:
                mono = check_monomorphism(
                    eg, target.finite, [target.finite.index_of(lbl) for lbl in images]
                )
                embeddings.append(EdgeEmbedding(eg, target, mono))
            else:
                embeddings.append(EdgeEmbedding(eg, target, None))

    return GraphOfGroups(
        graph=graph,
        vertex_groups=tuple(vgroups),
        edge_groups=tuple(egroups),
        embeddings=tuple(embeddings),
        generating_sets=tuple(gensets),
    )
