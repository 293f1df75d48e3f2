from __future__ import annotations

import random

import pytest

from amalgam_lab.dsl import gog_from_json, gog_to_json, parse_gog
from amalgam_lab.errors import (
    EdgeGroupInfinite,
    EdgeIsLoop,
    EmbeddingNotInjective,
    GogSyntaxError,
    GraphDisconnected,
    NotIsomorphism,
    UnknownGroupRef,
)
from amalgam_lab.fundgroup import abelianization, emit_presentation
from amalgam_lab.gog import (
    NonElementary,
    ReducesTo,
    SimplyElementary,
    elementary_collapse,
    is_non_elementary,
    spanning_tree,
)

DINF = """
group A cyclic 2
group B table [[0,1],[1,0]] labels [e,b]
vertex v1 A gens [a]
vertex v2 B gens [b]
edge e1 v1 -- v2 group trivial embed_fwd {} embed_bwd {}
"""

SEGMENT_Z2_ISO = """
group A cyclic 2
group B table [[0,1],[1,0]] labels [e,b]
group E cyclic 2
vertex v1 A gens [a]
vertex v2 B gens [b]
edge e1 v1 -- v2 group E embed_fwd {a:b} embed_bwd {a:a}
"""

LOOP_Z2_ISO = """
group A cyclic 2
group E cyclic 2
vertex v A gens [a]
edge e1 v -- v group E embed_fwd {a:a} embed_bwd {a:a}
"""


def test_parse_single_vertex():
    gog = parse_gog("group T trivial\nvertex v T\n")
    assert gog.graph.n_vertices == 1 and gog.graph.n_edges == 0


def test_parse_dinf_valid():
    gog = parse_gog(DINF)
    assert gog.graph.n_vertices == 2 and gog.graph.n_edges == 1
    assert gog.edge_groups[0].order == 1
    assert gog.all_edge_groups_trivial


def test_parse_infinite_edge_group():
    text = "group F free 1\nvertex v1 F\nvertex v2 F\n" \
           "edge e1 v1 -- v2 group F embed_fwd {} embed_bwd {}\n"
    with pytest.raises(EdgeGroupInfinite):
        parse_gog(text)


def test_parse_syntax_error_carries_position():
    with pytest.raises(GogSyntaxError) as err:
        parse_gog("group A cyclic 2\nvertex v1 A gens [a\n")
    assert err.value.line == 2


def test_parse_unknown_group():
    with pytest.raises(UnknownGroupRef):
        parse_gog("group A cyclic 2\nvertex v1 NOPE\n")


def test_parse_nontrivial_embedding_into_backend_rejected():
    text = "group P free_abelian 2\ngroup E cyclic 2\nvertex v1 P\nvertex v2 P\n" \
           "edge e1 v1 -- v2 group E embed_fwd {a:x1} embed_bwd {a:x1}\n"
    with pytest.raises((EmbeddingNotInjective, KeyError)):
        parse_gog(text)


def test_parse_disconnected_graph():
    gog = parse_gog("group T trivial\nvertex v1 T\nvertex v2 T\n")
    with pytest.raises(GraphDisconnected):
        spanning_tree(gog)


def test_json_round_trip():
    gog = parse_gog(DINF)
    data = gog_to_json(gog)
    back = gog_from_json(data)
    assert gog_to_json(back) == data


def test_spanning_tree_single_loop():
    gog = parse_gog("group T trivial\nvertex v T\n"
                    "edge e1 v -- v group trivial embed_fwd {} embed_bwd {}\n")
    sd = spanning_tree(gog)
    assert sd.tree_edges == frozenset()
    assert sd.orientation == frozenset({0})


def test_spanning_tree_segment():
    sd = spanning_tree(parse_gog(DINF))
    assert sd.tree_edges == frozenset({0})


def test_spanning_tree_theta_graph():
    text = ("group T trivial\nvertex v1 T\nvertex v2 T\n"
            + "".join(f"edge e{i} v1 -- v2 group trivial embed_fwd {{}} embed_bwd {{}}\n"
                      for i in (1, 2, 3)))
    gog = parse_gog(text)
    sd = spanning_tree(gog)
    # BFS picks the least edge id; the two others are non-tree
    assert sd.tree_edges == frozenset({0})
    assert {2, 4} <= sd.orientation


def test_spanning_tree_deterministic():
    a = spanning_tree(parse_gog(DINF))
    b = spanning_tree(parse_gog(DINF))
    assert a == b


def test_collapse_segment_iso():
    gog = parse_gog(SEGMENT_Z2_ISO)
    collapsed = elementary_collapse(gog, "e1")
    assert collapsed.graph.n_vertices == 1 and collapsed.graph.n_edges == 0
    assert collapsed.vertex_groups[0].finite.order == 2


def test_collapse_preserves_abelianization():
    gog = parse_gog(SEGMENT_Z2_ISO)
    before = abelianization(emit_presentation(gog, spanning_tree(gog)))
    collapsed = elementary_collapse(gog, "e1")
    after = abelianization(emit_presentation(collapsed, spanning_tree(collapsed)))
    assert before == after == (0, (2,))


def test_collapse_not_isomorphism():
    with pytest.raises(NotIsomorphism):
        elementary_collapse(parse_gog(DINF), "e1")


def test_collapse_loop_rejected():
    gog = parse_gog(LOOP_Z2_ISO)
    with pytest.raises(EdgeIsLoop):
        elementary_collapse(gog, "e1")


def test_collapse_retargets_other_edges():
    # one collapsible edge plus a loop hanging at the absorbed vertex
    text = """
group A cyclic 4
group B cyclic 4
group E cyclic 4
group E2 cyclic 2
vertex v1 A gens [a]
vertex v2 B gens [a]
edge e1 v1 -- v2 group E embed_fwd {a:a} embed_bwd {a:a}
edge e2 v2 -- v2 group E2 embed_fwd {a:a2} embed_bwd {a:a2}
"""
    gog = parse_gog(text)
    collapsed = elementary_collapse(gog, "e1")
    assert collapsed.graph.n_vertices == 1 and collapsed.graph.n_edges == 1
    # the loop embeddings now land in the kept Z/4
    emb = collapsed.embedding(0)
    assert emb.target.finite.order == 4
    before = abelianization(emit_presentation(gog, spanning_tree(gog)))
    after = abelianization(emit_presentation(collapsed, spanning_tree(collapsed)))
    assert before == after


def test_non_elementary_dinf_is_simply_elementary_case2():
    verdict = is_non_elementary(parse_gog(DINF))
    assert isinstance(verdict, SimplyElementary) and verdict.case == 2


def test_non_elementary_z2z3():
    text = DINF.replace("table [[0,1],[1,0]] labels [e,b]",
                        "table [[0,1,2],[1,2,0],[2,0,1]] labels [e,b,b2]")
    verdict = is_non_elementary(parse_gog(text))
    assert isinstance(verdict, NonElementary)


def test_non_elementary_two_loops():
    text = ("group T trivial\nvertex v T\n"
            "edge a1 v -- v group trivial embed_fwd {} embed_bwd {}\n"
            "edge a2 v -- v group trivial embed_fwd {} embed_bwd {}\n")
    assert isinstance(is_non_elementary(parse_gog(text)), NonElementary)


def test_single_vertex_simply_elementary_case1():
    verdict = is_non_elementary(parse_gog("group T trivial\nvertex v T\n"))
    assert isinstance(verdict, SimplyElementary) and verdict.case == 1


def test_loop_iso_simply_elementary_case3():
    verdict = is_non_elementary(parse_gog(LOOP_Z2_ISO))
    assert isinstance(verdict, SimplyElementary) and verdict.case == 3


def test_reduces_to_case1():
    verdict = is_non_elementary(parse_gog(SEGMENT_Z2_ISO))
    assert isinstance(verdict, ReducesTo) and verdict.case == 1
    assert len(verdict.sequence) == 1


def test_non_elementarity_invariant_under_renaming():
    rng = random.Random(9)
    base_lines = [
        "group A cyclic 2",
        "group B table [[0,1,2],[1,2,0],[2,0,1]] labels [e,b,b2]",
        "vertex {v1} A gens [a]",
        "vertex {v2} B gens [b]",
        "edge {e1} {v1} -- {v2} group trivial embed_fwd {{}} embed_bwd {{}}",
    ]
    baseline = is_non_elementary(parse_gog("\n".join(base_lines).format(
        v1="v1", v2="v2", e1="e1")))
    for _ in range(20):
        names = {k: f"{k}_{rng.randrange(1000)}" for k in ("v1", "v2", "e1")}
        text = "\n".join(base_lines).format(**names)
        verdict = is_non_elementary(parse_gog(text))
        assert type(verdict) is type(baseline)


def test_collapsed_presentation_is_exactly_z2():
    gog = parse_gog(SEGMENT_Z2_ISO)
    collapsed = elementary_collapse(gog, "e1")
    p = emit_presentation(collapsed, spanning_tree(collapsed))
    assert p.generators == ("a",)
    assert set(p.relators) == {(1, 1)}


def test_duplicate_group_name_rejected():
    with pytest.raises(GogSyntaxError):
        parse_gog("group A cyclic 2\ngroup A cyclic 3\nvertex v A\n")


def test_unknown_gen_label_carries_line():
    with pytest.raises(GogSyntaxError) as err:
        parse_gog("group A cyclic 2\nvertex v A gens [zz]\n")
    assert err.value.line == 2


def test_unknown_embed_label_rejected():
    text = ("group A cyclic 2\ngroup E cyclic 2\n"
            "vertex v1 A gens [a]\nvertex v2 A gens [a]\n"
            "edge e1 v1 -- v2 group E embed_fwd {a:zzz} embed_bwd {a:a}\n")
    with pytest.raises(GogSyntaxError) as err:
        parse_gog(text)
    assert err.value.line == 5
