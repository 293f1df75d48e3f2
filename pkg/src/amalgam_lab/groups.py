"""Finite groups given extensionally by multiplication table, and monomorphisms.

Elements of a :class:`FiniteGroup` are plain integer indices into the table;
``labels`` is only a naming layer.  All validation happens once, in
:func:`check_group` / :func:`check_monomorphism`; the resulting objects are
immutable and safe to share.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import (
    NoIdentity,
    NotASubgroup,
    NotAssociative,
    NotHomomorphism,
    NotInjective,
    NotLatinSquare,
)


@dataclass(frozen=True)
class FiniteGroup:
    """A validated finite group: order, element labels, Cayley table."""

    order: int
    labels: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    identity_index: int
    _inverse: tuple[int, ...] = field(repr=False, compare=False, default=())

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def elements(self) -> range:
        return range(self.order)

    def label(self, a: int) -> str:
        return self.labels[a]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no element labelled {label!r}") from None

    def element_order(self, a: int) -> int:
        n, x = 1, a
        while x != self.identity_index:
            x = self.mul(x, a)
            n += 1
        return n

    def subgroup_generated(self, gens: set[int] | list[int]) -> frozenset[int]:
        closure = {self.identity_index}
        frontier = list(gens)
        while frontier:
            x = frontier.pop()
            if x in closure:
                continue
            closure.add(x)
            for y in list(closure):
                for z in (self.mul(x, y), self.mul(y, x), self.inv(x)):
                    if z not in closure:
                        frontier.append(z)
        return frozenset(closure)

    def is_subgroup(self, elems: frozenset[int]) -> bool:
        if self.identity_index not in elems:
            return False
        return all(self.mul(a, b) in elems for a in elems for b in elems) and all(
            self.inv(a) in elems for a in elems
        )


def check_group(table: list[list[int]], labels: list[str] | None = None) -> FiniteGroup:
    """Validate a multiplication table (Latin square, identity, associativity).

    Errors name the first violating cell or triple.
    """
    n = len(table)
    if n == 0:
        raise NoIdentity("empty table")
    for i, row in enumerate(table):
        if len(row) != n:
            raise NotLatinSquare(f"row {i} has length {len(row)}, expected {n}")
        for j, v in enumerate(row):
            if not isinstance(v, int) or not (0 <= v < n):
                raise NotLatinSquare(f"cell ({i},{j}) holds {v!r}, not an index in 0..{n - 1}")
    for i, row in enumerate(table):
        if len(set(row)) != n:
            raise NotLatinSquare(f"row {i} is not a permutation")
    for j in range(n):
        col = [table[i][j] for i in range(n)]
        if len(set(col)) != n:
            raise NotLatinSquare(f"column {j} is not a permutation")

    identity = None
    for e in range(n):
        if all(table[e][x] == x and table[x][e] == x for x in range(n)):
            identity = e
            break
    if identity is None:
        raise NoIdentity("no two-sided identity element")

    for a, b, c in itertools.product(range(n), repeat=3):
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")

    if labels is None:
        labels = [f"g{i}" for i in range(n)]
        labels[identity] = "e"
    if len(labels) != n or len(set(labels)) != n:
        raise ValueError("labels must be distinct and match the order")

    inverse = [0] * n
    for a in range(n):
        inverse[a] = next(b for b in range(n) if table[a][b] == identity)

    return FiniteGroup(
        order=n,
        labels=tuple(labels),
        table=tuple(tuple(row) for row in table),
        identity_index=identity,
        _inverse=tuple(inverse),
    )


def cyclic_group(n: int, gen_label: str = "a") -> FiniteGroup:
    """Z/n with elements e, a, a2, ..., a{n-1} and table (i+j) mod n."""
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    if n == 1:
        labels = ["e"]
    else:
        labels = ["e", gen_label] + [f"{gen_label}{k}" for k in range(2, n)]
    return check_group(table, labels)


TRIVIAL_GROUP = cyclic_group(1)


def cosets(group: FiniteGroup, subgroup_elements, side: str = "left") -> list[tuple[int, ...]]:
    """Partition ``group`` into cosets of a subgroup.

    The first coset is the subgroup itself; within a coset elements are
    sorted by index, and cosets are sorted by least element.
    """
    sub = frozenset(subgroup_elements)
    if not group.is_subgroup(sub):
        raise NotASubgroup(f"{sorted(sub)} is not closed under product and inverse")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    seen: set[int] = set()
    out: list[tuple[int, ...]] = []
    sub_sorted = tuple(sorted(sub))
    out.append(sub_sorted)
    seen.update(sub)
    rest = []
    for g in group.elements():
        if g in seen:
            continue
        if side == "left":
            coset = tuple(sorted(group.mul(g, h) for h in sub))
        else:
            coset = tuple(sorted(group.mul(h, g) for h in sub))
        rest.append(coset)
        seen.update(coset)
    rest.sort(key=lambda c: c[0])
    return out + rest


@dataclass(frozen=True)
class Monomorphism:
    """A validated injective homomorphism between finite groups."""

    source: FiniteGroup
    target: FiniteGroup
    map: tuple[int, ...]

    def apply(self, a: int) -> int:
        return self.map[a]

    def image(self) -> frozenset[int]:
        return frozenset(self.map)

    def preimage(self, b: int) -> int:
        return self.map.index(b)

    def is_iso_onto_target(self) -> bool:
        return self.source.order == self.target.order

    def inverse_on_image(self) -> dict[int, int]:
        return {b: a for a, b in enumerate(self.map)}


def check_monomorphism(source: FiniteGroup, target: FiniteGroup, mapping) -> Monomorphism:
    """Validate ``mapping`` (list of target indices, one per source element)."""
    m = tuple(mapping)
    if len(m) != source.order:
        raise NotHomomorphism(f"map has {len(m)} entries, source order is {source.order}")
    for b in m:
        if not (0 <= b < target.order):
            raise NotHomomorphism(f"image index {b} out of range")
    if m[source.identity_index] != target.identity_index:
        raise NotHomomorphism("identity is not mapped to identity")
    for a in source.elements():
        for b in source.elements():
            if m[source.mul(a, b)] != target.mul(m[a], m[b]):
                raise NotHomomorphism(f"map({a}*{b}) != map({a})*map({b})")
    for a in source.elements():
        for b in source.elements():
            if a != b and m[a] == m[b]:
                raise NotInjective(f"elements {a} and {b} share the image {m[a]}")
    return Monomorphism(source, target, m)


# --- independent abelianization oracle -------------------------------------

def commutator_subgroup(group: FiniteGroup) -> frozenset[int]:
    comms = {
        group.mul(group.mul(a, b), group.mul(group.inv(a), group.inv(b)))
        for a in group.elements()
        for b in group.elements()
    }
    return group.subgroup_generated(comms)


def abelian_invariants(group: FiniteGroup) -> tuple[int, ...]:
    """Invariant factors (d1 | d2 | ...) of G/[G,G], computed from the table.

    Independent of any presentation machinery: quotient by the commutator
    subgroup, then peel off maximal-order cyclic factors.
    """
    comm = commutator_subgroup(group)
    classes = cosets(group, comm, side="left")
    rep_of: dict[int, int] = {}
    for idx, c in enumerate(classes):
        for g in c:
            rep_of[g] = idx
    size = len(classes)
    mul = [[0] * size for _ in range(size)]
    for i, c in enumerate(classes):
        for j, d in enumerate(classes):
            mul[i][j] = rep_of[group.mul(c[0], d[0])]
    quotient = check_group(mul)

    # peel: repeatedly take an element of maximal order in the remaining quotient
    factors: list[int] = []
    current = quotient
    while current.order > 1:
        best = max(current.elements(), key=current.element_order)
        d = current.element_order(best)
        factors.append(d)
        sub = current.subgroup_generated({best})
        classes2 = cosets(current, sub, side="left")
        rep2: dict[int, int] = {}
        for idx, c in enumerate(classes2):
            for g in c:
                rep2[g] = idx
        size2 = len(classes2)
        mul2 = [[rep2[current.mul(c[0], d2[0])] for d2 in classes2] for c in classes2]
        current = check_group(mul2)
    # invariant factor convention: d1 | d2 | ... | dk, largest last
    return tuple(sorted(factors))
