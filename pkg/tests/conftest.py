from __future__ import annotations

import pytest

from amalgam_lab.corpus import text
from amalgam_lab.dsl import parse_gog
from amalgam_lab.fundgroup import FundamentalGroup
from amalgam_lab.gog import spanning_tree


def make_fg(name: str):
    gog = parse_gog(text(name))
    sd = spanning_tree(gog)
    return gog, sd, FundamentalGroup(gog, sd)


@pytest.fixture(scope="session")
def dinf():
    return make_fg("dinf")


@pytest.fixture(scope="session")
def z2z3():
    return make_fg("z2z3")


@pytest.fixture(scope="session")
def f2():
    return make_fg("f2")


@pytest.fixture(scope="session")
def zxz2():
    return make_fg("zxz2")


@pytest.fixture(scope="session")
def z2z2():
    return make_fg("z2z2")


@pytest.fixture(scope="session")
def trivial():
    return make_fg("trivial")


@pytest.fixture(scope="session")
def zz():
    return make_fg("zz")


class FreeProductOracle:
    """Independent string model of C_{n_1} * ... * C_{n_k} (order 0 means Z).

    Elements are tuples of syllables (factor, exponent) with exponent != 0
    (mod the factor order), adjacent syllables in distinct factors.  This is
    the classical free-product normal form, built without any of the package's
    word machinery.
    """

    def __init__(self, orders):
        self.orders = tuple(orders)

    identity = ()

    def _norm_exp(self, f, e):
        n = self.orders[f]
        return e % n if n else e

    def mul(self, u, v):
        out = list(u)
        for f, e in v:
            if out and out[-1][0] == f:
                s = self._norm_exp(f, out[-1][1] + e)
                if s == 0:
                    out.pop()
                else:
                    out[-1] = (f, s)
            else:
                e = self._norm_exp(f, e)
                if e != 0:
                    out.append((f, e))
        return tuple(out)

    def inv(self, u):
        return tuple((f, self._norm_exp(f, -e)) for f, e in reversed(u))

    def steps(self):
        """Generator steps closed under inversion, one generator per factor;
        generators first, then the new formal inverses, matching the order
        the package's GeneratingSet uses."""
        out = [((f, 1),) for f in range(len(self.orders))]
        for f in range(len(self.orders)):
            inverse = ((f, self._norm_exp(f, -1)),)
            if inverse not in out:
                out.append(inverse)
        return out

    def ball_layers(self, radius):
        seen = {self.identity}
        frontier = [self.identity]
        layers = [1]
        for _ in range(radius):
            nxt = []
            for u in frontier:
                for s in self.steps():
                    w = self.mul(u, s)
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            layers.append(len(nxt))
            frontier = nxt
        return layers, seen


# factor orders matching the corpus generating sets
ORACLES = {
    "dinf": FreeProductOracle([2, 2]),
    "z2z3": FreeProductOracle([2, 3]),
    "f2": FreeProductOracle([0, 0]),
    "zxz2": FreeProductOracle([0, 2]),
}
