"""Fiber products and the graph of mutually separated preimage tuples.

For a finite-to-one 1-block code of degree d, the d-tuples of preimages
that never share a symbol at the same time form a 1-step SFT (here: the
joining graph).  It projects onto the whole domain in every coordinate and
onto the whole image under its common label, and its ergodic measures over
a given image measure are exactly the degree joinings, whose margins list
the ergodic lifts with multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .errors import (FiberInfinite, NoPath, NotInImage, ProjectionNotOnto,
                     UnsupportedFiber)
from .graphs import LabeledGraph, PeriodicOrbit, _as_word, _essential_symbols, _tarjan_scc, analyze_graph
from .codes import compute_degree, periodic_fiber


@dataclass(frozen=True)
class FiberProductGraph:
    """Equal-label n-tuples with componentwise transitions, trimmed essential."""

    arity: int
    graph: LabeledGraph


@dataclass(frozen=True)
class DegreeJoiningGraph:
    """The distinct-tuple restriction of the d-fold fiber product.

    ``graph.label`` is the 1-block code onto the image; reducibility is
    allowed and recorded in ``components``.
    """

    degree: int
    graph: LabeledGraph
    components: tuple


def fiber_product(g: LabeledGraph, n: int, distinct: bool = False) -> FiberProductGraph:
    """The 1-step SFT of equal-label n-tuples (pairwise-distinct entries
    when ``distinct``), trimmed to its essential part."""
    if n < 1:
        raise ValueError("arity must be >= 1")
    order = g.index
    symbols = []
    for y in g.y_symbols:
        cls = g.label_classes[y]
        for tup in product(cls, repeat=n):
            if distinct and len(set(tup)) != n:
                continue
            symbols.append(tup)
    symbols.sort(key=lambda t: tuple(order[s] for s in t))
    symset = set(symbols)
    trans = set()
    for u in symbols:
        for v in symbols:
            if v in symset and all((a, b) in g.transitions for a, b in zip(u, v)):
                trans.add((u, v))
    alive = _essential_symbols(symbols, trans)
    if not alive:
        raise NotInImage("fiber product is empty after trimming")
    symbols = [t for t in symbols if t in alive]
    trans = {(u, v) for u, v in trans if u in alive and v in alive}
    label = {t: g.label[t[0]] for t in symbols}
    return FiberProductGraph(n, LabeledGraph(symbols, trans, label, g.y_symbols))


def degree_joining_graph(g: LabeledGraph, degree: int | None = None) -> DegreeJoiningGraph:
    """Materialize the SFT of d-tuples of distinct mutually separated
    preimages and verify that every coordinate projection still covers the
    whole domain and every image letter is still realized."""
    if degree is None:
        degree = compute_degree(g).degree
    prod = fiber_product(g, degree, distinct=True)
    lam = prod.graph
    for i in range(degree):
        covered = {t[i] for t in lam.x_symbols}
        if covered != set(g.x_symbols):
            raise ProjectionNotOnto(
                f"coordinate {i} misses symbols {sorted(map(str, set(g.x_symbols) - covered))}")
    if {lam.label[t] for t in lam.x_symbols} != set(g.y_symbols):
        raise ProjectionNotOnto("joining graph misses part of the image alphabet")
    report = analyze_graph(lam)
    return DegreeJoiningGraph(degree, lam, report.components)


class _ViabilityWalk:
    """Shared machinery for viable paths over a label window.

    Backward viability sets are computed as states of the reversed subset
    automaton and interned, so long windows cost O(1) amortized per step.
    """

    def __init__(self, graph: LabeledGraph):
        self.graph = graph
        order = graph.index
        self.order = order
        self.classes = {y: tuple(sorted(graph.label_classes[y], key=order.get))
                        for y in graph.y_symbols}
        self.succ_by_label = {}
        for s in graph.x_symbols:
            for y in graph.y_symbols:
                self.succ_by_label[(s, y)] = tuple(
                    t for t in graph.successors[s] if graph.label[t] == y)
        self._sets = {}
        self._set_list = []
        self._bstep_memo = {}
        self._fstep_memo = {}

    def _intern(self, fs):
        sid = self._sets.get(fs)
        if sid is None:
            sid = len(self._set_list)
            self._sets[fs] = sid
            self._set_list.append(fs)
        return sid

    def viability_ids(self, y_word):
        """Backward pass: per position, the id of the viable-symbol set."""
        T = len(y_word)
        ids = np.empty(T, dtype=np.int64)
        last = frozenset(self.classes.get(y_word[-1], ()))
        if not last:
            raise NoPath(f"image symbol {y_word[-1]!r} unrealizable")
        ids[T - 1] = self._intern(last)
        for t in range(T - 2, -1, -1):
            key = (ids[t + 1], y_word[t])
            vid = self._bstep_memo.get(key)
            if vid is None:
                nxt = self._set_list[ids[t + 1]]
                viable = frozenset(s for s in self.classes.get(y_word[t], ())
                                   if any(u in nxt for u in self.graph.successors[s]))
                if not viable:
                    raise NoPath("window is not a label word of the image shift")
                vid = self._intern(viable)
                self._bstep_memo[key] = vid
            ids[t] = vid
        return ids

    def walk(self, y_word, ids):
        """Forward pass: lexicographically least viable symbol each step."""
        T = len(y_word)
        first = min(self._set_list[ids[0]], key=self.order.get)
        path = [first]
        current = first
        for t in range(1, T):
            key = (current, ids[t])
            nxt = self._fstep_memo.get(key)
            if nxt is None:
                viable = self._set_list[ids[t]]
                for cand in self.succ_by_label[(current, y_word[t])]:
                    if cand in viable:
                        nxt = cand
                        break
                if nxt is None:
                    raise RuntimeError("viability pruning admitted a dead end")
                self._fstep_memo[key] = nxt
            path.append(nxt)
            current = nxt
        return path


def lambda_path_over(joining: DegreeJoiningGraph, y_window, policy: str = "lex-least"):
    """A bi-extendable joining-graph word presenting the window, chosen by
    the deterministic lexicographic-least policy (coordinate-then-symbol
    order).  The window must be a label word of the image shift."""
    if policy != "lex-least":
        raise ValueError(f"unknown policy {policy!r}")
    y_window = _as_word(y_window)
    if not y_window:
        return []
    walker = _ViabilityWalk(joining.graph)
    ids = walker.viability_ids(y_window)
    return walker.walk(y_window, ids)


@dataclass(frozen=True)
class PeriodicJoiningReport:
    """All CO degree joinings over a periodic image orbit."""

    base_orbit: PeriodicOrbit
    orbits: tuple                      # PeriodicOrbit over tuple symbols
    permutation_related: bool


def _canonical_column_form(orbit: PeriodicOrbit, order):
    """Invariant of a tuple-symbol orbit under coordinate permutation:
    the least, over rotations, of the sorted multiset of coordinate
    columns.  Two orbits are related by a symbolwise coordinate
    permutation iff their forms agree (columns are pairwise distinct
    because tuple entries never collide)."""
    word = orbit.primitive_word
    q = len(word)
    d = len(word[0])
    best = None
    for r in range(q):
        rot = word[r:] + word[:r]
        cols = sorted(tuple(order[rot[t][i]] for t in range(q)) for i in range(d))
        cand = tuple(cols)
        if best is None or cand < best:
            best = cand
    return q, best


def enumerate_periodic_degree_joinings(joining: DegreeJoiningGraph, g: LabeledGraph,
                                       y: PeriodicOrbit, *,
                                       constant_to_one: bool = False) -> PeriodicJoiningReport:
    """Enumerate the joining-graph orbits over a periodic image orbit and
    verify that all of them are pairwise related by a coordinate
    permutation applied symbolwise.

    When the code is not known constant-to-one and the orbit's fiber is
    larger than the degree, the guarantees behind the enumeration fail and
    the call refuses instead of guessing.
    """
    fiber = periodic_fiber(g, y)
    if not constant_to_one and fiber.fiber_size != joining.degree:
        raise UnsupportedFiber(
            f"orbit fiber has {fiber.fiber_size} points but the degree is "
            f"{joining.degree}; enumeration over collapsed orbits is refused")

    lam = joining.graph
    w = y.primitive_word
    p = y.period
    vertices = [(s, t) for t in range(p) for s in lam.x_symbols if lam.label[s] == w[t]]
    vset = set(vertices)
    succ = {v: [] for v in vertices}
    for s, t in vertices:
        nt = (t + 1) % p
        for s2 in lam.successors[s]:
            if (s2, nt) in vset:
                succ[(s, t)].append((s2, nt))
    alive = _essential_symbols(vertices, {(v, u) for v in vertices for u in succ[v]})
    if not alive:
        raise NotInImage("no joining-graph cycle realizes the orbit")
    succ = {v: [u for u in succ[v] if u in alive] for v in alive}
    for v in alive:
        if len(succ[v]) != 1:
            raise FiberInfinite("joining fiber of the orbit is not a union of cycles")

    order = lam.index
    base_order = g.index
    seen = set()
    orbits = []
    for v in sorted(alive, key=lambda v: (v[1], order[v[0]])):
        if v in seen:
            continue
        cycle = [v]
        seen.add(v)
        u = succ[v][0]
        while u != v:
            cycle.append(u)
            seen.add(u)
            u = succ[u][0]
        start = next(i for i, (_s, t) in enumerate(cycle) if t == 0)
        word = tuple(cycle[(start + i) % len(cycle)][0] for i in range(len(cycle)))
        orbits.append(PeriodicOrbit.from_word(word, order))

    forms = {_canonical_column_form(o, base_order) for o in orbits}
    return PeriodicJoiningReport(base_orbit=y, orbits=tuple(orbits),
                                 permutation_related=len(forms) == 1)


def permute_coordinates(orbit: PeriodicOrbit, perm, order=None) -> PeriodicOrbit:
    """Apply a coordinate permutation symbolwise to a tuple-symbol orbit."""
    word = tuple(tuple(sym[p] for p in perm) for sym in orbit.primitive_word)
    return PeriodicOrbit.from_word(word, order)


def find_relating_permutation(o1: PeriodicOrbit, o2: PeriodicOrbit, order):
    """Brute-force search for a coordinate permutation mapping one orbit to
    the other; small-degree oracle for the canonical-form verdict."""
    d = len(o1.primitive_word[0])
    targets = {o2.primitive_word[i:] + o2.primitive_word[:i] for i in range(o2.period)}
    for perm in permutations(range(d)):
        moved = tuple(tuple(sym[p] for p in perm) for sym in o1.primitive_word)
        if moved in targets:
            return perm
    return None
