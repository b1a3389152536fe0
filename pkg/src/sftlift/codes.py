"""Finite-to-one analysis of 1-block codes: diamonds, degree, word and
periodic-point fibers.

The degree search works on linked pairs of forward and backward subset
states.  For a label word w and a position i, the set of symbols occurring
at position i among preimage paths of w is F(prefix) ∩ B(suffix), where F
is the forward subset state of the prefix ending at i and B the backward
subset state of the suffix starting at i.  Prefix and suffix interact only
through the common letter at position i, so the minimum of |F ∩ B| over
all reachable pairs within one label class equals the minimum of the
per-word counts, which is the degree.  The subset automata are finite, so
the search terminates and yields a minimizing word as a certificate.  The
4^|symbols| bound on the search space (and hence on the certificate
length) is ours, not part of the theory.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FiberInfinite, InfiniteToOne, NotInImage, NotIrreducible
from .graphs import (LabeledGraph, PeriodicOrbit, SlidingBlockCode, _as_word,
                     _essential_symbols, _tarjan_scc, analyze_graph,
                     determinize, entropy)

ENTROPY_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class DegreeReport:
    """Finite-to-one verdict with the degree and a magic-word certificate.

    ``magic_position`` is a 0-based index into ``magic_word``: the degree is
    the number of distinct symbols occurring at that position among the
    word's preimage paths.
    """

    finite_to_one: bool
    degree: int | None
    magic_word: tuple | None
    magic_position: int | None
    entropy_x: float
    entropy_y: float

    def to_json_dict(self):
        return {
            "finite_to_one": self.finite_to_one,
            "degree": self.degree,
            "magic_word": None if self.magic_word is None else [str(a) for a in self.magic_word],
            "magic_position": self.magic_position,
            "entropy_x": self.entropy_x,
            "entropy_y": self.entropy_y,
        }


@dataclass(frozen=True)
class PhasedFiberDecomposition:
    """The fiber of a periodic orbit: lift orbits with winding numbers."""

    base_orbit: PeriodicOrbit
    lift_orbits: tuple        # of (PeriodicOrbit, winding) pairs
    fiber_size: int


def _require_irreducible(g: LabeledGraph) -> LabeledGraph:
    report = analyze_graph(g)
    if not report.is_irreducible:
        raise NotIrreducible("operation requires an irreducible essential graph")
    return report.essential


def _pair_symbols(g):
    return [(a, b) for a in g.x_symbols for b in g.x_symbols if g.label[a] == g.label[b]]


def _pair_successors(g, pairs):
    pair_set = set(pairs)
    succ = {}
    for a, b in pairs:
        succ[(a, b)] = [(c, d) for c in g.successors[a] for d in g.successors[b]
                        if (c, d) in pair_set]
    return succ


def is_finite_to_one(g: LabeledGraph) -> bool:
    """Diamond test on the pair graph of equal-label symbol pairs: the code
    is finite-to-one iff no path runs from a diagonal pair to a diagonal
    pair through an off-diagonal pair."""
    g = _require_irreducible(g)
    pairs = _pair_symbols(g)
    succ = _pair_successors(g, pairs)

    def closure(seeds, neighbors):
        seen = set(seeds)
        frontier = list(seeds)
        while frontier:
            v = frontier.pop()
            for w in neighbors[v]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return seen

    diagonal = [(a, a) for a in g.x_symbols]
    reachable = closure(diagonal, succ)
    pred = {p: [] for p in pairs}
    for p, nbrs in succ.items():
        for q in nbrs:
            pred[q].append(p)
    coreachable = closure(diagonal, pred)
    return not any(a != b for a, b in reachable & coreachable)


def _forward_states(g):
    """All forward subset states with a shortest witness word reaching them."""
    states = {}
    frontier = []
    for y in g.y_symbols:
        cls = frozenset(g.label_classes[y])
        if cls and cls not in states:
            states[cls] = (y,)
            frontier.append(cls)
    while frontier:
        state = frontier.pop(0)
        word = states[state]
        reach = set()
        for s in state:
            reach.update(g.successors[s])
        for y in g.y_symbols:
            nxt = frozenset(s for s in reach if g.label[s] == y)
            if nxt and nxt not in states:
                states[nxt] = word + (y,)
                frontier.append(nxt)
    return states


def _backward_states(g):
    """Backward subset states, witnessed by the suffix they realize."""
    states = {}
    frontier = []
    for y in g.y_symbols:
        cls = frozenset(g.label_classes[y])
        if cls and cls not in states:
            states[cls] = (y,)
            frontier.append(cls)
    while frontier:
        state = frontier.pop(0)
        word = states[state]
        reach = set()
        for s in state:
            reach.update(g.predecessors[s])
        for y in g.y_symbols:
            nxt = frozenset(s for s in reach if g.label[s] == y)
            if nxt and nxt not in states:
                states[nxt] = (y,) + word
                frontier.append(nxt)
    return states


def compute_degree(g: LabeledGraph) -> DegreeReport:
    """Degree of a finite-to-one code with a magic-word certificate.

    Raises InfiniteToOne (carrying the partial report) when the diamond
    test fails; the entropy comparison is computed either way and checked
    against the diamond verdict.
    """
    g = _require_irreducible(g)
    h_x = entropy(g)
    h_y = determinize(g).entropy()
    fto = is_finite_to_one(g)
    if fto != (abs(h_x - h_y) <= ENTROPY_MATCH_TOL):
        raise RuntimeError("diamond verdict disagrees with entropy comparison")
    if not fto:
        report = DegreeReport(False, None, None, None, h_x, h_y)
        raise InfiniteToOne("code admits a diamond; degree undefined", report)

    forward = _forward_states(g)
    backward = _backward_states(g)
    by_label_f = {}
    for state, word in forward.items():
        by_label_f.setdefault(word[-1], []).append((state, word))
    by_label_b = {}
    for state, word in backward.items():
        by_label_b.setdefault(word[0], []).append((state, word))

    best = None
    for y in g.y_symbols:
        for f_state, f_word in by_label_f.get(y, ()):
            for b_state, b_word in by_label_b.get(y, ()):
                count = len(f_state & b_state)
                if count == 0:
                    continue
                word = f_word + b_word[1:]
                position = len(f_word) - 1
                cand = (count, len(word), word, position)
                if best is None or cand < (best[0], best[1], best[2], best[3]):
                    best = cand
    if best is None:
        raise RuntimeError("no realizable forward/backward pair found")
    count, _length, word, position = best
    return DegreeReport(True, count, word, position, h_x, h_y)


def preimage_words(code, w):
    """All domain words mapping onto the label word w that extend to
    bi-infinite points (paths are confined to the essential subgraph).

    Accepts a LabeledGraph (result words have length |w|) or a
    SlidingBlockCode (result words have length |w| + memory + anticipation;
    the empty word yields the allowed memory+anticipation stubs).
    """
    w = _as_word(w)
    if isinstance(code, SlidingBlockCode):
        return _preimage_words_block(code, w)
    g = code
    alive = _essential_symbols(g.x_symbols, g.transitions)
    if not w:
        return {()}
    result = set()
    paths = [(s,) for s in g.x_symbols if s in alive and g.label[s] == w[0]]
    for letter in w[1:]:
        paths = [p + (s,) for p in paths for s in g.successors[p[-1]]
                 if s in alive and g.label[s] == letter]
    result.update(paths)
    return result


def _preimage_words_block(code: SlidingBlockCode, w):
    length = len(w) + code.memory + code.anticipation
    if length == 0:
        return {()}
    words = [(s,) for s in code.alphabet]
    for _ in range(length - 1):
        words = [u + (b,) for u in words for b in code.alphabet if (u[-1], b) in code.transitions]
    if not w:
        # preimage of the whole space: the allowed memory+anticipation stubs
        return set(words)
    return {u for u in words if code.apply(u) == w}


def _phased_graph(g, orbit: PeriodicOrbit):
    """Vertices (symbol, phase) following the orbit's label word."""
    w = orbit.primitive_word
    p = orbit.period
    vertices = [(s, t) for t in range(p) for s in g.x_symbols if g.label[s] == w[t]]
    vset = set(vertices)
    succ = {v: [] for v in vertices}
    for s, t in vertices:
        nt = (t + 1) % p
        for s2 in g.successors[s]:
            if (s2, nt) in vset:
                succ[(s, t)].append((s2, nt))
    return vertices, succ


def periodic_fiber(g: LabeledGraph, y: PeriodicOrbit) -> PhasedFiberDecomposition:
    """Exact fiber of a periodic orbit of the image.

    The recurrent part of the phased graph must split into disjoint simple
    cycles; each cycle of length q yields a lift orbit of least period q
    and winding q / period(y).  A branching recurrent part means the fiber
    is infinite and the input was not finite-to-one.
    """
    for a in y.primitive_word:
        if a not in set(g.y_symbols):
            raise NotInImage(f"symbol {a!r} is not in the image alphabet")
    vertices, succ = _phased_graph(g, y)
    alive = _essential_symbols(vertices, {(v, u) for v in vertices for u in succ[v]})
    if not alive:
        raise NotInImage("no preimage cycle realizes the orbit's word")
    succ = {v: [u for u in succ[v] if u in alive] for v in alive}
    for v in alive:
        if len(succ[v]) != 1:
            raise FiberInfinite("recurrent phased graph branches; fiber is infinite")
    indeg = {}
    for v in alive:
        indeg[succ[v][0]] = indeg.get(succ[v][0], 0) + 1
    if any(indeg.get(v, 0) != 1 for v in alive):
        raise FiberInfinite("recurrent phased graph merges; fiber is infinite")

    p = y.period
    order = g.index
    seen = set()
    lifts = []
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
        q = len(cycle)
        if q % p != 0:
            raise RuntimeError("phased cycle length not a multiple of the base period")
        # rotate so the cycle starts at phase 0, then read off the symbols
        start = next(i for i, (_s, t) in enumerate(cycle) if t == 0)
        word = tuple(cycle[(start + i) % q][0] for i in range(q))
        lifts.append((PeriodicOrbit.from_word(word, order), q // p))
    lifts.sort(key=lambda lw: (lw[1], tuple(order[s] for s in lw[0].primitive_word)))
    total = sum(w for _o, w in lifts)
    if total * p != len(alive):
        raise RuntimeError("winding numbers do not account for the recurrent part")
    return PhasedFiberDecomposition(base_orbit=y, lift_orbits=tuple(lifts), fiber_size=total)


def _closing_failure(g, forward: bool) -> bool:
    """Whether two distinct one-sided rays with equal start and equal labels
    exist (the negation of right-closing for forward=True, of left-closing
    otherwise), assuming the code is finite-to-one."""
    pairs = _pair_symbols(g)
    succ = _pair_successors(g, pairs)
    if not forward:
        rev = {p: [] for p in pairs}
        for p, nbrs in succ.items():
            for q in nbrs:
                rev[q].append(p)
        succ = rev
    seen = set((a, a) for a in g.x_symbols)
    frontier = list(seen)
    while frontier:
        v = frontier.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    off = [p for p in seen if p[0] != p[1]]
    if not off:
        return False
    # an off-diagonal pair reachable from the diagonal fails closing iff it
    # can run forever, i.e. reaches a cycle of the pair graph
    sub_succ = {p: [q for q in succ[p] if q in seen] for p in seen}
    comps = _tarjan_scc(sorted(seen, key=lambda p: (g.index[p[0]], g.index[p[1]])), sub_succ)
    recurrent = set()
    for comp in comps:
        if len(comp) > 1 or comp[0] in sub_succ[comp[0]]:
            recurrent.update(comp)
    reach_rec = set(recurrent)
    changed = True
    while changed:
        changed = False
        for p in seen:
            if p not in reach_rec and any(q in reach_rec for q in sub_succ[p]):
                reach_rec.add(p)
                changed = True
    return any(p in reach_rec for p in off)


def is_right_closing(g: LabeledGraph) -> bool:
    return not _closing_failure(_require_irreducible(g), forward=True)


def is_left_closing(g: LabeledGraph) -> bool:
    return not _closing_failure(_require_irreducible(g), forward=False)


def is_bi_closing(g: LabeledGraph) -> bool:
    """Necessary for constant-to-one; not sufficient when the image shift is
    strictly sofic, so this alone never certifies constant-to-one-ness."""
    g = _require_irreducible(g)
    return not _closing_failure(g, True) and not _closing_failure(g, False)
