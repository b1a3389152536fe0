"""Measure fibers: ergodic lifts with multiplicities.

Two routes:

* exact, for periodic image orbits — the fiber decomposes into lift
  orbits whose winding numbers are the multiplicities; the canonical lift
  and the relatively-independent-self-joining diagonal masses are computed
  in exact rationals;

* statistical, for fully supported Markov/Bernoulli (or lazily pushed
  forward) image measures — sample a long image window, thread the
  joining graph over it, and cluster the per-coordinate empirical cylinder
  statistics.  Almost every fiber point is generic for one of the lifts,
  with multiplicities given by how many coordinates share a cluster, so
  cluster sizes estimate multiplicities.  This path is an estimator and
  is labeled as such in its report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotFullySupported, NotInImage
from .graphs import (LabeledGraph, OneBlockRecoding, PeriodicOrbit,
                     SlidingBlockCode, determinize, full_shift, recode_to_one_block)
from .codes import compute_degree, periodic_fiber
from .joinings import DegreeJoiningGraph, _ViabilityWalk, degree_joining_graph
from .measures import (BernoulliMeasure, COMeasure, EmpiricalDistribution,
                       MarkovMeasure, PushforwardMeasure, StationaryMeasure,
                       make_rng)


@dataclass(frozen=True)
class LiftEntry:
    descriptor: dict
    multiplicity: int
    measure: object = None            # the exact measure object when available

    def to_json_dict(self):
        return {"measure": self.descriptor, "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class LiftReport:
    """The measure fiber over one image measure: lifts with multiplicities."""

    base: dict
    degree: int
    lifts: tuple
    method: str                       # "exact" | "monte-carlo"
    details: dict = field(default_factory=dict)

    def multiplicities(self):
        return sorted(entry.multiplicity for entry in self.lifts)

    def to_json_dict(self):
        return {
            "base_measure": self.base,
            "degree": self.degree,
            "method": self.method,
            "lifts": [entry.to_json_dict() for entry in self.lifts],
            "details": self.details,
        }


@dataclass(frozen=True)
class CanonicalLiftDecomposition:
    """Ergodic decomposition of the uniform-fiber lift: weights m_i / d."""

    components: tuple                 # (measure, Fraction weight)

    def __post_init__(self):
        if sum(w for _m, w in self.components) != 1:
            raise ValueError("canonical lift weights must sum to 1 exactly")

    @property
    def is_ergodic(self):
        return len(self.components) == 1

    def to_json_dict(self):
        return {
            "components": [{"measure": m.describe(), "weight": str(w)}
                           for m, w in self.components],
            "is_ergodic": self.is_ergodic,
        }


def _unwrap(code):
    if isinstance(code, OneBlockRecoding):
        return code.graph, code
    if isinstance(code, LabeledGraph):
        return code, None
    recoding = getattr(code, "recoding", None)
    if recoding is not None:
        return recoding.graph, recoding
    raise TypeError(f"expected a labeled graph or a recoding, got {type(code).__name__}")


def _lift_orbit_alphabet(g, recoding):
    return recoding.base_alphabet if recoding is not None else g.x_symbols


def _anchor_of_label(lift_word, labels, base_word):
    """Phase t such that the lift point's image is the base point anchored
    at rotation t of the base orbit word."""
    p = len(base_word)
    image = tuple(labels[s] for s in lift_word)
    for t in range(p):
        if all(image[i] == base_word[(t + i) % p] for i in range(len(image))):
            return t
    raise RuntimeError("lift orbit does not project onto the base orbit")


def analyze_periodic_lifts(code, y: PeriodicOrbit):
    """Exact lift analysis of the CO-measure on a periodic image orbit.

    Returns the lift report together with the canonical-lift decomposition.
    Each lift's multiplicity is its winding number; the report additionally
    carries the exactly computed diagonal mass of each lift's relatively
    independent self-joining, which must equal 1/multiplicity.
    """
    g, recoding = _unwrap(code)
    fiber = periodic_fiber(g, y)
    d = fiber.fiber_size
    p = y.period

    entries = []
    diagonal = {}
    for orbit, winding in fiber.lift_orbits:
        # fiber points over each base point, as rotation anchors of the lift
        per_base = {t: [] for t in range(p)}
        q = orbit.period
        for r in range(q):
            rot = orbit.primitive_word[r:] + orbit.primitive_word[:r]
            t = _anchor_of_label(rot, g.label, y.primitive_word)
            per_base[t].append(r)
        sizes = {t: len(rs) for t, rs in per_base.items()}
        if set(sizes.values()) != {winding}:
            raise RuntimeError("fiber points are not equidistributed over the base orbit")
        mass = Fraction(0)
        for t in range(p):
            pts = per_base[t]
            cell = Fraction(0)
            for r1 in pts:
                for r2 in pts:
                    if r1 == r2:
                        cell += Fraction(1, len(pts)) * Fraction(1, len(pts))
            mass += Fraction(1, p) * cell
        if mass != Fraction(1, winding):
            raise RuntimeError("diagonal mass disagrees with the winding number")

        reported = recoding.base_orbit(orbit) if recoding is not None else orbit
        lift_measure = COMeasure(reported, _lift_orbit_alphabet(g, recoding))
        entries.append(LiftEntry(lift_measure.describe(), winding, lift_measure))
        diagonal[",".join(str(a) for a in reported.primitive_word)] = mass

    assert sum(e.multiplicity for e in entries) == d
    base_measure = COMeasure(y, g.y_symbols)
    report = LiftReport(
        base=base_measure.describe(),
        degree=d,
        lifts=tuple(entries),
        method="exact",
        details={"diagonal_mass": {k: str(v) for k, v in diagonal.items()},
                 "base_period": p},
    )
    decomposition = CanonicalLiftDecomposition(
        tuple((e.measure, Fraction(e.multiplicity, d)) for e in entries))
    return report, decomposition


@dataclass(frozen=True)
class MonteCarloParams:
    sample_length: int = 10**6
    cylinder_depth: int = 3
    tolerance: float | None = None    # defaults to 5 / sqrt(sample_length)
    seed: int = 0

    @property
    def tau(self):
        if self.tolerance is not None:
            return self.tolerance
        return 5.0 / math.sqrt(self.sample_length)


def support_presentation(nu: StationaryMeasure, g: LabeledGraph):
    """Right-resolving presentation of the support of an image measure."""
    if isinstance(nu, PushforwardMeasure):
        return _pushforward_support_presentation(nu)
    if isinstance(nu, BernoulliMeasure):
        support = full_shift(nu.support_states())
        return determinize(support)
    if isinstance(nu, MarkovMeasure):
        states = nu.support_states()
        graph = LabeledGraph(states, nu.support_transitions(),
                             {a: a for a in states}, g.y_symbols)
        return determinize(graph)
    raise TypeError(f"unsupported image measure type {type(nu).__name__}")


def _pushforward_support_presentation(nu: PushforwardMeasure):
    base, code = nu.base, nu.code
    if isinstance(code, SlidingBlockCode):
        graph = recode_to_one_block(code).graph
        if isinstance(base, BernoulliMeasure):
            positive = set(base.support_states())
            keep = [b for b in graph.x_symbols if all(a in positive for a in b)]
        elif isinstance(base, MarkovMeasure):
            support = base.support_transitions()
            keep = [b for b in graph.x_symbols
                    if all(pair in support for pair in zip(b, b[1:])) or len(b) == 1]
        else:
            raise TypeError("pushforward support needs a Bernoulli or Markov base")
        restricted = graph.restrict(keep)
    else:
        graph = code
        if isinstance(base, BernoulliMeasure):
            restricted = graph.restrict(base.support_states())
        elif isinstance(base, MarkovMeasure):
            support = base.support_transitions() & graph.transitions
            restricted = LabeledGraph(base.support_states(), support,
                                      {s: graph.label[s] for s in base.support_states()},
                                      graph.y_symbols)
        else:
            raise TypeError("pushforward support needs a Bernoulli or Markov base")
    return determinize(restricted)


def is_fully_supported_on_image(nu: StationaryMeasure, g: LabeledGraph) -> bool:
    """Whether supp(nu) is the whole image shift of g (exact language check
    between right-resolving presentations)."""
    image = determinize(g)
    support = support_presentation(nu, g)
    if not support.language_subset_of(image):
        raise NotFullySupported("measure is not supported inside the image shift")
    return image.language_subset_of(support)


def _coordinate_letter_tables(lam: DegreeJoiningGraph, recoding, letter_alphabet):
    letter_index = {a: i for i, a in enumerate(letter_alphabet)}
    d = lam.degree
    n = len(lam.graph.x_symbols)
    tables = np.empty((d, n), dtype=np.int64)
    for k, sym in enumerate(lam.graph.x_symbols):
        for i in range(d):
            letter = recoding.base_letter(sym[i]) if recoding is not None else sym[i]
            tables[i, k] = letter_index[letter]
    return tables


def _single_linkage(dist, tau):
    n = dist.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= tau:
                parent[find(i)] = find(j)
    clusters = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    return sorted(clusters.values(), key=lambda c: (-len(c), c[0]))


def classify_lifts_monte_carlo(code, nu: StationaryMeasure,
                               params: MonteCarloParams | None = None, *,
                               constant_to_one: bool = False) -> LiftReport:
    """Statistical lift classification over a fully supported image measure.

    Samples an image window, threads a bi-viable joining-graph word over it
    (burn-in of one joining-symbol-count dropped at both ends), accumulates
    per-coordinate cylinder statistics, and reports single-linkage clusters
    as lifts with multiplicity = cluster size.  Non-fully-supported inputs
    are refused unless the code is known constant-to-one, because the
    clustering guarantees fail there.
    """
    if params is None:
        params = MonteCarloParams()
    g, recoding = _unwrap(code)
    constant_to_one = constant_to_one or bool(getattr(code, "constant_to_one", False))
    degree_report = compute_degree(g)
    d = degree_report.degree

    if not set(nu.alphabet) <= set(g.y_symbols):
        raise ValueError("image measure alphabet is not contained in the code's image alphabet")
    if not is_fully_supported_on_image(nu, g):
        if not constant_to_one:
            raise NotFullySupported(
                "image measure is not fully supported and the code is not known "
                "constant-to-one; refusing to classify")

    lam = degree_joining_graph(g, degree=d)
    T = params.sample_length
    burn = len(lam.graph.x_symbols)
    if T <= 2 * burn + params.cylinder_depth:
        raise ValueError("sample length too short for burn-in and cylinder depth")

    rng = make_rng(params.seed)
    y_idx = nu.sample_indices(T, rng)
    y_word = [nu.alphabet[i] for i in y_idx]

    walker = _ViabilityWalk(lam.graph)
    ids = walker.viability_ids(tuple(y_word))
    path = walker.walk(tuple(y_word), ids)

    lam_index = lam.graph.index
    path_idx = np.fromiter((lam_index[s] for s in path), count=len(path), dtype=np.int64)
    path_idx = path_idx[burn:len(path_idx) - burn]

    letter_alphabet = tuple(_lift_orbit_alphabet(g, recoding))
    tables = _coordinate_letter_tables(lam, recoding, letter_alphabet)
    distributions = []
    for i in range(d):
        coords = tables[i][path_idx]
        distributions.append(EmpiricalDistribution.from_indices(
            coords, letter_alphabet, params.cylinder_depth))

    dist = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            dist[i, j] = dist[j, i] = distributions[i].distance(distributions[j])
    clusters = _single_linkage(dist, params.tau)
    assert sum(len(c) for c in clusters) == d

    entries = []
    cluster_details = []
    for members in clusters:
        merged = distributions[members[0]]
        for m in members[1:]:
            merged = merged.merged_with(distributions[m])
        descriptor = {"type": "empirical-cluster",
                      "coordinates": members,
                      "frequencies": merged.to_json_dict(max_length=1)["frequencies"]}
        entries.append(LiftEntry(descriptor, len(members), merged))
        cluster_details.append({"coordinates": members,
                                "cylinders": merged.to_json_dict(max_length=params.cylinder_depth)})

    return LiftReport(
        base=nu.describe(),
        degree=d,
        lifts=tuple(entries),
        method="monte-carlo",
        details={
            "sample_length": T,
            "cylinder_depth": params.cylinder_depth,
            "tolerance": params.tau,
            "seed": params.seed,
            "burn_in": burn,
            "clusters": cluster_details,
        },
    )
