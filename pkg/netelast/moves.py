"""
moves
~~~~~

The two local moves of a net under load.

A *contraction* merges two distinct vertex orbits whose representatives have
come within distance `delta` of each other; the edges between them become
loops.  A *splitting* divides a vertex `v` whose local tension has top
eigenvalue at least the firmness `K_deg(v)`: the darts at `v` are sorted by
the sign of their projection onto the top eigenvector `u`, and every true
loop of weight `w` is redistributed as loops of weight `p0 w`, `p1 w` on the
two new vertices plus an edge of weight `p01 w` between them.

Vertex orbits equivalent under the period never contract.  A splitting is
"generic" when the top eigenvalue is simple and no dart is perpendicular to
`u`; we refuse to apply a non-generic split.
"""

import collections as _collections
import logging
import math as _math
import numpy as _np

from . import net as _net
from . import solver as _solver
from .utils import lattice as _lattice

_logger = logging.getLogger(__name__)

ContractionCandidate = _collections.namedtuple("ContractionCandidate", ["v0", "v1", "offset", "distance"])


class SplittingCandidate(_collections.namedtuple("SplittingCandidate",
        ["vertex", "lambda_max", "firmness", "u", "sides", "eigen_gap_ok", "darts_ok"])):
    """A vertex whose local tension may split it.  `sides` is aligned with
    :func:`net.darts_at`: 0 or 1 for each dart, `None` for true loops."""
    __slots__ = ()

    @property
    def generic(self):
        return self.eigen_gap_ok and self.darts_ok

    @property
    def margin(self):
        """`lambda_max - K_deg(v)`; the vertex splits when this is `>= 0`."""
        return self.lambda_max - self.firmness


class NonGenericError(ValueError):
    """Attempt to apply a non-generic splitting."""
    pass


class Firmness():
    """Map from vertex degree to the threshold `K_d`.  Base class: constant."""
    def __init__(self, K):
        if not K > 0:
            raise ValueError("Firmness must be positive, not {}".format(K))
        self._K = float(K)

    def __call__(self, degree):
        return self._K

    def spec(self):
        """The dictionary form understood by :func:`firmness_from_spec`."""
        return {"constant": self._K}

    def __repr__(self):
        return "Firmness(constant={})".format(self._K)


class LinearFirmness(Firmness):
    """`K_d = kappa * d`."""
    def __call__(self, degree):
        return self._K * degree

    def spec(self):
        return {"linear": self._K}

    def __repr__(self):
        return "Firmness(linear={})".format(self._K)


class TableFirmness(Firmness):
    """Explicit thresholds for given degrees, matched to within 1e-9, with a
    default for all other degrees."""
    def __init__(self, table, default):
        super().__init__(default)
        self._table = []
        for degree, K in sorted((float(d), float(k)) for d, k in table.items()):
            if not K > 0:
                raise ValueError("Firmness must be positive, not {} at degree {}".format(K, degree))
            self._table.append((degree, K))

    def __call__(self, degree):
        for d, K in self._table:
            if abs(d - degree) <= 1e-9 * max(1.0, abs(d)):
                return K
        return self._K

    def spec(self):
        return {"table": {repr(d): K for d, K in self._table}, "default": self._K}

    def __repr__(self):
        return "Firmness(table={}, default={})".format(self._table, self._K)


def firmness_from_spec(spec):
    """Build a :class:`Firmness` from `{"constant": K}`, `{"linear": kappa}`
    or `{"table": {degree: K, ...}, "default": K}`."""
    if isinstance(spec, Firmness):
        return spec
    if isinstance(spec, (int, float)):
        return Firmness(spec)
    keys = set(spec)
    if keys == {"constant"}:
        return Firmness(spec["constant"])
    if keys == {"linear"}:
        return LinearFirmness(spec["linear"])
    if keys == {"table", "default"}:
        return TableFirmness(spec["table"], spec["default"])
    raise ValueError("Unknown firmness specification {}".format(spec))


class MoveParams():
    """Thresholds for both moves, and the loop redistribution fractions.

    :param delta: Contraction distance `delta > 0`.
    :param firmness: A :class:`Firmness`, or anything accepted by
      :func:`firmness_from_spec`.
    :param p0, p1, p01: Fractions of each loop's weight given to the two new
      loops and the new edge; must sum to one.
    """
    def __init__(self, delta, firmness, p0=0.25, p1=0.25, p01=0.5):
        if not delta > 0:
            raise ValueError("Contraction threshold must be positive, not {}".format(delta))
        for p in (p0, p1, p01):
            if not 0 <= p <= 1:
                raise ValueError("Loop fractions must lie in [0,1], not {}".format(p))
        if abs(p0 + p1 + p01 - 1) > 1e-12:
            raise ValueError("Loop fractions {}, {}, {} do not sum to one".format(p0, p1, p01))
        self._delta = float(delta)
        self._firmness = firmness_from_spec(firmness)
        self._fractions = (float(p0), float(p1), float(p01))

    @property
    def delta(self):
        return self._delta

    @property
    def firmness(self):
        return self._firmness

    @property
    def fractions(self):
        """Tuple `(p0, p1, p01)`."""
        return self._fractions

    def __repr__(self):
        return "MoveParams(delta={}, firmness={}, p={})".format(self._delta, self._firmness, self._fractions)


def find_contractions(g, r, delta, radius=None):
    """Pairs of distinct vertex orbits whose representatives lie within
    `radius` (default `delta`) of each other, as candidates `(v0, v1, gamma)`
    with `v0 < v1` meaning "`v0` and `gamma . v1`".

    :return: List of :class:`ContractionCandidate`, nearest first.
    """
    if not delta > 0:
        raise ValueError("Contraction threshold must be positive, not {}".format(delta))
    if radius is None:
        radius = delta
    basis = r.period.basis
    found = []
    for i in range(g.vertex_count):
        for j in range(i + 1, g.vertex_count):
            centre = r.positions[j] - r.positions[i]
            for offset, distance in _lattice.offsets_in_ball(basis, centre, radius):
                found.append(ContractionCandidate(i, j, offset, distance))
    found.sort(key=lambda c: (c.distance, c.v0, c.v1, c.offset))
    return found


def apply_contraction(g, c):
    """Merge `c.v0` with `c.offset . c.v1`.  The merged orbit keeps the index
    of `v0` (less one if `v1 < v0`); higher indices shift down by one."""
    v0, v1 = c.v0, c.v1
    g._check_vertex(v0)
    g._check_vertex(v1)
    if v0 == v1:
        raise ValueError("Cannot contract vertex {} with its own translate".format(v0))
    if len(c.offset) != g.dimension:
        raise ValueError("Offset {} does not have length {}".format(c.offset, g.dimension))
    rebased = _net.translate_offsets(g, v1, c.offset)
    def relabel(v):
        if v == v1:
            v = v0
        return v - 1 if v > v1 else v
    edges = [(relabel(e.tail), relabel(e.head), e.offset, e.weight) for e in rebased.edges]
    return _net.build_graph(g.dimension, g.vertex_count - 1, edges)


def splitting_candidate(g, r, v, firmness):
    """Examine vertex `v` whether or not it meets its threshold.

    Eigenvalue gaps and dart projections are compared against a floor set by
    the degree of `v` and the lattice length scale, so a vanishing tension is
    never generic.  Nor is a split leaving one half without a positive weight
    edge to the rest of the net.
    """
    tension = _solver.local_tension(g, r, v)
    values, vectors = _lattice.symmetric_eigh(tension)
    lambda_max = float(values[-1])
    u = vectors[:, -1]
    deg = _net.degree(g, v)
    length = r.period.covolume ** (1.0 / g.dimension)
    scale = max(float(_np.trace(tension)), deg * length * length)
    gap_ok = lambda_max > 1e-9 * scale
    if len(values) > 1:
        gap_ok = gap_ok and values[-1] - values[-2] > 1e-9 * scale
    darts_ok = True
    sides = []
    attached = set()
    loops = False
    for dart in _net.darts_at(g, v):
        if _net.is_true_loop(dart.edge):
            sides.append(None)
            loops = loops or dart.edge.weight > 0
            continue
        vector = r.dart_vector(v, dart)
        projection = float(u @ vector)
        if abs(projection) <= 1e-9 * max(float(_np.linalg.norm(vector)), length):
            darts_ok = False
        side = 1 if projection > 0 else 0
        sides.append(side)
        if dart.edge.weight > 0:
            attached.add(side)
    if not loops and attached != {0, 1}:
        darts_ok = False
    K = firmness(deg)
    return SplittingCandidate(v, lambda_max, K, u, tuple(sides), bool(gap_ok), darts_ok)


def find_splittings(g, r, firmness):
    """All vertices whose local tension's top eigenvalue reaches `K_deg(v)`.

    :return: List of :class:`SplittingCandidate`, largest margin first.
    """
    firmness = firmness_from_spec(firmness)
    found = [splitting_candidate(g, r, v, firmness) for v in range(g.vertex_count)]
    found = [c for c in found if c.margin >= 0]
    found.sort(key=lambda c: (-c.margin, c.vertex))
    return found


def apply_splitting(g, r, s, params):
    """Split vertex `s.vertex`.  The darts on side 0 stay with `v`, those on
    side 1 move to a new vertex with index `g.vertex_count`.

    :return: Pair `(graph, realization)` where the realization is the
      immediate one: both halves sit where `v` was.
    """
    if not s.generic:
        raise NonGenericError("Vertex {} does not split generically".format(s.vertex))
    v, new = s.vertex, g.vertex_count
    p0, p1, p01 = params.fractions
    side = {}
    for dart, k in zip(_net.darts_at(g, v), s.sides):
        side[(dart.edge, dart.orientation)] = k
    zero = (0,) * g.dimension
    edges = []
    for e in g.edges:
        if e.tail != v and e.head != v:
            edges.append(e)
        elif _net.is_true_loop(e):
            edges.append((v, v, zero, p0 * e.weight))
            edges.append((new, new, zero, p1 * e.weight))
            edges.append((v, new, zero, p01 * e.weight))
        else:
            tail, head = e.tail, e.head
            if tail == v and side[(e, 1)] == 1:
                tail = new
            if head == v and side[(e, -1)] == 1:
                head = new
            edges.append((tail, head, e.offset, e.weight))
    graph = _net.build_graph(g.dimension, g.vertex_count + 1, edges)
    positions = _np.vstack([r.positions, r.positions[v][None, :]])
    return graph, _net.Realization(positions, r.period)


def compatibility_lower_bound(deg, K):
    """`sqrt(2 K) / deg`: for integer weights, the length of the new edge after
    a splitting at threshold is at least this, so a contraction threshold
    `delta` below it cannot immediately undo the split."""
    if not deg > 0 or not K > 0:
        raise ValueError("Degree and firmness must be positive, not {} and {}".format(deg, K))
    return _math.sqrt(2 * K) / deg


def positive_part_bound(xs, ws):
    """For scalars `x` with integer weights `w >= 1`, `sum w x = 0` and
    `sum w x^2 = K`, returns the pair `(z, K)` with `z = sum_{x > 0} w x`;
    then `z >= sqrt(K / 2)`."""
    xs = _np.asarray(xs, dtype=float)
    ws = _np.asarray(ws, dtype=float)
    if _np.any(ws < 1) or _np.any(ws != _np.round(ws)):
        raise ValueError("Weights must be positive integers")
    return float(ws[xs > 0] @ xs[xs > 0]), float(ws @ (xs * xs))
