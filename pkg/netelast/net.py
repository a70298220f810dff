"""
net
~~~

The data model: a weighted periodic graph is stored as its finite quotient
by the lattice `Z^N`.  Vertex orbits are numbered `0 .. n`, and each edge
orbit records its tail, head, the integer lattice offset between the cell of
the tail and the cell of the head, and a non-negative weight.

An edge orbit `(i, j, gamma, w)` is the same as `(j, i, -gamma, w)`; we store
each orbit once, in the lexicographically smaller orientation.  A "true loop"
is an edge `(i, i, 0)`; it has a zero edge vector in every realization.

Also here: the period homomorphism (:class:`PeriodMap`), realizations
(:class:`Realization`), and the standard presets of :func:`lattice_preset`.
"""

import collections as _collections
import itertools as _itertools
import math as _math
import numpy as _np

EdgeOrbit = _collections.namedtuple("EdgeOrbit", ["tail", "head", "offset", "weight"])

Dart = _collections.namedtuple("Dart", ["edge", "orientation", "head", "offset"])
Dart.__doc__ = """An oriented edge at a vertex.  `orientation` is +1 if the dart
runs along the stored orientation of `edge` and -1 if reversed; `head` and
`offset` are those of the dart (so the offset is negated for reversed darts).
"""


def _negate(offset):
    return tuple(-x for x in offset)


def _is_zero(offset):
    return all(x == 0 for x in offset)


def canonical_orbit(tail, head, offset):
    """Return the canonical orientation `(i, j, gamma)` of an edge orbit."""
    offset = tuple(int(x) for x in offset)
    forward = (tail, head, offset)
    backward = (head, tail, _negate(offset))
    return min(forward, backward)


class QuotientGraph():
    """The quotient of a periodic graph.  Construct with :func:`build_graph`,
    which validates and canonicalises; instances are immutable.
    """
    def __init__(self, dimension, vertex_count, edges):
        self._dimension = dimension
        self._vertex_count = vertex_count
        self._edges = tuple(edges)
        self._darts = [[] for _ in range(vertex_count)]
        for edge in self._edges:
            self._darts[edge.tail].append(Dart(edge, 1, edge.head, edge.offset))
            self._darts[edge.head].append(Dart(edge, -1, edge.tail, _negate(edge.offset)))
        self._darts = tuple(tuple(d) for d in self._darts)

    @property
    def dimension(self):
        """The rank `N` of the period lattice."""
        return self._dimension

    @property
    def vertex_count(self):
        """The number of vertex orbits."""
        return self._vertex_count

    @property
    def edges(self):
        """Tuple of :class:`EdgeOrbit`, canonical and sorted."""
        return self._edges

    def total_weight(self):
        """Sum of weights over unoriented edge orbits."""
        return sum(e.weight for e in self._edges)

    def _check_vertex(self, v):
        if not 0 <= v < self._vertex_count:
            raise ValueError("Vertex index {} out of range for {} vertices".format(v, self._vertex_count))

    def __eq__(self, other):
        if not isinstance(other, QuotientGraph):
            return NotImplemented
        return (self._dimension == other._dimension and self._vertex_count == other._vertex_count
                and self._edges == other._edges)

    def __hash__(self):
        return hash((self._dimension, self._vertex_count, self._edges))

    def __repr__(self):
        return "QuotientGraph(N={}, vertices={}, edges={})".format(self._dimension,
            self._vertex_count, list(self._edges))


def build_graph(dimension, vertex_count, edges):
    """Validate and canonicalise an edge list.  Parallel edges with the same
    `(i, j, gamma)` (in either orientation) are merged by adding weights.

    :param dimension: The rank `N >= 1`.
    :param vertex_count: Number of vertex orbits.
    :param edges: Iterable of :class:`EdgeOrbit` or of 4-tuples
      `(tail, head, offset, weight)`.

    :return: A :class:`QuotientGraph`.
    """
    if int(dimension) != dimension or dimension < 1:
        raise ValueError("Dimension must be a positive integer, not {}".format(dimension))
    if int(vertex_count) != vertex_count or vertex_count < 0:
        raise ValueError("Vertex count must be a non-negative integer, not {}".format(vertex_count))
    dimension, vertex_count = int(dimension), int(vertex_count)
    merged = _collections.OrderedDict()
    for edge in edges:
        tail, head, offset, weight = edge
        for v in (tail, head):
            if int(v) != v or not 0 <= v < vertex_count:
                raise ValueError("Vertex index {} out of range for {} vertices".format(v, vertex_count))
        offset = tuple(offset)
        if len(offset) != dimension:
            raise ValueError("Offset {} does not have length {}".format(offset, dimension))
        if any(int(x) != x for x in offset):
            raise ValueError("Offset {} is not an integer vector".format(offset))
        weight = float(weight)
        if not weight >= 0 or _math.isinf(weight):
            raise ValueError("Edge weight must be finite and non-negative, not {}".format(weight))
        key = canonical_orbit(int(tail), int(head), offset)
        if key in merged:
            merged[key] += weight
        else:
            merged[key] = weight
    stored = [EdgeOrbit(k[0], k[1], k[2], w) for k, w in sorted(merged.items())]
    return QuotientGraph(dimension, vertex_count, stored)


def darts_at(g, v):
    """The darts originating at vertex `v`.  A self-edge contributes both of
    its orientations, and so a true loop gives two darts with zero vector.

    :return: Tuple of :class:`Dart`.
    """
    g._check_vertex(v)
    return g._darts[v]


def degree(g, v):
    """Sum of the weights of the darts at `v`; loops count twice."""
    return sum(d.edge.weight for d in darts_at(g, v))


def is_true_loop(edge):
    return edge.tail == edge.head and _is_zero(edge.offset)


def is_positively_connected(g):
    """Is the quotient graph connected using only edges of positive weight?
    Offsets are ignored."""
    if g.vertex_count == 0:
        return False
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for dart in darts_at(g, v):
            if dart.edge.weight > 0 and dart.head not in seen:
                seen.add(dart.head)
                stack.append(dart.head)
    return len(seen) == g.vertex_count


def translate_offsets(g, v, offset):
    """Choose `offset . v` as the new representative of the orbit of `v`.
    Offsets of edges with one end at `v` shift accordingly; self-edges of `v`
    are unchanged.
    """
    g._check_vertex(v)
    offset = tuple(offset)
    edges = []
    for e in g.edges:
        new_offset = list(e.offset)
        if e.head == v:
            new_offset = [a - b for a, b in zip(new_offset, offset)]
        if e.tail == v:
            new_offset = [a + b for a, b in zip(new_offset, offset)]
        edges.append(EdgeOrbit(e.tail, e.head, tuple(new_offset), e.weight))
    return build_graph(g.dimension, g.vertex_count, edges)


def with_edge_weight(g, v0, v1, weight, offset=None):
    """Copy of `g` in which the orbit `(v0, v1, offset)` has the given weight,
    adding the orbit if absent.  The offset defaults to zero."""
    if offset is None:
        offset = (0,) * g.dimension
    key = canonical_orbit(v0, v1, offset)
    edges = [e for e in g.edges if (e.tail, e.head, e.offset) != key]
    edges.append(EdgeOrbit(key[0], key[1], key[2], weight))
    return build_graph(g.dimension, g.vertex_count, edges)


class PeriodMap():
    """The period homomorphism `rho`, stored as an `N x N` matrix whose
    columns are the images of the standard generators of `Z^N`."""
    def __init__(self, basis):
        basis = _np.array(basis, dtype=float)
        if basis.ndim == 1 and basis.size == 1:
            basis = basis.reshape((1, 1))
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ValueError("Period basis must be a square matrix, not shape {}".format(basis.shape))
        if not _np.all(_np.isfinite(basis)):
            raise ValueError("Period basis has non-finite entries")
        det = _np.linalg.det(basis)
        if abs(det) <= 1e-14 * max(1.0, _np.max(_np.abs(basis))) ** basis.shape[0]:
            raise ValueError("Period basis is singular")
        basis.flags.writeable = False
        self._basis = basis
        self._covolume = abs(float(det))

    @property
    def basis(self):
        """The matrix of basis vectors, as columns."""
        return self._basis

    @property
    def dimension(self):
        return self._basis.shape[0]

    @property
    def covolume(self):
        """Volume of a fundamental cell, `|det(basis)|`."""
        return self._covolume

    def vector(self, offset):
        """The translation `rho(gamma)` for an integer offset `gamma`."""
        return self._basis @ _np.asarray(offset, dtype=float)

    def __eq__(self, other):
        if not isinstance(other, PeriodMap):
            return NotImplemented
        return _np.array_equal(self._basis, other._basis)

    def __repr__(self):
        return "PeriodMap({})".format(self._basis.tolist())


class Realization():
    """Positions of the representatives of each vertex orbit, together with
    the period.  The vector of an edge `(i, j, gamma)` is
    `x_j + rho(gamma) - x_i`."""
    def __init__(self, positions, period):
        positions = _np.array(positions, dtype=float)
        if positions.ndim == 1:
            positions = positions.reshape((-1, period.dimension))
        if positions.ndim != 2 or positions.shape[1] != period.dimension:
            raise ValueError("Positions must have {} columns".format(period.dimension))
        if not _np.all(_np.isfinite(positions)):
            raise ValueError("Positions must be finite")
        positions.flags.writeable = False
        self._positions = positions
        self._period = period

    @property
    def positions(self):
        """Array of shape `(n, N)`."""
        return self._positions

    @property
    def period(self):
        """The :class:`PeriodMap`."""
        return self._period

    def dart_vector(self, v, dart):
        """The vector of a dart originating at `v`."""
        return self._positions[dart.head] + self._period.vector(dart.offset) - self._positions[v]

    def edge_vector(self, edge):
        return self._positions[edge.head] + self._period.vector(edge.offset) - self._positions[edge.tail]

    def __repr__(self):
        return "Realization({} @ {})".format(self._positions.tolist(), self._period)


def supercell(g, period, factors):
    """The quotient by the sublattice `diag(factors) Z^N`.

    Vertex `(v, c)`, for `c` a cell with `0 <= c_k < factors[k]` taken in
    lexicographic order, gets index `v * (number of cells) + (index of c)`.

    :return: Pair `(graph, period)`.
    """
    factors = [int(f) for f in factors]
    if len(factors) != g.dimension or any(f < 1 for f in factors):
        raise ValueError("Need {} positive integer factors, not {}".format(g.dimension, factors))
    cells = list(_itertools.product(*[range(f) for f in factors]))
    index = {c: k for k, c in enumerate(cells)}
    count = len(cells)
    edges = []
    for e in g.edges:
        for c in cells:
            target = [a + b for a, b in zip(c, e.offset)]
            reduced = tuple(t % f for t, f in zip(target, factors))
            offset = tuple(t // f for t, f in zip(target, factors))
            edges.append((e.tail * count + index[c], e.head * count + index[reduced], offset, e.weight))
    graph = build_graph(g.dimension, g.vertex_count * count, edges)
    basis = period.basis * _np.asarray(factors, dtype=float)[None, :]
    return graph, PeriodMap(basis)


def supercell_positions(realization, factors):
    """Positions of the supercell's vertices corresponding to `realization`,
    in the order used by :func:`supercell`."""
    cells = list(_itertools.product(*[range(int(f)) for f in factors]))
    rows = []
    for x in realization.positions:
        for c in cells:
            rows.append(x + realization.period.vector(c))
    return _np.array(rows)


def _unit_offsets(dimension, scale=1):
    for k in range(dimension):
        yield tuple(scale if i == k else 0 for i in range(dimension))


def _hexagonal(l=1.0, w0=1.0, w1=1.0):
    edges = [(0, 1, (0, 0), w1), (0, 1, (-1, 0), w1), (0, 1, (0, -1), w1),
             (0, 0, (0, 0), w0), (1, 1, (0, 0), w0)]
    basis = [[_math.sqrt(3) * l, _math.sqrt(3) / 2 * l], [0.0, 1.5 * l]]
    return build_graph(2, 2, edges), PeriodMap(basis)


def _cubic(N=3, a=1.0, m=1, l=1.0, w1=1.0):
    if int(m) != m or m < 1:
        raise ValueError("Edge multiple m must be a positive integer, not {}".format(m))
    edges = [(0, 0, offset, w1) for offset in _unit_offsets(N, int(m))]
    if a > 0:
        edges.append((0, 0, (0,) * N, a))
    return build_graph(N, 1, edges), PeriodMap(_np.eye(N) * l)


def _square(l=1.0, w1=1.0, a=0.0):
    return _cubic(N=2, a=a, m=1, l=l, w1=w1)


def _single_vertex(N=None, weights=None, w0=0.0, basis=None):
    if not weights:
        raise ValueError("The single_vertex preset needs a weight table")
    if N is None:
        N = len(next(iter(weights)))
    seen = {}
    for offset, w in weights.items():
        offset = tuple(int(x) for x in offset)
        if _is_zero(offset):
            w0 = w0 + w
            continue
        key = min(offset, _negate(offset))
        if key in seen and seen[key] != w:
            raise ValueError("Weights of {} and {} differ".format(offset, _negate(offset)))
        seen[key] = w
    edges = [(0, 0, k, w) for k, w in seen.items()]
    edges.append((0, 0, (0,) * N, w0))
    if basis is None:
        basis = _np.eye(N)
    return build_graph(N, 1, edges), PeriodMap(basis)


_PRESETS = {"hexagonal": _hexagonal, "square": _square, "cubic": _cubic,
            "single_vertex": _single_vertex}


def lattice_preset(name, **params):
    """Construct a standard periodic graph and its period.

    - "hexagonal": parameters `l, w0, w1`.  Two vertices with loops of weight
      `w0` and the hexagonal tiling's edges of weight `w1`; basis
      `u1 = (sqrt(3) l, 0)`, `u2 = (sqrt(3) l / 2, 3 l / 2)`.
    - "square": parameters `l, w1, a`; one vertex, edges along `u1, u2`,
      loop of weight `a` (omitted from darts when zero weight).
    - "cubic": parameters `N, a, m, l, w1`; one vertex, edges to `m u_k`,
      loop of weight `a`.
    - "single_vertex": parameters `weights` (offset -> weight, the zero
      offset meaning the loop), `w0`, `N`, `basis`.

    :return: Pair `(QuotientGraph, PeriodMap)`.
    """
    if name not in _PRESETS:
        raise KeyError("Unknown preset '{}'; expected one of {}".format(name, sorted(_PRESETS)))
    for key, value in params.items():
        if key in ("l", "w1", "sigma") and not value > 0:
            raise ValueError("Parameter {} must be positive, not {}".format(key, value))
        if key in ("w0", "a") and not value >= 0:
            raise ValueError("Parameter {} must be non-negative, not {}".format(key, value))
    return _PRESETS[name](**params)
