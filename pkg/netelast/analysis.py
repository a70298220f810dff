"""
analysis
~~~~~~~~

How edge weights control the loss of energy.

Part one concerns a single edge orbit `e = (v0, v1, 0)` joining distinct
vertex orbits.  As its weight `w` varies, the harmonic edge vector follows a
reciprocal law `z / (w + W)`, where `z` and `W` do not depend on `w`.
Contracting `e` raises the tension by exactly `outer(z, z) / (w + W)`.  We
fit `z` and `W` from harmonic solves, check that identity, and build the
"auxiliary" realization which fixes everything at the contracted solution
except `v1`.

Part two treats the simplest splitting: a net with a single vertex orbit
whose edges to `i` in `Z^N` have weights `w_i = w_{-i}`.  The vertex splits
across a half of the lattice `I`, and the loss of energy has a closed form.
When `w_i = F(s v_i)` for a symmetric function `F`, we evaluate the energy
loss ratio by truncated lattice sums, and we study linear blends of two
weight systems.
"""

import collections as _collections
import logging
import math as _math
import numpy as _np
from scipy import special as _special

from . import moves as _moves
from . import net as _net
from . import solver as _solver
from .utils import lattice as _lattice
from .utils import pool as _pool

_logger = logging.getLogger(__name__)

LossFit = _collections.namedtuple("LossFit", ["z", "W", "edge", "residual", "probes"])

LossIdentityReport = _collections.namedtuple("LossIdentityReport", ["tensor_deviation", "energy_deviation", "ok"])

SingleVertexSplit = _collections.namedtuple("SingleVertexSplit", ["x", "delta_energy", "ratio", "energy"])

HalfSpaceSums = _collections.namedtuple("HalfSpaceSums", ["z", "total", "energy", "loop"])

BlendResult = _collections.namedtuple("BlendResult", ["curve", "s_hat", "r_hat", "r0", "r1", "verified"])


class ConvergenceError(ValueError):
    """A truncated lattice sum did not settle."""
    pass


def _edge_vector(g, period, v0, v1):
    r = _solver.harmonic_realize(g, period)
    return r.positions[v1] - r.positions[v0]


def _check_edge(g, edge):
    v0, v1 = edge[0], edge[1]
    g._check_vertex(v0)
    g._check_vertex(v1)
    if v0 == v1:
        raise ValueError("Edge must join distinct vertex orbits, not {} and {}".format(v0, v1))
    if len(edge) > 2 and any(x != 0 for x in edge[2]):
        raise ValueError("Edge must have zero offset, not {}".format(edge[2]))
    return v0, v1


def extract_zW(g, period, edge, probes=(0.5, 2.0, 8.0)):
    """Fit `Phi(e) = z / (w + W)` for the edge `e = (v0, v1, 0)`.

    Two probe weights determine `W` from the ratio of edge lengths, and `z`;
    the third probe validates the fit.

    :param edge: Pair `(v0, v1)` or triple `(v0, v1, offset)` with zero offset.
    :param probes: Three distinct non-negative weights.

    :return: :class:`LossFit`.  `residual` is the relative error at the third
      probe.  If the edge vector vanishes identically, `z` is zero and `W` is
      `None`.
    """
    v0, v1 = _check_edge(g, edge)
    probes = tuple(float(w) for w in probes)
    if len(probes) != 3 or len(set(probes)) != 3 or min(probes) < 0:
        raise ValueError("Need three distinct non-negative probe weights, not {}".format(probes))
    vectors = [_edge_vector(_net.with_edge_weight(g, v0, v1, w), period, v0, v1) for w in probes]
    norms = [float(_np.linalg.norm(d)) for d in vectors]
    scale = max(1.0, float(_np.max(_np.abs(period.basis))))
    key = (v0, v1, (0,) * g.dimension)
    if max(norms) <= 1e-13 * scale:
        return LossFit(_np.zeros(g.dimension), None, key, 0.0, probes)
    (wa, wb, wc), (da, db, dc) = probes, vectors
    if min(norms[0], norms[1]) <= 1e-13 * scale:
        raise ValueError("Edge vector vanishes at some probes but not others: {}".format(norms))
    across = da - (da @ db) / (db @ db) * db
    if _np.linalg.norm(across) > 1e-8 * norms[0] or da @ db <= 0:
        raise ValueError("Edge vectors {} and {} are not parallel".format(da.tolist(), db.tolist()))
    ratio = norms[0] / norms[1]
    if abs(1 - ratio) <= 1e-15:
        raise ValueError("Edge length does not depend on the weight")
    W = (ratio * wa - wb) / (1 - ratio)
    z = da * (wa + W)
    residual = float(_np.linalg.norm(dc - z / (wc + W))) / max(norms[2], 1e-300)
    _logger.debug("Fitted z=%s W=%s with residual %s", z, W, residual)
    return LossFit(z, W, key, residual, probes)


def weight_bound(g, v1):
    """`b_11 - w`-style bound on `W`: the total weight of non-self darts at
    `v1`.  Subtract the weight of the edge itself to get the bound."""
    return sum(d.edge.weight for d in _net.darts_at(g, v1) if d.head != v1)


def contract_edge(g, v0, v1):
    """The graph with the zero-offset edge between `v0` and `v1` contracted."""
    return _moves.apply_contraction(g, _moves.ContractionCandidate(v0, v1, (0,) * g.dimension, 0.0))


def verify_loss_identity(g, period, fit, w, tolerance=1e-9):
    """Compare the contraction of `fit.edge` at weight `w` against the fitted
    law: the rise in tension is `outer(z, z) / (w + W)`, and the rise in
    energy is `(w + W) |Phi(e)|^2`.

    :return: :class:`LossIdentityReport` with relative deviations.
    """
    v0, v1 = fit.edge[0], fit.edge[1]
    weighted = _net.with_edge_weight(g, v0, v1, w)
    r = _solver.harmonic_realize(weighted, period)
    contracted = contract_edge(weighted, v0, v1)
    r_hat = _solver.harmonic_realize(contracted, period)
    tension, tension_hat = _solver.global_tension(weighted, r), _solver.global_tension(contracted, r_hat)
    scale = max(float(_np.linalg.norm(tension_hat)), 1e-300)
    if fit.W is None:
        expected = _np.zeros_like(tension)
        expected_energy = 0.0
    else:
        expected = _np.outer(fit.z, fit.z) / (w + fit.W)
        d = r.positions[v1] - r.positions[v0]
        expected_energy = (w + fit.W) * float(d @ d)
    tension_deviation = float(_np.linalg.norm(tension_hat - tension - expected)) / scale
    energy_gap = _solver.energy(contracted, r_hat) - _solver.energy(weighted, r)
    energy_deviation = abs(energy_gap - expected_energy) / scale
    ok = tension_deviation <= tolerance and energy_deviation <= tolerance
    return LossIdentityReport(tension_deviation, energy_deviation, ok)


def contracted_anchor(g, period, v0, v1):
    """Positions for `g` taken from the harmonic realization of the graph
    with `(v0, v1, 0)` contracted; `v1` sits on `v0`."""
    _check_edge(g, (v0, v1))
    r_hat = _solver.harmonic_realize(contract_edge(g, v0, v1), period)
    merged = v0 - 1 if v0 > v1 else v0
    rows = []
    for v in range(g.vertex_count):
        if v == v1:
            rows.append(r_hat.positions[merged])
        else:
            rows.append(r_hat.positions[v - 1 if v > v1 else v])
    return _net.Realization(_np.array(rows), period)


def auxiliary_realization(g, anchor, v1):
    """Move `v1` to the weighted average of its neighbours in `anchor`,
    making the realization harmonic around `v1`; all else stays fixed.

    :param anchor: A :class:`net.Realization` of `g`, usually from
      :func:`contracted_anchor`.
    """
    g._check_vertex(v1)
    total = 0.0
    weighted = _np.zeros(g.dimension)
    for dart in _net.darts_at(g, v1):
        if dart.head == v1:
            continue
        w = dart.edge.weight
        total += w
        weighted += w * (anchor.positions[dart.head] + anchor.period.vector(dart.offset))
    if not total > 0:
        raise ValueError("Vertex {} has no positive weight to other vertex orbits".format(v1))
    positions = _np.array(anchor.positions)
    positions[v1] = weighted / total
    return _net.Realization(positions, anchor.period)


def auxiliary_weight(g, v0, v1):
    """`W^(a)`: the non-self weight at `v1` less that of `(v0, v1, 0)`."""
    key = _net.canonical_orbit(v0, v1, (0,) * g.dimension)
    w = sum(e.weight for e in g.edges if (e.tail, e.head, e.offset) == key)
    return weight_bound(g, v1) - w


class WeightFunction():
    """A symmetric weight system on `Z^N`: evaluates `w_i = F(s v_i)`.
    Construct with :meth:`gaussian`, :meth:`table` or :meth:`linear_blend`.
    """
    def __init__(self, kind, params):
        self._kind = kind
        self._params = params

    @classmethod
    def gaussian(cls, sigma):
        """The normal density `(2 pi sigma^2)^(-N/2) exp(-|x|^2 / 2 sigma^2)`."""
        if not sigma > 0:
            raise ValueError("Gaussian width must be positive, not {}".format(sigma))
        return cls("gaussian", {"sigma": float(sigma)})

    @classmethod
    def table(cls, weights):
        """Finite support: map from integer offset to weight; the zero offset
        is the loop.  Missing negatives are filled in by symmetry."""
        symmetric = {}
        for offset, w in weights.items():
            offset = tuple(int(x) for x in offset)
            if not w >= 0:
                raise ValueError("Weight of {} must be non-negative, not {}".format(offset, w))
            for key in (offset, tuple(-x for x in offset)):
                if key in symmetric and symmetric[key] != w:
                    raise ValueError("Weights of {} and its negative differ".format(offset))
                symmetric[key] = float(w)
        if len({len(k) for k in symmetric}) != 1:
            raise ValueError("Offsets of differing lengths in {}".format(sorted(symmetric)))
        return cls("table", {"weights": symmetric})

    @classmethod
    def linear_blend(cls, first, second, s):
        """`(1 - s) first + s second`."""
        if not 0 <= s <= 1:
            raise ValueError("Blend ratio must lie in [0,1], not {}".format(s))
        return cls("linear_blend", {"first": as_weight_function(first),
                                    "second": as_weight_function(second), "s": float(s)})

    @property
    def kind(self):
        return self._kind

    @property
    def params(self):
        return self._params

    def at_zero(self, N):
        """`F(0)`: the loop weight."""
        if self._kind == "gaussian":
            return (2 * _math.pi * self._params["sigma"] ** 2) ** (-N / 2)
        if self._kind == "table":
            return self._params["weights"].get((0,) * N, 0.0)
        s = self._params["s"]
        return (1 - s) * self._params["first"].at_zero(N) + s * self._params["second"].at_zero(N)

    def support_radius(self, scale, basis):
        """Radius in realized space beyond which weights are negligible."""
        norm = float(_np.max(_np.linalg.norm(basis, axis=0)))
        if self._kind == "gaussian":
            N = basis.shape[0]
            t = 32.0
            while _special.gammaincc(N / 2 + 1, t) > 1e-12:
                t *= 1.5
            return max(self._params["sigma"] / scale * _math.sqrt(2 * t), 3 * norm)
        if self._kind == "table":
            lengths = [float(_np.linalg.norm(basis @ _np.asarray(k, dtype=float)))
                       for k in self._params["weights"]]
            return max(lengths + [norm])
        return max(self._params["first"].support_radius(scale, basis),
                   self._params["second"].support_radius(scale, basis))

    def __repr__(self):
        if self._kind == "table":
            return "WeightFunction(table, {} offsets)".format(len(self._params["weights"]))
        return "WeightFunction({}, {})".format(self._kind, self._params)


def as_weight_function(weights):
    if isinstance(weights, WeightFunction):
        return weights
    return WeightFunction.table(weights)


def half_space_mask(offsets, vectors, u):
    """Membership of the half-space `I_u`: `u . v > 0`, ties broken
    lexicographically on the offset so that `Z^N = I, -I, {0}` disjointly."""
    offsets = _np.atleast_2d(offsets)
    vectors = _np.atleast_2d(vectors)
    u = _np.asarray(u, dtype=float)
    dots = vectors @ u
    tie = 1e-12 * _np.linalg.norm(u) * _np.sqrt(_np.sum(vectors * vectors, axis=1))
    return (dots > tie) | ((_np.abs(dots) <= tie) & _lattice.lexicographically_positive(offsets))


def _accumulate(offsets, vectors, weights, inside):
    w = weights[inside]
    v = vectors[inside]
    return w @ v, float(_np.sum(w)), float(w @ _np.sum(v * v, axis=1))


def half_space_sums(F, basis, s=1.0, u=None, radius=None, index_set=None):
    """The sums over the half `I` of the lattice of `w_i v_i`, `w_i` and
    `w_i |v_i|^2`, with `w_i = F(s v_i)`, plus the loop weight `F(0)`.

    :param u: Normal of the half-space `I_u`, in realized coordinates.
    :param index_set: Alternatively, an explicit collection of offsets for `I`
      (table weights only).

    :return: :class:`HalfSpaceSums`.
    """
    F = as_weight_function(F)
    basis = _np.asarray(basis, dtype=float)
    N = basis.shape[0]
    if not s > 0:
        raise ValueError("Scale must be positive, not {}".format(s))
    if F.kind == "linear_blend":
        t = F.params["s"]
        first = half_space_sums(F.params["first"], basis, s, u, radius, index_set)
        second = half_space_sums(F.params["second"], basis, s, u, radius, index_set)
        return HalfSpaceSums(*[(1 - t) * a + t * b for a, b in zip(first, second)])
    if (u is None) == (index_set is None):
        raise ValueError("Specify exactly one of a half-space normal or an index set")
    z, total, energy = _np.zeros(N), 0.0, 0.0
    if F.kind == "table":
        items = [(k, w) for k, w in sorted(F.params["weights"].items()) if any(x != 0 for x in k)]
        if items and len(items[0][0]) != N:
            raise ValueError("Offsets have length {} but basis has dimension {}".format(len(items[0][0]), N))
        if not items:
            return HalfSpaceSums(z, total, energy, F.at_zero(N))
        offsets = _np.array([k for k, _ in items], dtype=int)
        weights = _np.array([w for _, w in items])
        vectors = offsets @ basis.T
        if index_set is not None:
            chosen = {tuple(int(x) for x in k) for k in index_set}
            inside = _np.array([k in chosen for k, _ in items])
            for k, _ in items:
                if (k in chosen) == (tuple(-x for x in k) in chosen):
                    raise ValueError("Index set must contain exactly one of {} and its negative".format(k))
        else:
            inside = half_space_mask(offsets, vectors, u)
        z, total, energy = _accumulate(offsets, vectors, weights, inside)
        return HalfSpaceSums(z, total, energy, F.at_zero(N))
    if index_set is not None:
        raise ValueError("An explicit index set needs finitely supported weights")
    if radius is None:
        radius = F.support_radius(s, basis)
    sigma = F.params["sigma"]
    norm = (2 * _math.pi * sigma ** 2) ** (-N / 2)
    for offsets, vectors in _lattice.lattice_chunks(basis, radius):
        lengths2 = _np.sum(vectors * vectors, axis=1)
        weights = norm * _np.exp(-(s * s) * lengths2 / (2 * sigma ** 2))
        a, b, c = _accumulate(offsets, vectors, weights, half_space_mask(offsets, vectors, u))
        z, total, energy = z + a, total + b, energy + c
    return HalfSpaceSums(z, total, energy, F.at_zero(N))


def loss_ratio(sums, p):
    """`|z|^2 / ((p F(0) + sum w) sum w |v|^2)`; zero if the denominator is."""
    denominator = (p * sums.loop + sums.total) * sums.energy
    if not denominator > 0:
        return 0.0
    return float(sums.z @ sums.z) / denominator


def single_vertex_split(weights, period, p, u=None, index_set=None):
    """Closed form for splitting the single vertex of a net with weights
    `w_i` across `I`: the new vertex goes to `x = z / (p w_0 + sum_I w)` with
    `z = sum_I w_i v_i`, and the energy drops by `|z|^2 / (p w_0 + sum_I w)`.

    :param weights: Map from offset to weight; the zero offset is the loop.
    :param period: :class:`net.PeriodMap` or basis matrix.
    :param p: Fraction of the loop weight which becomes the new edge.

    :return: :class:`SingleVertexSplit`; `energy` is the energy before.
    """
    if not 0 <= p <= 1:
        raise ValueError("Loop fraction must lie in [0,1], not {}".format(p))
    basis = period.basis if isinstance(period, _net.PeriodMap) else _np.asarray(period, dtype=float)
    sums = half_space_sums(WeightFunction.table(weights), basis, 1.0, u, None, index_set)
    if not sums.total > 0:
        raise ValueError("No positive weight in the chosen half of the lattice")
    if not sums.energy > 0:
        raise ValueError("Energy is zero")
    denominator = p * sums.loop + sums.total
    x = sums.z / denominator
    delta = float(sums.z @ sums.z) / denominator
    return SingleVertexSplit(x, delta, delta / sums.energy, sums.energy)


def ratio_at(F, u, p, s, basis=None, radius=None):
    """`R(s, p)` from truncated lattice sums, checked by doubling the radius.

    :raises ConvergenceError: If doubling moves the ratio by more than 1e-9
      relative.
    """
    F = as_weight_function(F)
    if basis is None:
        basis = _np.eye(len(u))
    basis = _np.asarray(basis, dtype=float)
    if radius is None:
        radius = F.support_radius(s, basis)
    ratio = loss_ratio(half_space_sums(F, basis, s, u, radius), p)
    if F.kind == "table":
        return ratio
    check = loss_ratio(half_space_sums(F, basis, s, u, 2 * radius), p)
    if abs(check - ratio) > 1e-9 * max(abs(check), 1e-300) and abs(check - ratio) > 1e-15:
        raise ConvergenceError("Lattice sum at s={} not converged: {} at radius {}, {} at {}".format(
            s, ratio, radius, check, 2 * radius))
    return ratio


def limit_ratio(F, u, p, s_grid, basis=None, radius=None, workers=None):
    """Evaluate `R(s, p)` over a grid of scales.

    :return: List of pairs `(s, R)`.
    """
    if not 0 <= p <= 1:
        raise ValueError("Loop fraction must lie in [0,1], not {}".format(p))
    def evaluate(s):
        return (s, ratio_at(F, u, p, s, basis, radius))
    return _pool.ordered_map(evaluate, list(s_grid), workers)


def gaussian_limit_ratio(N):
    """Limit of `R` for Gaussian weights as the width grows: `2 / (N pi)`."""
    if N < 1:
        raise ValueError("Dimension must be positive, not {}".format(N))
    return 2.0 / (N * _math.pi)


def gaussian_blend_limit(mu, N, s):
    """Limit ratio for the blend of Gaussians of widths `sigma` and
    `mu sigma`: `2 (1-s+s mu)^2 / (N pi (1-s+s mu^2))`."""
    if not mu > 0:
        raise ValueError("Width ratio must be positive, not {}".format(mu))
    return 2 * (1 - s + s * mu) ** 2 / (N * _math.pi * (1 - s + s * mu * mu))


def cube_lattice_tables(N, a, m):
    """Weight tables of two cube lattices: unit edges to `e_k`, and to
    `m e_k`, each with a loop of weight `a`."""
    if int(m) != m or m < 1:
        raise ValueError("Edge multiple must be a positive integer, not {}".format(m))
    zero = (0,) * N
    first, second = {zero: float(a)}, {zero: float(a)}
    for k in range(N):
        first[tuple(1 if i == k else 0 for i in range(N))] = 1.0
        second[tuple(int(m) if i == k else 0 for i in range(N))] = 1.0
    return first, second


def blend_analysis(w0, w1, p, s_grid, u=None, basis=None, radius=None):
    """Energy loss ratio `R_s` of the blend `(1-s) w0 + s w1`.

    All the sums are linear in the weights, so each material is summed once.
    The minimum is at `s_hat = sqrt(W0 E0) / (sqrt(W0 E0) + sqrt(W1 E1))`
    when `R_0 = R_1`, with `W_k = p w_k(0) + sum_I w_k`.

    :param u: Half-space normal; defaults to `(1, ..., 1)`.

    :return: :class:`BlendResult`.  `verified` is `None` unless
      `R_0 = R_1` (to 1e-9), in which case it records whether `R_s <= R_0`
      on the grid and the grid minimum lies within one cell of `s_hat`.
    """
    w0, w1 = as_weight_function(w0), as_weight_function(w1)
    if basis is None:
        if w0.kind == "table":
            N = len(next(iter(w0.params["weights"])))
        elif u is not None:
            N = len(u)
        else:
            raise ValueError("Cannot infer the dimension; give a basis")
        basis = _np.eye(N)
    basis = _np.asarray(basis, dtype=float)
    N = basis.shape[0]
    if u is None:
        u = _np.ones(N)
    if radius is None:
        radius = max(w0.support_radius(1.0, basis), w1.support_radius(1.0, basis))
    first = half_space_sums(w0, basis, 1.0, u, radius)
    second = half_space_sums(w1, basis, 1.0, u, radius)
    bar0, bar1 = p * first.loop + first.total, p * second.loop + second.total
    if not (first.energy > 0 and second.energy > 0 and bar0 > 0 and bar1 > 0):
        raise ValueError("Both materials need positive energy and weight")
    def ratio(s):
        z = (1 - s) * first.z + s * second.z
        return float(z @ z) / (((1 - s) * bar0 + s * bar1) * ((1 - s) * first.energy + s * second.energy))
    grid = sorted(float(s) for s in s_grid)
    curve = [(s, ratio(s)) for s in grid]
    a, b = _math.sqrt(bar0 * first.energy), _math.sqrt(bar1 * second.energy)
    s_hat = a / (a + b)
    r0, r1 = ratio(0.0), ratio(1.0)
    verified = None
    if abs(r0 - r1) <= 1e-9 * max(r0, r1, 1e-300) and curve:
        below = all(r <= r0 * (1 + 1e-12) + 1e-15 for _, r in curve)
        best = min(range(len(curve)), key=lambda k: curve[k][1])
        cell = max([grid[k + 1] - grid[k] for k in range(len(grid) - 1)] + [0.0])
        values = [r for _, r in curve]
        flat = max(values) - min(values) <= 1e-12 * max(r0, 1e-300)
        verified = below and (flat or abs(grid[best] - s_hat) <= cell + 1e-12)
    return BlendResult(curve, s_hat, ratio(s_hat), r0, r1, verified)
