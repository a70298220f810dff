"""
solver
~~~~~~

Harmonic realizations, energy and tension tensors.

A realization is harmonic when, at every vertex, the weighted edge vectors of
the darts there sum to zero.  With the gauge `x_0 = 0` this is the linear
system `B00 x = c`, where `B00` is the weighted graph Laplacian with the row
and column of vertex 0 removed, and `c_i = sum_{j, gamma} w_{ij gamma} rho(gamma)`
over darts at `i`.  Self-edges cancel out of both sides.

Tensors are returned as plain symmetric `numpy` arrays.
"""

import collections as _collections
import logging
import numpy as _np
from scipy import linalg as _linalg

from . import net as _net
from .utils import lattice as _lattice

_logger = logging.getLogger(__name__)

LaplacianSystem = _collections.namedtuple("LaplacianSystem", ["b00", "rhs"])


class SingularSystemError(ValueError):
    """The harmonic system, or a tension tensor, is singular."""
    pass


def laplacian_system(g, period):
    """Assemble the reduced Laplacian `B00` (order `n-1`) and right-hand side
    (shape `(n-1, N)`), for vertices `1 .. n-1`."""
    n, N = g.vertex_count, g.dimension
    laplacian = _np.zeros((n, n))
    rhs = _np.zeros((n, N))
    for e in g.edges:
        if e.tail == e.head or e.weight == 0:
            continue
        i, j, w = e.tail, e.head, e.weight
        shift = period.vector(e.offset)
        laplacian[i, i] += w
        laplacian[j, j] += w
        laplacian[i, j] -= w
        laplacian[j, i] -= w
        rhs[i] += w * shift
        rhs[j] -= w * shift
    return LaplacianSystem(laplacian[1:, 1:], rhs[1:])


def harmonic_realize(g, period):
    """Solve for the harmonic realization with `x_0 = 0`.

    :param g: A positively connected :class:`net.QuotientGraph`.
    :param period: The :class:`net.PeriodMap`.

    :return: A :class:`net.Realization`.
    """
    if period.dimension != g.dimension:
        raise ValueError("Period has dimension {} but graph has {}".format(period.dimension, g.dimension))
    if not _net.is_positively_connected(g):
        raise SingularSystemError("Positive-weight edges do not connect the {} vertex orbits".format(g.vertex_count))
    positions = _np.zeros((g.vertex_count, g.dimension))
    if g.vertex_count > 1:
        system = laplacian_system(g, period)
        try:
            factor = _linalg.cho_factor(system.b00, lower=True, check_finite=False)
        except _np.linalg.LinAlgError as ex:
            _logger.debug("Cholesky factorisation failed: %s", ex)
            raise SingularSystemError("Reduced Laplacian is not positive definite, cause: {}/{}".format(type(ex), ex))
        positions[1:] = _linalg.cho_solve(factor, system.rhs, check_finite=False)
    return _net.Realization(positions, period)


def harmonic_residual(g, r):
    """Norm of `sum_{darts at v} w * (dart vector)` for each vertex `v`."""
    residuals = []
    for v in range(g.vertex_count):
        total = _np.zeros(g.dimension)
        for dart in _net.darts_at(g, v):
            total += dart.edge.weight * r.dart_vector(v, dart)
        residuals.append(float(_np.linalg.norm(total)))
    return _np.array(residuals)


def covolume(period):
    return period.covolume


def energy(g, r):
    """Twice the potential energy per period: the sum over unoriented edge
    orbits of `w |edge vector|^2`.  True loops contribute zero."""
    total = 0.0
    for e in g.edges:
        vector = r.edge_vector(e)
        total += e.weight * float(vector @ vector)
    return total


def local_tension(g, r, v):
    """`sum_{darts at v} w * outer(vector, vector)`."""
    tension = _np.zeros((g.dimension, g.dimension))
    for dart in _net.darts_at(g, v):
        vector = r.dart_vector(v, dart)
        tension += dart.edge.weight * _np.outer(vector, vector)
    return tension


def global_tension(g, r):
    """Tension per period: half the sum of the local tensions, which is the
    sum over unoriented orbits of `w * outer(vector, vector)`.  Its trace is
    the energy."""
    tension = _np.zeros((g.dimension, g.dimension))
    for e in g.edges:
        vector = r.edge_vector(e)
        tension += e.weight * _np.outer(vector, vector)
    return tension


def per_weight_tension(g, r):
    """Global tension divided by the total (unoriented) weight."""
    total = g.total_weight()
    if not total > 0:
        raise ValueError("Total edge weight is zero")
    return global_tension(g, r) / total


def ellipsoid_matrix(g, r):
    """The matrix `M` of the tension ellipsoid `{x : x^T M x = 1}`, that is
    the inverse of the tension per weight."""
    tension = per_weight_tension(g, r)
    values, vectors = _lattice.symmetric_eigh(tension)
    if not values[0] > 1e-12 * max(values[-1], 0.0):
        raise SingularSystemError("Tension is singular; the net is flat in some direction")
    return (vectors / values[None, :]) @ vectors.T


def apply_linear(r, A):
    """The action of `A` on a net: positions and period both map by `A`."""
    A = _np.asarray(A, dtype=float)
    N = r.period.dimension
    if A.shape != (N, N):
        raise ValueError("Linear map must have shape {}, not {}".format((N, N), A.shape))
    if abs(_np.linalg.det(A)) <= 1e-14:
        raise ValueError("Linear map is singular")
    period = _net.PeriodMap(A @ r.period.basis)
    return _net.Realization(r.positions @ A.T, period)


def conjugate(T, A):
    """`A T A^T`: how a tension tensor transforms under `A`."""
    A = _np.asarray(A, dtype=float)
    return A @ T @ A.T


def is_standard(T, tolerance=1e-8):
    """Is the tension a scalar matrix, to the given relative tolerance?"""
    T = _np.asarray(T, dtype=float)
    trace = _np.trace(T)
    if not trace > 0:
        return False
    isotropic = _np.eye(T.shape[0]) * trace / T.shape[0]
    return _np.linalg.norm(T - isotropic) <= tolerance * trace


def standardize(g, period):
    """Find the standard realization of fixed covolume.

    Solves for the harmonic realization, then applies `A = det(S)^(-1/N) S`
    with `S = T^(-1/2)` the symmetric inverse root of the global tension.  The
    result is again harmonic, has scalar tension and the same covolume.

    :return: Pair `(realization, A)`.
    """
    harmonic = harmonic_realize(g, period)
    tension = global_tension(g, harmonic)
    values, vectors = _lattice.symmetric_eigh(tension)
    if not values[0] > 1e-12 * max(values[-1], 0.0):
        raise SingularSystemError("Global tension {} is not positive definite".format(values.tolist()))
    roots = 1.0 / _np.sqrt(values)
    S = (vectors * roots[None, :]) @ vectors.T
    scale = _np.prod(roots) ** (-1.0 / g.dimension)
    A = scale * S
    return apply_linear(harmonic, A), A
