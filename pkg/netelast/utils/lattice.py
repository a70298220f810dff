"""
lattice
~~~~~~~

Small helpers for working with the period lattice `Z^N` and with symmetric
`N x N` matrices: enumerating the lattice points inside a ball, and sorted
eigen-decompositions with a normalised sign convention.
"""

import itertools as _itertools
import math as _math
import numpy as _np
from scipy import linalg as _linalg


def offset_box(basis, centre, radius):
    """Integer ranges, one per coordinate, which contain every `gamma` with
    `|centre + basis @ gamma| <= radius`.

    :param basis: `N x N` matrix whose columns are the images of the
      standard generators.
    :param centre: Length `N` vector.
    :param radius: Non-negative radius.

    :return: List of `range` objects.
    """
    basis = _np.asarray(basis, dtype=float)
    inverse = _np.linalg.inv(basis)
    middle = -inverse @ _np.asarray(centre, dtype=float)
    spans = _np.linalg.norm(inverse, axis=1) * radius
    ranges = []
    for mid, span in zip(middle, spans):
        low = _math.ceil(mid - span - 1e-9)
        high = _math.floor(mid + span + 1e-9)
        ranges.append(range(low, high + 1))
    return ranges


def offsets_in_ball(basis, centre, radius):
    """All integer vectors `gamma` with `|centre + basis @ gamma| <= radius`,
    paired with that distance, in lexicographic order of `gamma`.

    :return: List of pairs `(gamma, distance)` with `gamma` a tuple of ints.
    """
    basis = _np.asarray(basis, dtype=float)
    centre = _np.asarray(centre, dtype=float)
    found = []
    for gamma in _itertools.product(*offset_box(basis, centre, radius)):
        distance = float(_np.linalg.norm(centre + basis @ _np.asarray(gamma, dtype=float)))
        if distance <= radius:
            found.append((tuple(gamma), distance))
    return found


def normalise_sign(vector):
    """Flip the sign of `vector` so that its first non-negligible component
    is positive."""
    vector = _np.array(vector, dtype=float)
    scale = _np.max(_np.abs(vector)) if vector.size > 0 else 0.0
    for x in vector:
        if abs(x) > 1e-12 * scale:
            if x < 0:
                vector = -vector
            break
    return vector


def symmetric_eigh(matrix):
    """Eigen-decomposition of a symmetric matrix.

    :return: Pair `(values, vectors)`, eigenvalues ascending, eigenvectors as
      columns, each with its sign normalised by :func:`normalise_sign`.
    """
    matrix = _np.asarray(matrix, dtype=float)
    values, vectors = _linalg.eigh((matrix + matrix.T) / 2, check_finite=False)
    for k in range(vectors.shape[1]):
        vectors[:, k] = normalise_sign(vectors[:, k])
    return values, vectors


def lattice_chunks(basis, radius, chunk_size=100000):
    """Vectorised enumeration of the non-zero lattice points `gamma` with
    `|basis @ gamma| <= radius`, for large lattice sums.

    :return: Generator of pairs `(offsets, vectors)`: an integer array of
      shape `(k, N)` and the array `offsets @ basis.T`.
    """
    basis = _np.asarray(basis, dtype=float)
    N = basis.shape[0]
    ranges = offset_box(basis, _np.zeros(N), radius)
    if N > 1:
        grids = _np.meshgrid(*[_np.arange(r.start, r.stop) for r in ranges[1:]], indexing="ij")
        rest = _np.stack([g.ravel() for g in grids], axis=1)
    else:
        rest = _np.zeros((1, 0), dtype=int)
    per_chunk = max(1, chunk_size // len(rest))
    firsts = _np.arange(ranges[0].start, ranges[0].stop)
    for start in range(0, len(firsts), per_chunk):
        block = firsts[start:start + per_chunk]
        offsets = _np.hstack([_np.repeat(block, len(rest))[:, None], _np.tile(rest, (len(block), 1))])
        vectors = offsets @ basis.T
        lengths = _np.sqrt(_np.sum(vectors * vectors, axis=1))
        keep = (lengths <= radius) & _np.any(offsets != 0, axis=1)
        if _np.any(keep):
            yield offsets[keep], vectors[keep]


def lexicographically_positive(offsets):
    """Boolean mask: is the first non-zero entry of each row positive?  Zero
    rows give `False`."""
    offsets = _np.atleast_2d(_np.asarray(offsets))
    nonzero = offsets != 0
    first = _np.argmax(nonzero, axis=1)
    values = offsets[_np.arange(len(offsets)), first]
    return _np.any(nonzero, axis=1) & (values > 0)
