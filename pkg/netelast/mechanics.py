"""
mechanics
~~~~~~~~~

Stress from tension, and closed forms for uniaxial extension.

Uniaxial extension by `lambda` along the first axis of a rotated frame `R` is
`A(lambda) = R diag(lambda, lambda^(-1/(N-1)), ...) R^T`, which has
determinant one.  As harmonic realizations transform linearly, the energy
along this family is `E = tau_11 lambda^2 + (tau_22 + ... + tau_NN)
lambda^(-2/(N-1))` where `tau = R^T T R` is the reference tension in the
extension frame.
"""

import collections as _collections
import math as _math
import numpy as _np

StressState = _collections.namedtuple("StressState", ["cauchy", "deviatoric", "volume"])


def rotation_2d(theta):
    """Rotation of the plane by `theta` radians."""
    c, s = _math.cos(theta), _math.sin(theta)
    return _np.array([[c, -s], [s, c]])


def check_rotation(rotation, N):
    """Validate, and return as an array, an `N x N` orthogonal matrix.  `None`
    means the identity."""
    if rotation is None:
        return _np.eye(N)
    rotation = _np.asarray(rotation, dtype=float)
    if rotation.shape != (N, N):
        raise ValueError("Rotation must have shape {}, not {}".format((N, N), rotation.shape))
    if _np.max(_np.abs(rotation.T @ rotation - _np.eye(N))) > 1e-9:
        raise ValueError("Matrix {} is not orthogonal".format(rotation.tolist()))
    return rotation


def _check_dimension(N):
    if N < 2:
        raise ValueError("Uniaxial extension needs dimension at least 2, not {}".format(N))


def uniaxial_map(stretch, N, rotation=None):
    """`R diag(stretch, stretch^(-1/(N-1)), ...) R^T`."""
    _check_dimension(N)
    if not stretch > 0:
        raise ValueError("Stretch must be positive, not {}".format(stretch))
    rotation = check_rotation(rotation, N)
    diagonal = [stretch] + [stretch ** (-1.0 / (N - 1))] * (N - 1)
    return rotation @ _np.diag(diagonal) @ rotation.T


def cauchy_stress(T, V):
    """Cauchy stress `(2/V) T` and its deviatoric (trace free) part."""
    if not V > 0:
        raise ValueError("Volume must be positive, not {}".format(V))
    T = _np.asarray(T, dtype=float)
    cauchy = 2.0 * T / V
    deviatoric = cauchy - _np.eye(T.shape[0]) * _np.trace(cauchy) / T.shape[0]
    return StressState(cauchy, deviatoric, V)


def frame_tension(T_ref, rotation=None):
    """The reference tension in the extension frame, `R^T T R`."""
    T_ref = _np.asarray(T_ref, dtype=float)
    rotation = check_rotation(rotation, T_ref.shape[0])
    return rotation.T @ T_ref @ rotation


def _split_trace(T_ref, rotation):
    tau = frame_tension(T_ref, rotation)
    _check_dimension(tau.shape[0])
    return tau[0, 0], _np.trace(tau) - tau[0, 0], tau.shape[0]


def energy_profile(T_ref, stretch, rotation=None):
    """Energy and its derivative along uniaxial extension.

    :return: Pair `(E, dE/dlambda)`.
    """
    if not stretch > 0:
        raise ValueError("Stretch must be positive, not {}".format(stretch))
    along, across, N = _split_trace(T_ref, rotation)
    power = -2.0 / (N - 1)
    energy = along * stretch ** 2 + across * stretch ** power
    derivative = 2.0 * (along * stretch - across / (N - 1) * stretch ** (power - 1))
    return energy, derivative


def engineering_stress(T_ref, V, stretch, rotation=None):
    """Force per undeformed cross-section, `(1/V) dE/dlambda`."""
    if not V > 0:
        raise ValueError("Volume must be positive, not {}".format(V))
    return energy_profile(T_ref, stretch, rotation)[1] / V


def true_stress(T_ref, V, stretch, rotation=None):
    """Force per deformed cross-section, `lambda` times the engineering stress."""
    return stretch * engineering_stress(T_ref, V, stretch, rotation)


def permanent_strain(T_ref, rotation=None):
    """The strain at which the engineering stress vanishes."""
    along, across, N = _split_trace(T_ref, rotation)
    if not along > 0:
        raise ValueError("Tension along the extension axis must be positive, not {}".format(along))
    return (across / ((N - 1) * along)) ** ((N - 1) / (2.0 * N)) - 1.0


def youngs_modulus(E0, V, N):
    """Young's modulus `4 E0 / ((N-1) V)` of a standard net."""
    _check_dimension(N)
    if not E0 > 0 or not V > 0:
        raise ValueError("Energy and volume must be positive, not {} and {}".format(E0, V))
    return 4.0 * E0 / ((N - 1) * V)


def neo_hookean_energy_density(E0, V, N, stretches):
    """Strain energy density `(E0 / (N V)) (sum lambda_i^2 - N)` of a standard
    net deformed by `diag(stretches)`, which must have product one."""
    stretches = _np.asarray(stretches, dtype=float)
    if stretches.shape != (N,):
        raise ValueError("Need {} principal stretches, not {}".format(N, stretches.shape))
    if abs(_np.prod(stretches) - 1.0) > 1e-9:
        raise ValueError("Principal stretches {} do not preserve volume".format(stretches.tolist()))
    return E0 / (N * V) * (float(stretches @ stretches) - N)
