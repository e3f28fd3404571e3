"""Small linear-algebra kernel for the stiffness/damping ellipsoids.

Vectors are plain ``(3,)`` float64 arrays, bases are ``(3, 3)`` arrays whose
columns are the basis vectors.
"""
from __future__ import annotations

import math

import numpy as np

EPS_NORM = 1e-9

# |u1 . z| above this switches the basis helper axis from z to x
_HELPER_SWITCH = 0.999

_X = np.array([1.0, 0.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])

IDENTITY_BASIS = np.eye(3)
IDENTITY_BASIS.setflags(write=False)


class DegenerateVector(ValueError):
    """A vector is too short to define a direction."""


class InvalidParams(ValueError):
    """Stiffness, damping or ellipsoid parameters out of range."""


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return np.array([x, y, z], dtype=np.float64)


def norm(v: np.ndarray) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def normalize(v: np.ndarray, eps: float = EPS_NORM) -> np.ndarray:
    """Return ``v / ||v||``; raises DegenerateVector when ``||v|| <= eps``."""
    n = norm(v)
    if not n > eps:
        raise DegenerateVector(f"cannot normalize vector of norm {n:g}")
    return np.asarray(v, dtype=np.float64) / n


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross is slow on (3,) inputs, this is called every control step
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def build_basis(motion: np.ndarray, fallback: np.ndarray = IDENTITY_BASIS) -> np.ndarray:
    """Right-handed orthonormal basis whose first column is along ``motion``.

    A motion vector with norm at or below ``EPS_NORM`` returns ``fallback``
    unchanged.
    """
    n = norm(motion)
    if not n > EPS_NORM:
        return fallback
    u1 = np.asarray(motion, dtype=np.float64) / n
    helper = _Z if abs(u1[2]) < _HELPER_SWITCH else _X
    u2 = _cross(helper, u1)
    u2 /= norm(u2)
    u3 = _cross(u1, u2)
    return np.column_stack((u1, u2, u3))


def ellipsoid_matrix(basis: np.ndarray, major: float, minor: float) -> np.ndarray:
    """``U diag(major, minor, minor) U^T`` for an orthonormal basis ``U``."""
    if not minor > 0.0:
        raise InvalidParams(f"minor axis must be positive, got {minor!r}")
    if major < minor:
        raise InvalidParams(f"major axis {major!r} smaller than minor axis {minor!r}")
    m = (basis * np.array([major, minor, minor])) @ basis.T
    # round-off can leave the product asymmetric in the last ulp
    return 0.5 * (m + m.T)


def damping_from_stiffness(k: float, zeta: float) -> float:
    """Damping ``2*zeta*sqrt(k)`` for a unit-mass spring of stiffness ``k``."""
    if not k > 0.0 or not zeta > 0.0:
        raise InvalidParams(f"stiffness and damping ratio must be positive (k={k!r}, zeta={zeta!r})")
    return 2.0 * zeta * math.sqrt(k)


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned angle in ``[0, pi]`` between two non-degenerate vectors."""
    na, nb = norm(a), norm(b)
    if not (na > EPS_NORM and nb > EPS_NORM):
        raise DegenerateVector(f"angle undefined for norms {na:g}, {nb:g}")
    c = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb)
    return math.acos(min(1.0, max(-1.0, c)))
