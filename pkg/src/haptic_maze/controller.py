"""Translational Cartesian impedance controller with self-tuning ellipsoids."""
from __future__ import annotations

import enum
from functools import cached_property
from dataclasses import dataclass, field, replace

import numpy as np

from .vecmath import (
    EPS_NORM,
    IDENTITY_BASIS,
    InvalidParams,
    build_basis,
    damping_from_stiffness,
    ellipsoid_matrix,
    norm,
)


class ProfileMode(str, enum.Enum):
    HIGH_CONSTANT = "HighConstant"
    LOW_CONSTANT = "LowConstant"
    SELF_TUNING = "SelfTuning"


@dataclass(frozen=True)
class StiffnessParams:
    k_max: float = 1000.0  # N/m
    k_min: float = 300.0  # N/m
    zeta: float = 0.7

    def __post_init__(self):
        if not (0.0 < self.k_min <= self.k_max):
            raise InvalidParams(f"need 0 < k_min <= k_max, got k_min={self.k_min}, k_max={self.k_max}")
        if not (0.0 < self.zeta <= 1.0):
            raise InvalidParams(f"zeta must lie in (0, 1], got {self.zeta}")

    @cached_property
    def d_max(self) -> float:
        return damping_from_stiffness(self.k_max, self.zeta)

    @cached_property
    def d_min(self) -> float:
        return damping_from_stiffness(self.k_min, self.zeta)


@dataclass(frozen=True)
class ImpedanceProfile:
    """Stiffness ``K`` and damping ``D`` (3x3, world frame) plus how they were made.

    ``basis`` is the orientation the ellipsoids were last built from; constant
    profiles keep the identity.
    """

    K: np.ndarray
    D: np.ndarray
    params: StiffnessParams
    mode: ProfileMode
    basis: np.ndarray = field(default=IDENTITY_BASIS)

    @property
    def major_direction(self) -> np.ndarray:
        return self.basis[:, 0]


def make_profile(
    mode: ProfileMode | str,
    params: StiffnessParams | None = None,
    direction: np.ndarray | None = None,
) -> ImpedanceProfile:
    """Build the initial profile for ``mode``.

    Constant modes are isotropic at ``k_max`` / ``k_min``; the self-tuning
    profile starts with its major axis along ``direction`` (x if omitted).
    """
    mode = ProfileMode(mode)
    params = params or StiffnessParams()
    if mode is ProfileMode.HIGH_CONSTANT:
        k, d = params.k_max, params.d_max
        return ImpedanceProfile(k * np.eye(3), d * np.eye(3), params, mode)
    if mode is ProfileMode.LOW_CONSTANT:
        k, d = params.k_min, params.d_min
        return ImpedanceProfile(k * np.eye(3), d * np.eye(3), params, mode)
    basis = build_basis(direction if direction is not None else np.array([1.0, 0.0, 0.0]))
    return ImpedanceProfile(
        ellipsoid_matrix(basis, params.k_max, params.k_min),
        ellipsoid_matrix(basis, params.d_max, params.d_min),
        params,
        mode,
        basis,
    )


def cartesian_force(
    profile: ImpedanceProfile,
    x_d: np.ndarray,
    x_a: np.ndarray,
    v_d: np.ndarray,
    v_a: np.ndarray,
) -> np.ndarray:
    """Restoring force ``K (x_d - x_a) + D (v_d - v_a)`` in newtons."""
    return profile.K @ (x_d - x_a) + profile.D @ (v_d - v_a)


def self_tune(profile: ImpedanceProfile, motion_direction: np.ndarray) -> ImpedanceProfile:
    """Re-orient the ellipsoids so the stiff axis follows ``motion_direction``.

    Constant profiles and degenerate directions return ``profile`` itself.
    """
    if profile.mode is not ProfileMode.SELF_TUNING or not norm(motion_direction) > EPS_NORM:
        return profile
    basis = build_basis(motion_direction, profile.basis)
    p = profile.params
    return replace(
        profile,
        K=ellipsoid_matrix(basis, p.k_max, p.k_min),
        D=ellipsoid_matrix(basis, p.d_max, p.d_min),
        basis=basis,
    )


def tuning_direction(planner_increment: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Motion direction fed to :func:`self_tune`: the latest planner increment,
    or ``previous`` while the increment is degenerate."""
    if norm(planner_increment) > EPS_NORM:
        return planner_increment
    return previous
