"""Bloch vector of a two-level atom restricted to the s_y = 0 plane.

The state is stored as a single angle phi in (-pi, pi] with
s_x = sin(phi), s_z = cos(phi).  The excited state sits at phi = 0, the
ground state at phi = pi, and the dipole eigenstates s_x = +/-1 at
phi = +/-pi/2.  Measurement back-action is an exact rotation of this angle,
so purity is preserved by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

# Weak-coupling guards on gamma*tau: the Gaussian record model and the
# first-order rotation model are both uncontrolled beyond these.
WEAK_COUPLING_WARN = 0.01
WEAK_COUPLING_MAX = 0.1


def normalize_angle(phi: float) -> float:
    """Reduce an angle to (-pi, pi].  Values already in range pass through
    unchanged (bit-exact)."""
    if -math.pi < phi <= math.pi:
        return phi
    r = math.remainder(phi, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


@dataclass(frozen=True)
class BlochState:
    """Pure atomic state on the s_y = 0 great circle, stored as an angle."""

    phi: float

    def __post_init__(self):
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "phi", normalize_angle(float(self.phi)))

    @property
    def s_x(self) -> float:
        return float(np.sin(self.phi))

    @property
    def s_z(self) -> float:
        return float(np.cos(self.phi))

    @classmethod
    def excited(cls) -> "BlochState":
        return cls(0.0)

    @classmethod
    def ground(cls) -> "BlochState":
        return cls(math.pi)

    @classmethod
    def dipole_plus(cls) -> "BlochState":
        return cls(0.5 * math.pi)

    @classmethod
    def dipole_minus(cls) -> "BlochState":
        return cls(-0.5 * math.pi)

    @classmethod
    def from_components(cls, s_x: float, s_z: float) -> "BlochState":
        """State from (s_x, s_z); the pair is normalized onto the circle."""
        if s_x == 0.0 and s_z == 0.0:
            raise ValueError("(s_x, s_z) must not both be zero")
        return cls(math.atan2(s_x, s_z))


@dataclass(frozen=True)
class SimParams:
    """Physical parameters: decay rate, measurement interval, LO amplitude."""

    gamma: float
    tau: float
    alpha: float

    def __post_init__(self):
        if not (self.gamma > 0.0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (self.tau > 0.0):
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not (self.alpha > 0.0):
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        gt = self.gamma * self.tau
        if gt > WEAK_COUPLING_MAX:
            raise ValueError(
                f"gamma*tau = {gt:g} exceeds the weak-coupling cap {WEAK_COUPLING_MAX}"
            )
        if gt > WEAK_COUPLING_WARN:
            warnings.warn(
                f"gamma*tau = {gt:g} is above {WEAK_COUPLING_WARN}; "
                "the weak-field record model degrades in this regime",
                stacklevel=2,
            )

    @property
    def gamma_tau(self) -> float:
        return self.gamma * self.tau


def rotation_angle(s_z, delta_n, params: SimParams, gain: float = 0.0):
    """Back-action rotation angle sqrt(gamma*tau) * (delta_n/alpha) * (1 + s_z - gain).

    Uses the pre-measurement s_z.  Returns exactly 0.0 whenever
    1 + s_z - gain == 0, for any record value.  Accepts arrays.
    """
    # association matches the batched engine kernel bit-for-bit
    return (
        math.sqrt(params.gamma * params.tau)
        * (delta_n / params.alpha)
        * (1.0 + s_z - gain)
    )


def apply_rotation(state: BlochState, theta: float) -> BlochState:
    """Rotate the state by theta around the y-axis (exact, purity-preserving)."""
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    return BlochState(normalize_angle(state.phi + theta))


def linearized_update(state: BlochState, delta_n, params: SimParams, gain: float = 0.0):
    """First-order increments (delta_sx, delta_sz) = (theta*s_z, -theta*s_x).

    For comparison against the exact rotation only; never used for evolution.
    """
    theta = rotation_angle(state.s_z, delta_n, params, gain)
    return theta * state.s_z, -theta * state.s_x
