"""Measurement-record statistics for balanced homodyne detection.

The vacuum model is the weak-field Gaussian of width |alpha|.  The
conditional model is a two-component Gaussian mixture centered at
+/- sqrt(gamma*tau)*|alpha| with dipole-eigenstate weights (1 +/- s_x)/2:
it reduces to the vacuum Gaussian as gamma*tau -> 0 and makes positive
records more likely for s_x = +1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bloch import BlochState, SimParams
from .streams import CounterStream


class SamplingMode(enum.Enum):
    """Vacuum draws ignore the state (statistics tests only); Conditional is
    the default for dynamics."""

    VACUUM = "vacuum"
    CONDITIONAL = "conditional"


@dataclass(frozen=True)
class MeasurementRecord:
    """Photon-number difference between the two detectors (continuous limit)."""

    delta_n: float

    def __post_init__(self):
        if not math.isfinite(self.delta_n):
            raise ValueError(f"delta_n must be finite, got {self.delta_n}")


def _gauss(x, mu, sigma):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))


def pdf_vacuum(delta_n, alpha: float):
    """Vacuum-fluctuation record density: Gaussian of mean 0 and width |alpha|."""
    if not (alpha > 0.0):
        raise ValueError(f"alpha must be > 0, got {alpha}")
    return _gauss(np.asarray(delta_n, dtype=float), 0.0, alpha)


def record_shift(params: SimParams) -> float:
    """Center offset of the dipole-conditioned record components."""
    return math.sqrt(params.gamma_tau) * params.alpha


def conditional_pdf(delta_n, state: BlochState, params: SimParams):
    """State-conditioned record density (dipole-eigenstate Gaussian mixture).

    Mean is sqrt(gamma*tau)*|alpha|*s_x; variance is
    alpha^2 * (1 + gamma*tau*(1 - s_x^2)).
    """
    mu = record_shift(params)
    p_plus = 0.5 * (1.0 + state.s_x)
    p_minus = 0.5 * (1.0 - state.s_x)
    x = np.asarray(delta_n, dtype=float)
    return p_plus * _gauss(x, mu, params.alpha) + p_minus * _gauss(x, -mu, params.alpha)


def conditional_mean(state: BlochState, params: SimParams) -> float:
    return record_shift(params) * state.s_x


def conditional_variance(state: BlochState, params: SimParams) -> float:
    sx = state.s_x
    return params.alpha**2 * (1.0 + params.gamma_tau * (1.0 - sx * sx))


def sample_record(
    state: BlochState,
    params: SimParams,
    mode: SamplingMode,
    rng: CounterStream,
) -> MeasurementRecord:
    """Draw one record.  Deterministic given the stream state.

    Consumption: Conditional takes one uniform then one normal (3 counters);
    Vacuum takes one normal (2 counters).  The batched engine kernel relies
    on this exact layout.
    """
    if mode is SamplingMode.VACUUM:
        dn = params.alpha * rng.standard_normal()
    else:
        u = rng.uniform()
        mu = record_shift(params)
        center = mu if u < 0.5 * (1.0 + state.s_x) else -mu
        dn = center + params.alpha * rng.standard_normal()
    return MeasurementRecord(dn)


def sample_records(
    state: BlochState,
    params: SimParams,
    mode: SamplingMode,
    rng: CounterStream,
    size: int,
) -> np.ndarray:
    """Vectorized i.i.d. draws from the mode's distribution at a fixed state."""
    if mode is SamplingMode.VACUUM:
        return params.alpha * rng.standard_normal(size)
    u = rng.uniform(size)
    z = rng.standard_normal(size)
    mu = record_shift(params)
    center = np.where(u < 0.5 * (1.0 + state.s_x), mu, -mu)
    return center + params.alpha * z


def bayes_dipole_update(
    state: BlochState, delta_n: float, params: SimParams
) -> BlochState:
    """Posterior reweighting of the dipole-eigenstate components.

    Weights are updated by the component likelihoods G(delta_n; +/-mu, alpha^2);
    with t = tanh(delta_n * sqrt(gamma*tau) / alpha) this gives
    s_x' = (s_x + t) / (1 + s_x*t).  s_z is restored to the circle in the same
    hemisphere (an infinitesimal update cannot cross the equator); if s_z is
    exactly 0 the state is a dipole eigenstate and is unchanged.
    """
    x = delta_n * math.sqrt(params.gamma_tau) / params.alpha
    t = math.tanh(x)
    sx = state.s_x
    sx_new = (sx + t) / (1.0 + sx * t)
    sz = state.s_z
    if sz == 0.0:
        sz_new = 0.0
        # dipole eigenstate: sx_new is +/-1 exactly, phi is unchanged
        return BlochState(math.copysign(0.5 * math.pi, sx_new))
    sz_new = math.copysign(math.sqrt(max(0.0, 1.0 - sx_new * sx_new)), sz)
    return BlochState.from_components(sx_new, sz_new)
