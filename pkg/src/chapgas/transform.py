"""Change of variables (theta, w, z), perturbation fields and the exterior potential."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import eos
from .eos import GasModel
from .errors import GridMismatch, NeedsTwoSnapshots, NonPositiveDensity
from .mesh import RadialGrid
from .potential import reference_model
from .solver import FlowState


@dataclass
class TwzFields:
    t: float
    theta: np.ndarray
    w: np.ndarray   # radial amplitude W, w = W x/r
    z: np.ndarray


@dataclass
class PerturbationFields:
    t: float
    theta_dot: np.ndarray
    w_dot: np.ndarray
    z_dot: np.ndarray


def _entropy_ratio(S, model: GasModel):
    """A(S)/A(S_bar)."""
    return np.exp((np.asarray(S, dtype=float) - model.S_bar) / model.c_v)


def to_twz(state: FlowState) -> TwzFields:
    if np.any(~(state.rho > 0)):
        raise NonPositiveDensity("density must be positive")
    m = state.model
    ratio = _entropy_ratio(state.S, m)
    theta = 1.0 - ratio * m.rho_bar / state.rho
    return TwzFields(state.t, theta, state.U.copy(), 1.0 / ratio - 1.0)


def from_twz(twz: TwzFields, model: GasModel):
    """Inverse map, returning (rho, U, S)."""
    ratio = 1.0 / (1.0 + twz.z)
    S = model.S_bar + model.c_v * np.log(ratio)
    rho = ratio * model.rho_bar / (1.0 - twz.theta)
    return rho, twz.w.copy(), S


def perturbations(twz: TwzFields, approx, z0: np.ndarray) -> PerturbationFields:
    """theta - theta_a, W - w_a and z - z(0)."""
    n = twz.theta.shape
    if approx.theta_a.shape != n or approx.w_a.shape != n or np.shape(z0) != n:
        raise GridMismatch("perturbation inputs live on different grids")
    return PerturbationFields(twz.t, twz.theta - approx.theta_a, twz.w - approx.w_a,
                              twz.z - np.asarray(z0))


def cumulative_tail(f, grid: RadialGrid, r_end: Optional[float] = None) -> np.ndarray:
    """``-int_r^{r_end} f ds`` at every cell center, fourth order.

    Interior intervals use the four-point rule ``dr/24 (-f0 + 13 f1 + 13 f2 - f3)``;
    the end intervals fall back to the shifted cubic through the nearest four
    nodes.  Cells beyond ``r_end`` get zero.
    """
    f = np.asarray(f, dtype=float)
    n, dr = grid.N, grid.dr
    pieces = np.empty(n - 1)
    pieces[1:-1] = (-f[:-3] + 13.0 * f[1:-2] + 13.0 * f[2:-1] - f[3:]) * (dr / 24.0)
    pieces[0] = (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]) * (dr / 24.0)
    pieces[-1] = (9.0 * f[-1] + 19.0 * f[-2] - 5.0 * f[-3] + f[-4]) * (dr / 24.0)
    tail = np.zeros(n)
    tail[:-1] = np.cumsum(pieces[::-1])[::-1]
    if r_end is not None:
        k = int(np.searchsorted(grid.r, r_end))   # first cell at or beyond r_end
        if k < n:
            tail[:k] -= tail[k]
            tail[k:] = 0.0
    return -tail


@dataclass
class ExteriorPotential:
    t: float
    phi: np.ndarray
    residual: np.ndarray     # NaN where not checked (r < M + 1)


def exterior_potential(state: FlowState, M: float, neighbours=None) -> ExteriorPotential:
    """Potential of the velocity, ``phi = -int_r^{R_end} U ds``.

    ``neighbours`` is a pair of states at ``t -+ h``; the Bernoulli residual
    ``|phi_t + U^2/2 + h(rho)|`` uses their centered difference and is only
    filled in on r >= M + 1.
    """
    grid = state.grid
    r_end = min(M + state.t + 2.0 * grid.dr, grid.R_max)
    phi = cumulative_tail(state.U, grid, r_end)
    residual = np.full(grid.N, np.nan)
    if neighbours is not None:
        before, after = neighbours
        if before is None or after is None:
            raise NeedsTwoSnapshots("the Bernoulli residual needs states on both sides")
        phi_b = cumulative_tail(before.U, grid, min(M + before.t + 2.0 * grid.dr, grid.R_max))
        phi_a = cumulative_tail(after.U, grid, min(M + after.t + 2.0 * grid.dr, grid.R_max))
        phi_t = (phi_a - phi_b) / (after.t - before.t)
        ref = reference_model(state.model)
        outer = grid.r >= M + 1.0
        res = phi_t + 0.5 * state.U**2 + eos.enthalpy(state.rho, ref)
        residual[outer] = np.abs(res[outer])
    return ExteriorPotential(state.t, phi, residual)
