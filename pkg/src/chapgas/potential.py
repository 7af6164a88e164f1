"""Radial potential flow for the approximate Chaplygin solution.

The potential obeys, as a first-order system in (phi, v = phi_t, u = phi_r)::

    phi_t = v
    u_t   = v_r
    v_t   = (1 + 2v + u^2)(u_r + u/r) - 2 u v_r - u^2 u_r

and the density follows from Bernoulli's law h(rho_a) = -v - u^2/2.  Carrying
u alongside phi keeps the velocity exactly equal to the Euler data at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import eos, mesh, solver
from .eos import GasModel
from .errors import EnthalpyOutOfRange, StateInvalid
from .mesh import EVEN, ODD, RadialGrid, deriv_r
from .solver import InitialProfiles

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


@dataclass
class PotentialState:
    t: float
    phi: np.ndarray
    v: np.ndarray
    u: np.ndarray
    model: GasModel
    grid: RadialGrid = field(repr=False)

    def stacked(self) -> np.ndarray:
        return np.stack([self.phi, self.v, self.u])

    def with_fields(self, t, q) -> "PotentialState":
        return replace(self, t=t, phi=q[0], v=q[1], u=q[2])


def _tail_integral(f, r, M):
    """``int_r^M f(s) ds`` at each node, 8-point Gauss-Legendre per interval."""
    nodes = np.append(np.minimum(r, M), M)
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    s = (0.5 * (a + b))[:, None] + half[:, None] * _GAUSS_X[None, :]
    pieces = half * (f(s) @ _GAUSS_W)
    # reverse cumulative sum: piece j covers [r_j, r_{j+1}]
    return np.cumsum(pieces[::-1])[::-1]


def init_potential(profiles: InitialProfiles, grid: RadialGrid, model: GasModel) -> PotentialState:
    """Data for the approximate flow that matches the isentropic part of the Euler data."""
    eps, r, M = profiles.epsilon, grid.r, profiles.M
    phi = -eps * _tail_integral(profiles.U0, r, M)
    flow = solver.init_state(profiles, grid, model)
    rho_a = flow.rho * eos.entropy_coeff(model.S_bar, model) / eos.entropy_coeff(flow.S, model)
    u = flow.U.copy()
    v = -0.5 * u**2 - eos.enthalpy(rho_a, reference_model(model))
    return PotentialState(0.0, phi, v, u, model, grid)


def reference_model(model: GasModel) -> GasModel:
    """Chaplygin model sharing rho_bar, S_bar and c_v with ``model``.

    Bernoulli's law needs the Chaplygin enthalpy; polytropic runs borrow it.
    """
    if model.kind == eos.CHAPLYGIN:
        return model
    return GasModel(eos.CHAPLYGIN, rho_bar=model.rho_bar, S_bar=model.S_bar, c_v=model.c_v,
                    P0=model.rho_bar + 1.0)


def _tendencies(q, grid: RadialGrid, dissipation: Optional[float] = None):
    if dissipation is None:
        dissipation = solver.DISSIPATION
    v, u = q[1], q[2]
    v_r = deriv_r(v, EVEN, grid, outer="constant")
    u_r = deriv_r(u, ODD, grid, outer="constant")
    g2 = u * u
    out = np.empty_like(q)
    out[0] = v
    out[1] = (1.0 + 2.0 * v + g2) * (u_r + u / grid.r) - 2.0 * u * v_r - g2 * u_r
    out[2] = v_r
    if dissipation:
        out[:2] += mesh.dissipation(q[:2], EVEN, grid, dissipation)
        out[2] += mesh.dissipation(u, ODD, grid, dissipation)
    return out


def potential_rhs(state: PotentialState):
    """Time derivatives (dphi/dt, dv/dt, du/dt)."""
    out = _tendencies(state.stacked(), state.grid)
    return out[0], out[1], out[2]


def cfl_dt(state: PotentialState, cfl: float = solver.CFL) -> float:
    """Step bound from the largest local characteristic speed."""
    u = state.u
    c2 = 1.0 + 2.0 * state.v + u**2
    speed = np.max(np.abs(u) + np.sqrt(np.maximum(c2, 0.0)))
    return cfl * state.grid.dr / float(speed)


def step(state: PotentialState, dt: float, forcing=None) -> PotentialState:
    grid = state.grid
    if forcing is None:
        def fun(t, q):
            return _tendencies(q, grid)
    else:
        def fun(t, q):
            return _tendencies(q, grid) + forcing(t, grid.r)
    with np.errstate(all="ignore"):
        q = solver.rk4(fun, state.t, state.stacked(), dt)
    if not np.all(np.isfinite(q)):
        raise StateInvalid("non-finite potential", t=state.t)
    return state.with_fields(state.t + dt, q)


def _bernoulli_h(state: PotentialState):
    return -state.v - 0.5 * state.u**2, state.u


def bernoulli_density(state: PotentialState) -> np.ndarray:
    h, _ = _bernoulli_h(state)
    return eos.enthalpy_inverse(h, reference_model(state.model))


@dataclass
class ApproximateFlow:
    rho_a: np.ndarray
    u_a: np.ndarray
    theta_a: np.ndarray
    w_a: np.ndarray


def approximate_flow(state: PotentialState) -> ApproximateFlow:
    h, phi_r = _bernoulli_h(state)
    rho_a = eos.enthalpy_inverse(h, reference_model(state.model))
    theta_a = 1.0 - state.model.rho_bar / rho_a
    return ApproximateFlow(rho_a, phi_r.copy(), theta_a, phi_r.copy())


def check_invertible(state: PotentialState) -> None:
    h, _ = _bernoulli_h(state)
    if np.any(~(h < 0.5)):
        raise EnthalpyOutOfRange(f"Bernoulli enthalpy reaches 1/2 at t = {state.t:.6g}")
