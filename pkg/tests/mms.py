"""Manufactured solutions with sympy-generated forcing for the two integrators."""

import numpy as np
import sympy as sp

from chapgas import eos, mesh, potential, solver

t, r = sp.symbols("t r", real=True)
G = sp.exp(-r**2)


def _euler_exact(kind, gamma=1.4):
    rho = 1 + sp.Rational(1, 10) * G * sp.cos(t)
    U = sp.Rational(1, 10) * r * G * sp.sin(t + 1)
    S = sp.Rational(1, 20) * G * sp.cos(2 * t)
    if kind == eos.CHAPLYGIN:
        P = 2 - sp.exp(S) / rho
    else:
        K = sp.Float(1.0) / gamma
        P = K * rho**gamma * sp.exp(S)
    f_rho = sp.diff(rho, t) + U * sp.diff(rho, r) + rho * (sp.diff(U, r) + U / r)
    f_U = sp.diff(U, t) + U * sp.diff(U, r) + sp.diff(P, r) / rho
    f_S = sp.diff(S, t) + U * sp.diff(S, r)
    exact = sp.lambdify((t, r), [rho, U, S], "numpy")
    force = sp.lambdify((t, r), [f_rho, f_U, f_S], "numpy")
    return exact, force


def euler_error(kind, N, R=8.0, T=1.0):
    """Max error at time T of the forced Euler run on N cells."""
    exact, force = _euler_exact(kind)
    grid = mesh.build_grid(R, N)
    model = eos.GasModel(kind)
    rho, U, S = (np.broadcast_to(a, grid.r.shape).astype(float) for a in exact(0.0, grid.r))
    st = solver.FlowState(0.0, rho, U, S, model, grid)

    def forcing(tt, rr):
        return np.array([np.broadcast_to(a, rr.shape) for a in force(tt, rr)])

    n = int(np.ceil(T / (0.3 * grid.dr)))
    dt = T / n
    for _ in range(n):
        st = solver.step(st, dt, forcing=forcing)
    ref = exact(T, grid.r)
    return max(float(np.max(np.abs(a - b))) for a, b in zip((st.rho, st.U, st.S), ref))


def _potential_exact():
    phi = sp.Rational(1, 10) * G * sp.sin(t + 1)
    v = sp.diff(phi, t)
    u = sp.diff(phi, r)
    rhs_v = (1 + 2 * v + u**2) * (sp.diff(u, r) + u / r) - 2 * u * sp.diff(v, r) - u**2 * sp.diff(u, r)
    f_v = sp.diff(v, t) - rhs_v
    exact = sp.lambdify((t, r), [phi, v, u], "numpy")
    force = sp.lambdify((t, r), f_v, "numpy")
    return exact, force


def potential_error(N, R=8.0, T=1.0):
    exact, force = _potential_exact()
    grid = mesh.build_grid(R, N)
    phi, v, u = (np.asarray(a, dtype=float) for a in exact(0.0, grid.r))
    st = potential.PotentialState(0.0, phi, v, u, eos.GasModel(), grid)

    def forcing(tt, rr):
        out = np.zeros((3, rr.size))
        out[1] = force(tt, rr)
        return out

    n = int(np.ceil(T / (0.3 * grid.dr)))
    dt = T / n
    for _ in range(n):
        st = potential.step(st, dt, forcing=forcing)
    ref = exact(T, grid.r)
    return max(float(np.max(np.abs(a - b))) for a, b in zip((st.phi, st.v, st.u), ref))


def observed_order(errors, factor=2.0):
    return [np.log(a / b) / np.log(factor) for a, b in zip(errors, errors[1:])]
