"""Null conditions for cubic and quartic symbols in two space dimensions.

A cubic form contributes ``sum g_i^{jk} d_i u d_jk u`` to a wave equation,
a quartic one ``sum g_ij^{kl} d_i u d_j u d_kl u``.  On the null cone
xi = (-1, cos t, sin t) the symbol is a trigonometric polynomial of degree
at most 3 (resp. 4), so 16 equispaced samples determine its Fourier
coefficients exactly.  The residual is the largest real trig coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import CHAPLYGIN, GasModel
from .errors import SymmetryViolation

DIM = 3          # (t, x1, x2)
SAMPLES = 16
SYM_TOL = 1e-14


def _check(g, axes_pairs, shape):
    g = np.asarray(g, dtype=float)
    if g.shape != shape:
        raise ValueError(f"expected coefficients of shape {shape}, got {g.shape}")
    scale = max(1.0, float(np.max(np.abs(g))))
    for a, b in axes_pairs:
        if not np.allclose(g, np.swapaxes(g, a, b), rtol=0.0, atol=SYM_TOL * scale):
            raise SymmetryViolation(f"coefficients not symmetric in indices {a} and {b}")
    return g


@dataclass(frozen=True, eq=False)
class CubicForm:
    """g[i, j, k] multiplying d_i u d_jk u."""

    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _check(self.g, [(1, 2)], (DIM,) * 3))

    def __add__(self, other):
        return CubicForm(self.g + other.g)

    def __rmul__(self, c):
        return CubicForm(c * self.g)

    def symbol(self, xi) -> np.ndarray:
        """Polynomial value at one or more covectors (last axis of length 3)."""
        xi = np.asarray(xi, dtype=float)
        return np.einsum("ijk,...i,...j,...k->...", self.g, xi, xi, xi)


@dataclass(frozen=True, eq=False)
class QuarticForm:
    """g[i, j, k, l] multiplying d_i u d_j u d_kl u."""

    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _check(self.g, [(0, 1), (2, 3)], (DIM,) * 4))

    def __add__(self, other):
        return QuarticForm(self.g + other.g)

    def __rmul__(self, c):
        return QuarticForm(c * self.g)

    def symbol(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return np.einsum("ijkl,...i,...j,...k,...l->...", self.g, xi, xi, xi, xi)


def null_covectors(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([-np.ones_like(theta), np.cos(theta), np.sin(theta)], axis=-1)


def trig_coefficients(form) -> np.ndarray:
    """Real coefficients [a0, a1, b1, a2, b2, ...] of the symbol on the cone."""
    theta = 2.0 * np.pi * np.arange(SAMPLES) / SAMPLES
    c = np.fft.rfft(form.symbol(null_covectors(theta))) / SAMPLES
    out = [c[0].real]
    for k in range(1, SAMPLES // 2):
        out += [2.0 * c[k].real, -2.0 * c[k].imag]
    return np.array(out)


def trig_evaluate(coeffs, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.full(theta.shape, coeffs[0])
    for k in range(1, (len(coeffs) + 1) // 2):
        out += coeffs[2 * k - 1] * np.cos(k * theta) + coeffs[2 * k] * np.sin(k * theta)
    return out


def _residual(form) -> float:
    return float(np.max(np.abs(trig_coefficients(form))))


def cubic_residual(form: CubicForm) -> float:
    return _residual(form)


def quartic_residual(form: QuarticForm) -> float:
    return _residual(form)


_SPACE = (1, 2)


def cubic_from_terms(time_space: float, trace: float) -> CubicForm:
    """g_j^{0j} = g_j^{j0} = time_space and g_0^{jj} = trace for j = 1, 2."""
    g = np.zeros((DIM,) * 3)
    for j in _SPACE:
        g[j, 0, j] = g[j, j, 0] = time_space
        g[0, j, j] = trace
    return CubicForm(g)


def quartic_from_terms(cross: float, trace: float) -> QuarticForm:
    """cross (d_ik d_jl + d_il d_jk) + trace d_ij d_kl over spatial indices."""
    g = np.zeros((DIM,) * 4)
    for i in _SPACE:
        for j in _SPACE:
            g[i, j, i, j] += cross
            g[i, j, j, i] += cross
            g[i, i, j, j] += trace
    return QuarticForm(g)


def lemma_forms():
    """Coefficient sets whose symbols vanish for every covector."""
    return cubic_from_terms(-1.0, 2.0), quartic_from_terms(-0.5, 1.0)


def forms_for(kind: str, gamma: float = 1.4):
    """Cubic and quartic forms of the potential equation.

    The Chaplygin potential equation has quadratic part
    2 d_j u d_tj u - 2 d_t u Lap u and cubic part d_j u d_k u d_jk u - |grad u|^2 Lap u.
    The polytropic surrogate adds -(gamma - 1) d_t u Lap u.
    """
    cubic = cubic_from_terms(1.0, -2.0)
    if kind != CHAPLYGIN:
        cubic = cubic + cubic_from_terms(0.0, -(gamma - 1.0))
    return cubic, quartic_from_terms(0.5, -1.0)


def model_forms(model: GasModel):
    return forms_for(model.kind, model.gamma)


def check(kind: str, gamma: float = 1.4) -> dict:
    cubic, quartic = forms_for(kind, gamma)
    return {"model": kind, "gamma": None if kind == CHAPLYGIN else gamma,
            "cubic_residual": cubic_residual(cubic), "quartic_residual": quartic_residual(quartic)}
