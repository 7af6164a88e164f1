"""Equations of state normalized to unit background sound speed.

Two pressure laws are supported:

* Chaplygin: ``P = P0 - A(S)/rho``
* polytropic: ``P = K rho**gamma exp((S - S_bar)/c_v)``

with the entropy coefficient ``A(S) = rho_bar**2 exp((S - S_bar)/c_v)``.
For both kinds the constants are fixed so that ``dP/drho(rho_bar, S_bar) = 1``.
All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    EnthalpyOutOfRange,
    InvalidModel,
    NonPositiveDensity,
    NonPositivePressureWarning,
    WrongKind,
)

CHAPLYGIN = "chaplygin"
POLYTROPIC = "polytropic"
KINDS = (CHAPLYGIN, POLYTROPIC)


@dataclass(frozen=True)
class GasModel:
    """Equation-of-state parameters.

    ``P0`` is used by the Chaplygin law only and ``gamma`` by the
    polytropic law only.
    """

    kind: str = CHAPLYGIN
    P0: float = 2.0
    rho_bar: float = 1.0
    S_bar: float = 0.0
    c_v: float = 1.0
    gamma: float = 1.4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidModel(f"unknown gas kind {self.kind!r}")
        if not self.rho_bar > 0:
            raise InvalidModel("rho_bar must be positive")
        if not self.c_v > 0:
            raise InvalidModel("c_v must be positive")
        if self.kind == CHAPLYGIN and not self.P0 - self.rho_bar > 0:
            # A(S_bar) = rho_bar**2, so P0 - A(S_bar)/rho_bar = P0 - rho_bar
            raise InvalidModel("Chaplygin gas needs P0 - A(S_bar)/rho_bar > 0")
        if self.kind == POLYTROPIC and not 1.0 < self.gamma < 3.0:
            raise InvalidModel("polytropic gamma must lie in (1, 3)")

    @property
    def K(self) -> float:
        """Polytropic coefficient giving unit background sound speed."""
        return self.rho_bar ** (1.0 - self.gamma) / self.gamma

    def to_dict(self) -> dict:
        return asdict(self)


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise NonPositiveDensity("density must be positive")
    return rho


def entropy_coeff(S, model: GasModel):
    """A(S) = rho_bar**2 exp((S - S_bar)/c_v)."""
    return model.rho_bar**2 * np.exp((np.asarray(S, dtype=float) - model.S_bar) / model.c_v)


def entropy_coeff_prime(S, model: GasModel):
    return entropy_coeff(S, model) / model.c_v


def pressure(rho, S, model: GasModel):
    """Pressure; warns with :class:`NonPositivePressureWarning` if P <= 0."""
    rho = _check_density(rho)
    if model.kind == CHAPLYGIN:
        P = model.P0 - entropy_coeff(S, model) / rho
    else:
        P = model.K * rho**model.gamma * np.exp((np.asarray(S) - model.S_bar) / model.c_v)
    if np.any(P <= 0):
        warnings.warn("non-positive pressure encountered", NonPositivePressureWarning,
                      stacklevel=2)
    return P


def dP_drho(rho, S, model: GasModel):
    """Squared sound speed."""
    if model.kind == CHAPLYGIN:
        return entropy_coeff(S, model) / rho**2
    return (model.K * model.gamma * rho ** (model.gamma - 1.0)
            * np.exp((S - model.S_bar) / model.c_v))


def dP_dS(rho, S, model: GasModel):
    if model.kind == CHAPLYGIN:
        return -entropy_coeff_prime(S, model) / rho
    return model.K * rho**model.gamma * np.exp((S - model.S_bar) / model.c_v) / model.c_v


def sound_speed(rho, S, model: GasModel):
    rho = _check_density(rho)
    S = np.asarray(S, dtype=float)
    if model.kind == CHAPLYGIN:
        return np.sqrt(entropy_coeff(S, model)) / rho
    return (np.sqrt(model.K * model.gamma) * rho ** (0.5 * (model.gamma - 1.0))
            * np.exp((S - model.S_bar) / (2.0 * model.c_v)))


def _require_chaplygin(model):
    if model.kind != CHAPLYGIN:
        raise WrongKind("enthalpy is defined for the Chaplygin potential flow only")


def enthalpy(rho, model: GasModel):
    """Isentropic Chaplygin enthalpy h = 1/2 - A(S_bar)/(2 rho**2), zero at rho_bar."""
    _require_chaplygin(model)
    rho = _check_density(rho)
    return 0.5 - 0.5 * model.rho_bar**2 / rho**2


def enthalpy_prime(rho, model: GasModel):
    _require_chaplygin(model)
    return model.rho_bar**2 / np.asarray(rho, dtype=float) ** 3


def enthalpy_inverse(h, model: GasModel):
    """Density with enthalpy ``h``; raises :class:`EnthalpyOutOfRange` if h >= 1/2."""
    _require_chaplygin(model)
    h = np.asarray(h, dtype=float)
    if np.any(~(h < 0.5)):
        raise EnthalpyOutOfRange(
            f"enthalpy {np.max(h):.6g} reaches the vacuum limit 1/2")
    return model.rho_bar / np.sqrt(1.0 - 2.0 * h)
