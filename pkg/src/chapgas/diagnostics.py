"""Weighted norms of the perturbation and potential fields.

Every field is radial: a scalar f(t, r) or a vector w = W(t, r) x/r.  The
Cartesian magnitudes needed by the energies reduce to the radial amplitudes
as follows (omega = x/r, sums over Cartesian indices).

Scalar f::

    |grad f|^2        = f_r^2
    |grad^2 f|^2      = f_rr^2 + (f_r/r)^2
    |grad f_t|^2      = f_tr^2
    |grad X f|^2      = (d_r X f)^2
    |X grad f|^2      = (X f_r)^2          since X omega = 0
    |Z f|^2           = (f_t + f_r)^2

Vector w = W omega::

    |grad w|^2        = W_r^2 + (W/r)^2
    |grad^2 w|^2      = W_rr^2 + 3 (W_r/r - W/r^2)^2
    |grad w_t|^2      = W_tr^2 + (W_t/r)^2
    |grad X w|^2      = (d_r X W)^2 + (X W/r)^2
    |X grad w|^2      = (X W_r)^2 + ((X W - W)/r)^2
    div w             = W_r + W/r

with X = t d_t + r d_r.  Only the amplitudes (f, f_t, f_tt) at the report
time are stored; every word of length <= 2 follows from them and radial
differences.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import eos, mesh, potential, solver, transform
from .errors import (
    InsufficientSamples,
    NonPositiveValues,
    NotCompactlySupported,
    WordTooLong,
    ZeroDenominator,
)
from .mesh import EVEN, ODD, RadialGrid, deriv_r

LETTERS = ("Dt", "Dr", "X")
MAX_ORDER = 2


# ---------------------------------------------------------------- weights

def sigma_weights(t, r):
    """(sigma_-, sigma_+) = (1 + |t - r|, 1 + t + r)."""
    r = np.asarray(r, dtype=float)
    return 1.0 + np.abs(t - r), 1.0 + t + r


def ghost_weight(q):
    """Bounded antiderivative of (1 + |s|)^(-3/2) with value 0 at -infinity."""
    q = np.asarray(q, dtype=float)
    out = np.where(q <= 0.0, 2.0 / np.sqrt(1.0 - np.minimum(q, 0.0)),
                   4.0 - 2.0 / np.sqrt(1.0 + np.maximum(q, 0.0)))
    return out if out.ndim else float(out)


def ghost_weight_prime(q):
    q = np.asarray(q, dtype=float)
    out = (1.0 + np.abs(q)) ** -1.5
    return out if out.ndim else float(out)


def _smoothstep(x):
    """Quintic 0 -> 1 on [0, 1], C2 at both ends; returns value, d/dx, d2/dx2."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    v = x**3 * (10.0 - 15.0 * x + 6.0 * x**2)
    d1 = 30.0 * x**2 * (1.0 - x) ** 2
    d2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
    return v, d1, d2


def chi_hat(s, derivs: bool = False):
    """1 on s <= 1/2, 0 on s >= 3/4, monotone in between."""
    v, d1, d2 = _smoothstep((np.asarray(s, dtype=float) - 0.5) * 4.0)
    if derivs:
        return 1.0 - v, -4.0 * d1, -16.0 * d2
    return 1.0 - v


def chi_tilde(s, derivs: bool = False):
    """0 on s <= 1/2, 1 on s >= 1."""
    v, d1, d2 = _smoothstep((np.asarray(s, dtype=float) - 0.5) * 2.0)
    if derivs:
        return v, 2.0 * d1, 4.0 * d2
    return v


def interior_cutoff(t: float, r, M: float):
    """chi(t, r) = chi_hat(r / (t + 2M + 2)) with its first two time derivatives."""
    T = t + 2.0 * M + 2.0
    r = np.asarray(r, dtype=float)
    c, c1, c2 = chi_hat(r / T, derivs=True)
    ds = -r / T**2          # d/dt of r/T
    dds = 2.0 * r / T**3
    return c, c1 * ds, c2 * ds**2 + c1 * dds


def exterior_cutoff(t: float, r, M: float):
    return chi_tilde(2.0 * np.asarray(r, dtype=float) / (t + 2.0 * M + 2.0))


# ---------------------------------------------------------------- words

@dataclass(frozen=True)
class GammaWord:
    letters: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.letters) > MAX_ORDER:
            raise WordTooLong(f"words are capped at length {MAX_ORDER}")
        for a in self.letters:
            if a not in LETTERS:
                raise ValueError(f"unknown letter {a!r}")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(self.letters) or "1"


def words(max_len: int) -> list:
    """All words of length <= max_len, shortest first."""
    if max_len > MAX_ORDER:
        raise WordTooLong(f"words are capped at length {MAX_ORDER}")
    out = [GammaWord(())]
    level = [()]
    for _ in range(max_len):
        level = [w + (a,) for w in level for a in LETTERS]
        out.extend(GammaWord(w) for w in level)
    return out


# ---------------------------------------------------------------- window

@dataclass
class RadialField:
    """Amplitude and its first two time derivatives at one time."""

    f: np.ndarray
    f_t: np.ndarray
    f_tt: np.ndarray
    parity: int
    vector: bool = False

    def scaled(self, c) -> "RadialField":
        return RadialField(c * self.f, c * self.f_t, c * self.f_tt, self.parity, self.vector)

    def premultiplied(self, chi) -> "RadialField":
        """chi * field for chi = (value, d/dt, d2/dt2) of a radial cutoff."""
        c, ct, ctt = chi
        return RadialField(c * self.f, ct * self.f + c * self.f_t,
                           ctt * self.f + 2.0 * ct * self.f_t + c * self.f_tt,
                           self.parity, self.vector)


@dataclass
class SnapshotWindow:
    """Fields around time t.

    First time derivatives come from the exact tendencies; second ones from
    a centered difference of those tendencies at t -+ h, where the two side
    states are produced by single RK4 steps from the center.
    """

    t: float
    grid: RadialGrid = field(repr=False)
    fields: Dict[str, RadialField]
    h: float
    flow: solver.FlowState = field(repr=False)
    flow_t: np.ndarray = field(repr=False)
    before: Optional[solver.FlowState] = field(default=None, repr=False)
    after: Optional[solver.FlowState] = field(default=None, repr=False)


def _twz_rates(flow: solver.FlowState, q_t):
    m = flow.model
    rho, S = flow.rho, flow.S
    rho_t, U_t, S_t = q_t
    ratio = np.exp((S - m.S_bar) / m.c_v)
    theta = 1.0 - ratio * m.rho_bar / rho
    theta_t = -ratio * m.rho_bar / rho * (S_t / m.c_v - rho_t / rho)
    z = 1.0 / ratio - 1.0
    z_t = -(S_t / m.c_v) / ratio
    return (theta, theta_t), (flow.U, U_t), (z, z_t)


def _approx_rates(pot: potential.PotentialState, p_t):
    ref = potential.reference_model(pot.model)
    phi_t, v_t, u_t = p_t
    h = -pot.v - 0.5 * pot.u**2
    rho_a = eos.enthalpy_inverse(h, ref)
    rho_a_t = -(v_t + pot.u * u_t) / eos.enthalpy_prime(rho_a, ref)
    theta_a = 1.0 - pot.model.rho_bar / rho_a
    theta_a_t = pot.model.rho_bar * rho_a_t / rho_a**2
    return (theta_a, theta_a_t), (pot.u, u_t), (pot.phi, phi_t)


def _rates(flow, pot, z0):
    q_t = solver._tendencies(flow.stacked(), flow.model, flow.grid)
    p_t = potential._tendencies(pot.stacked(), pot.grid)
    (th, th_t), (W, W_t), (z, z_t) = _twz_rates(flow, q_t)
    (tha, tha_t), (wa, wa_t), (phia, phia_t) = _approx_rates(pot, p_t)
    out = {
        "theta_dot": (th - tha, th_t - tha_t),
        "w_dot": (W - wa, W_t - wa_t),
        "z_dot": (z - z0, z_t),
        "theta_a": (tha, tha_t),
        "w_a": (wa, wa_t),
        "phi_a": (phia, phia_t),
    }
    return out, q_t


_LAYOUT = {
    "theta_dot": (EVEN, False),
    "w_dot": (ODD, True),
    "z_dot": (EVEN, False),
    "theta_a": (EVEN, False),
    "w_a": (ODD, True),
    "phi_a": (EVEN, False),
}

DEFAULT_H = 2e-3


def build_window(flow: solver.FlowState, pot: potential.PotentialState, z0,
                 h: float = DEFAULT_H) -> SnapshotWindow:
    center, q_t = _rates(flow, pot, z0)
    with np.errstate(all="ignore"):
        fb = solver.step(flow, -h, check_cfl=False)
        fa = solver.step(flow, h, check_cfl=False)
        pb = potential.step(pot, -h)
        pa = potential.step(pot, h)
    before, _ = _rates(fb, pb, z0)
    after, _ = _rates(fa, pa, z0)
    fields = {}
    for name, (parity, vector) in _LAYOUT.items():
        f, f_t = center[name]
        f_tt = (after[name][1] - before[name][1]) / (2.0 * h)
        fields[name] = RadialField(f, f_t, f_tt, parity, vector)
    return SnapshotWindow(flow.t, flow.grid, fields, h, flow, q_t, fb, fa)


# ---------------------------------------------------------------- words on fields

class _Amplitudes:
    """Lazily computed radial amplitudes of one field at time t."""

    def __init__(self, fld: RadialField, t: float, grid: RadialGrid):
        self.fld, self.t, self.grid, self.r = fld, t, grid, grid.r
        self._cache = {}

    def _d(self, f, parity):
        return deriv_r(f, parity, self.grid)

    def __getattr__(self, name):
        if name.startswith("_") or name in ("fld", "t", "grid", "r"):
            raise AttributeError(name)
        cache = self.__dict__["_cache"]
        if name not in cache:
            cache[name] = getattr(self, "_" + name)()
        return cache[name]

    # base amplitudes
    def _f(self):
        return self.fld.f

    def _ft(self):
        return self.fld.f_t

    def _ftt(self):
        return self.fld.f_tt

    def _fr(self):
        return self._d(self.f, self.fld.parity)

    def _frr(self):
        return self._d(self.fr, -self.fld.parity)

    def _ftr(self):
        return self._d(self.ft, self.fld.parity)

    # scaling field compositions
    def _Xf(self):
        return self.t * self.ft + self.r * self.fr

    def _dtXf(self):
        return self.ft + self.t * self.ftt + self.r * self.ftr

    def _drXf(self):
        return self.t * self.ftr + self.fr + self.r * self.frr

    def _Xft(self):
        return self.t * self.ftt + self.r * self.ftr

    def _Xfr(self):
        return self.t * self.ftr + self.r * self.frr

    def _XXf(self):
        return self.t * self.dtXf + self.r * self.drXf


_RADIAL = {
    (): "f", ("Dt",): "ft", ("Dr",): "fr", ("X",): "Xf",
    ("Dt", "Dt"): "ftt", ("Dt", "Dr"): "ftr", ("Dr", "Dt"): "ftr", ("Dr", "Dr"): "frr",
    ("Dt", "X"): "dtXf", ("X", "Dt"): "Xft", ("Dr", "X"): "drXf", ("X", "Dr"): "Xfr",
    ("X", "X"): "XXf",
}


def gamma_apply(window: SnapshotWindow, name: str, word: GammaWord) -> np.ndarray:
    """Radial amplitude of ``word`` applied (right to left) to a window field.

    A Dr letter returns the radial component; Cartesian magnitudes including
    the angular parts are given by :func:`gamma_density`.
    """
    if not isinstance(word, GammaWord):
        word = GammaWord(tuple(word))
    amp = _Amplitudes(window.fields[name], window.t, window.grid)
    return getattr(amp, _RADIAL[word.letters])


def _density(amp: _Amplitudes, letters: Tuple[str, ...], vector: bool) -> np.ndarray:
    """Pointwise Cartesian |Gamma^alpha f|^2."""
    base = getattr(amp, _RADIAL[letters]) ** 2
    if not vector:
        if letters == ("Dr", "Dr"):
            return base + (amp.fr / amp.r) ** 2
        return base
    r = amp.r
    if letters == ("Dr",):
        return base + (amp.f / r) ** 2
    if letters in (("Dt", "Dr"), ("Dr", "Dt")):
        return base + (amp.ft / r) ** 2
    if letters == ("Dr", "Dr"):
        return base + 3.0 * (amp.fr / r - amp.f / r**2) ** 2
    if letters == ("Dr", "X"):
        return base + (amp.Xf / r) ** 2
    if letters == ("X", "Dr"):
        return base + ((amp.Xf - amp.f) / r) ** 2
    return base


def gamma_density(window: SnapshotWindow, name: str, word: GammaWord) -> np.ndarray:
    if not isinstance(word, GammaWord):
        word = GammaWord(tuple(word))
    fld = window.fields[name]
    return _density(_Amplitudes(fld, window.t, window.grid), word.letters, fld.vector)


# ---------------------------------------------------------------- energies

PERTURBATIONS = ("theta_dot", "w_dot", "z_dot")


def energy_E(n: int, window: SnapshotWindow, names: Sequence[str] = PERTURBATIONS) -> float:
    """sum over |alpha| <= n and fields of ||Gamma^alpha f||^2."""
    if not 0 <= n <= MAX_ORDER:
        raise WordTooLong(f"E_n is available for n <= {MAX_ORDER}")
    grid, total = window.grid, 0.0
    for name in names:
        fld = window.fields[name]
        amp = _Amplitudes(fld, window.t, grid)
        for w in words(n):
            total += mesh.integrate_plane(_density(amp, w.letters, fld.vector), grid)
    return total


def _q_terms(th: _Amplitudes, w: _Amplitudes, letters):
    """Pointwise squares of (grad G theta, d_t G w, div G w) for a word G."""
    r = th.r
    if letters == ():
        return th.fr**2, w.ft**2, (w.fr + w.f / r) ** 2
    if letters == ("Dt",):
        return th.ftr**2, w.ftt**2, (w.ftr + w.ft / r) ** 2
    if letters == ("Dr",):
        div = w.fr + w.f / r
        div_r = deriv_r(div, EVEN, w.grid)
        return (th.frr**2 + (th.fr / r) ** 2, w.ftr**2 + (w.ft / r) ** 2, div_r**2)
    if letters == ("X",):
        return th.drXf**2, w.dtXf**2, (w.drXf + w.Xf / r) ** 2
    raise WordTooLong("Q_n is available for n <= 2")


def energy_Q(n: int, window: SnapshotWindow, with_cutoff: bool = False, M: float = 1.0) -> float:
    """sum over |alpha| <= n-1 of the sigma_- weighted norms of grad theta,
    d_t w and div w; ``with_cutoff`` premultiplies by the interior cutoff."""
    if not 1 <= n <= MAX_ORDER:
        raise WordTooLong(f"Q_n is available for 1 <= n <= {MAX_ORDER}")
    grid, t = window.grid, window.t
    th_f, w_f = window.fields["theta_dot"], window.fields["w_dot"]
    if with_cutoff:
        chi = interior_cutoff(t, grid.r, M)
        th_f, w_f = th_f.premultiplied(chi), w_f.premultiplied(chi)
    th, w = _Amplitudes(th_f, t, grid), _Amplitudes(w_f, t, grid)
    sm2 = sigma_weights(t, grid.r)[0] ** 2
    total = 0.0
    for word in words(n - 1):
        for dens in _q_terms(th, w, word.letters):
            total += math.sqrt(mesh.integrate_plane(sm2 * dens, grid))
    return total


# ---------------------------------------------------------------- exterior potential

@dataclass
class PotentialDerivs:
    """Exterior potential and its derivatives from Bernoulli's law, r >= M + 1."""

    phi: np.ndarray
    phi_t: np.ndarray
    phi_r: np.ndarray
    phi_tt: np.ndarray
    phi_tr: np.ndarray
    phi_rr: np.ndarray


def potential_derivs(flow: solver.FlowState, flow_t, M: float) -> PotentialDerivs:
    ref = potential.reference_model(flow.model)
    rho, U = flow.rho, flow.U
    rho_t, U_t = flow_t[0], flow_t[1]
    phi = transform.exterior_potential(flow, M).phi
    phi_t = -0.5 * U**2 - eos.enthalpy(rho, ref)
    phi_tt = -U * U_t - eos.enthalpy_prime(rho, ref) * rho_t
    U_r = deriv_r(U, ODD, flow.grid)
    return PotentialDerivs(phi, phi_t, U, phi_tt, U_t, U_r)


def _tilde_terms(d: PotentialDerivs, t, r, n):
    """Pointwise |d_t G phi|^2 + |grad G phi|^2 summed over |G| <= n."""
    out = d.phi_t**2 + d.phi_r**2
    if n >= 1:
        out = out + d.phi_tt**2 + d.phi_tr**2                           # Dt
        out = out + d.phi_tr**2 + d.phi_rr**2 + (d.phi_r / r) ** 2      # Dr
        dtX = d.phi_t + t * d.phi_tt + r * d.phi_tr
        drX = t * d.phi_tr + d.phi_r + r * d.phi_rr
        out = out + dtX**2 + drX**2                                     # X
    return out


def energy_tilde(n: int, window: SnapshotWindow, M: float = 1.0,
                 derivs: Optional[PotentialDerivs] = None) -> float:
    """Ghost-weighted energy of the exterior potential on r >= M + 1."""
    if not 0 <= n <= 1:
        raise WordTooLong("the ghost-weighted energy is available for n <= 1")
    grid, t, r = window.grid, window.t, window.grid.r
    d = derivs or potential_derivs(window.flow, window.flow_t, M)
    weight = ((1.0 + (r - t - M) ** 2) ** -0.25 * np.exp(ghost_weight(r - t))
              * exterior_cutoff(t, r, M))
    return mesh.integrate_plane(weight * _tilde_terms(d, t, r, n), grid, mask=r >= M + 1.0)


def z_density(d: PotentialDerivs, t, r) -> np.ndarray:
    """sum over |mu| <= 1 of |Z Gamma^mu phi|^2, pointwise."""
    out = (d.phi_t + d.phi_r) ** 2
    out = out + (d.phi_tt + d.phi_tr) ** 2
    out = out + (d.phi_rr + d.phi_tr) ** 2 + (d.phi_r / r) ** 2
    dtX = d.phi_t + t * d.phi_tt + r * d.phi_tr
    drX = t * d.phi_tr + d.phi_r + r * d.phi_rr
    return out + (dtX + drX) ** 2


def z_rate(d: PotentialDerivs, t: float, grid: RadialGrid, M: float) -> float:
    """Spatial integral over D+ of sigma_-^(-2) |Z Gamma phi|^2."""
    r = grid.r
    inner = mesh.inner_mask(t, M, grid)
    sm = sigma_weights(t, r)[0]
    return mesh.integrate_plane(z_density(d, t, r) / sm**2, grid, mask=~inner)


class ZIntegral:
    """Trapezoidal accumulation in time of :func:`z_rate` samples."""

    def __init__(self):
        self.value = 0.0
        self._last: Optional[Tuple[float, float]] = None

    def add(self, t: float, rate: float) -> float:
        if self._last is not None:
            t0, r0 = self._last
            self.value += 0.5 * (t - t0) * (rate + r0)
        self._last = (t, rate)
        return self.value


# ---------------------------------------------------------------- fits and checks

@dataclass
class DecayFit:
    exponent: float
    intercept: float
    residual: float


def decay_fit(t, m) -> DecayFit:
    """Least-squares slope of log m against log t."""
    t = np.asarray(t, dtype=float)
    m = np.asarray(m, dtype=float)
    if t.size < 8:
        raise InsufficientSamples(f"need at least 8 samples, got {t.size}")
    if np.any(~(m > 0)) or np.any(~(t > 0)):
        raise NonPositiveValues("decay fits need positive times and values")
    if t.max() < 10.0 * t.min():
        raise InsufficientSamples("samples must span at least one decade in t")
    x, y = np.log(t), np.log(m)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return DecayFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res**2))))


def support_radius(values, grid: RadialGrid, tol: float) -> float:
    """Largest cell center with |value| > tol, 0 if none."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    idx = np.flatnonzero(np.abs(np.asarray(values)) > tol)
    return float(grid.r[idx[-1]]) if idx.size else 0.0


def hardy_ratio(f, t: float, grid: RadialGrid, M: float = 1.0, rel_tol: float = 1e-4,
                margin: Optional[float] = None) -> float:
    """||sigma_-^(-1) f|| / ||f_r|| over r >= M + 1.

    ``f`` must vanish (relative to its peak, up to ``rel_tol``) beyond
    ``M + t + margin``; the default margin of ten cells absorbs the smooth
    numerical precursor ahead of the cone.
    """
    f = np.asarray(f, dtype=float)
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    if margin is None:
        margin = 10.0 * grid.dr
    outside = grid.r > M + t + margin
    if scale > 0 and np.any(np.abs(f[outside]) > rel_tol * scale):
        raise NotCompactlySupported("field is not supported inside the light cone")
    ext = grid.r >= M + 1.0
    sm = sigma_weights(t, grid.r)[0]
    den = mesh.l2_radial(deriv_r(f, EVEN, grid), grid, mask=ext)
    if den == 0.0:
        raise ZeroDenominator("gradient norm vanishes on r >= M + 1")
    return mesh.l2_radial(f / sm, grid, mask=ext) / den


# ---------------------------------------------------------------- report

@dataclass
class EnergyReport:
    t: float
    E0: float = 0.0
    E1: float = 0.0
    E2: float = 0.0
    Q1: float = 0.0
    Q2: float = 0.0
    Q1m: float = 0.0
    Q2m: float = 0.0
    Etilde0: float = 0.0
    Etilde1: float = 0.0
    Zint: float = 0.0
    sup_theta_minus: float = 0.0
    sup_theta_plus: float = 0.0
    sup_w_minus: float = 0.0
    sup_w_plus: float = 0.0
    z_support_radius: float = 0.0
    hardy_ratio: float = float("nan")
    max_grad_U: float = 0.0
    max_grad_rho: float = 0.0
    # decay probes, kept out of the series columns
    sup_wa_plus: float = 0.0
    sup_W_plus: float = 0.0
    sup_dtheta_a_interior: float = 0.0
    sup_Zphi_plus: float = 0.0
    sup_dphi_plus: float = 0.0
    z_rate: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


SERIES_COLUMNS = ("t", "E0", "E1", "E2", "Q1", "Q2", "Q1m", "Q2m", "Etilde0", "Etilde1", "Zint",
                  "sup_theta_minus", "sup_theta_plus", "sup_w_minus", "sup_w_plus",
                  "z_support_radius", "hardy_ratio", "max_grad_U", "max_grad_rho")
PROBE_COLUMNS = ("t", "sup_wa_plus", "sup_W_plus", "sup_dtheta_a_interior",
                 "sup_Zphi_plus", "sup_dphi_plus", "z_rate")

Z_TOL = 1e-10


def _sup(values, mask) -> float:
    v = np.abs(values[mask])
    return float(v.max()) if v.size else 0.0


def compute_report(window: SnapshotWindow, M: float, z_acc: Optional[ZIntegral] = None,
                   n_max: int = MAX_ORDER) -> EnergyReport:
    grid, t, r = window.grid, window.t, window.grid.r
    rep = EnergyReport(t=t)
    rep.E0 = energy_E(0, window)
    if n_max >= 1:
        rep.E1 = energy_E(1, window)
        rep.Q1 = energy_Q(1, window)
        rep.Q1m = energy_Q(1, window, with_cutoff=True, M=M)
    if n_max >= 2:
        rep.E2 = energy_E(2, window)
        rep.Q2 = energy_Q(2, window)
        rep.Q2m = energy_Q(2, window, with_cutoff=True, M=M)

    d = potential_derivs(window.flow, window.flow_t, M)
    rep.Etilde0 = energy_tilde(0, window, M, d)
    rep.Etilde1 = energy_tilde(1, window, M, d)
    rep.z_rate = z_rate(d, t, grid, M)
    if z_acc is not None:
        rep.Zint = z_acc.add(t, rep.z_rate)

    inner = mesh.inner_mask(t, M, grid)
    th, wd = window.fields["theta_dot"].f, window.fields["w_dot"].f
    rep.sup_theta_minus = _sup(th, inner)
    rep.sup_theta_plus = _sup(th, ~inner)
    rep.sup_w_minus = _sup(wd, inner)
    rep.sup_w_plus = _sup(wd, ~inner)
    rep.z_support_radius = support_radius(window.fields["z_dot"].f, grid, Z_TOL)
    if t > 0:
        try:
            rep.hardy_ratio = hardy_ratio(th, t, grid, M)
        except (ZeroDenominator, NotCompactlySupported):
            rep.hardy_ratio = float("nan")
    rep.max_grad_U, rep.max_grad_rho = solver.max_gradients(window.flow)

    wa = window.fields["w_a"].f
    rep.sup_wa_plus = _sup(wa, ~inner)
    rep.sup_W_plus = _sup(window.flow.U, ~inner)
    tha = window.fields["theta_a"]
    grad_tha = np.sqrt(deriv_r(tha.f, EVEN, grid) ** 2 + tha.f_t**2)
    rep.sup_dtheta_a_interior = _sup(grad_tha, r <= 0.5 * t)
    ext_plus = ~inner & (r >= M + 1.0)
    rep.sup_Zphi_plus = _sup(np.abs(d.phi_t + d.phi_r), ext_plus)
    rep.sup_dphi_plus = _sup(np.sqrt(d.phi_t**2 + d.phi_r**2), ext_plus)
    return rep
