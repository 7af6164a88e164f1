import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from chapgas import diagnostics as D
from chapgas import eos, mesh, potential, solver, transform
from chapgas.errors import (
    InsufficientSamples,
    NonPositiveValues,
    NotCompactlySupported,
    WordTooLong,
    ZeroDenominator,
)
from chapgas.mesh import EVEN, ODD

CHAP = eos.GasModel()


# ------------------------------------------------------------ weights

@pytest.mark.parametrize("t, r, expected", [(5, 5, (1, 11)), (0, 2, (3, 3)), (3, 4, (2, 8))])
def test_sigma_weights(t, r, expected):
    assert tuple(float(x) for x in D.sigma_weights(t, r)) == expected


def test_ghost_weight_values():
    assert D.ghost_weight(0.0) == 2.0
    assert D.ghost_weight(-3.0) == 1.0
    assert D.ghost_weight(1e12) == pytest.approx(4.0, abs=1e-5)
    q = np.linspace(-1e3, 1e3, 20001)
    g = D.ghost_weight(q)
    assert np.all(g >= 0) and np.all(g <= 4) and np.all(np.diff(g) > 0)


@pytest.mark.parametrize("q", [-50.0, -3.0, -0.5, 0.0, 0.7, 4.0, 80.0])
def test_ghost_weight_is_antiderivative(q):
    dens = lambda s: (1 + abs(s)) ** -1.5
    val = quad(dens, -np.inf, min(q, 0.0), epsabs=1e-13, epsrel=1e-13)[0]
    if q > 0:
        val += quad(dens, 0.0, q, epsabs=1e-13, epsrel=1e-13)[0]
    assert D.ghost_weight(q) == pytest.approx(val, abs=1e-10)
    assert D.ghost_weight_prime(q) * (1 + abs(q)) ** 1.5 == pytest.approx(1.0, abs=1e-10)


def test_ghost_weight_prime_matches_difference():
    q = np.linspace(-20, 20, 81) + 0.013
    h = 1e-4
    fd = (D.ghost_weight(q + h) - D.ghost_weight(q - h)) / (2 * h)
    assert np.max(np.abs(fd - D.ghost_weight_prime(q))) < 1e-8


def test_cutoffs():
    assert D.chi_hat(0.4) == 1.0 and D.chi_hat(0.8) == 0.0
    s = np.linspace(0.5, 0.75, 501)
    assert np.all(np.diff(D.chi_hat(s)) <= 0)
    assert D.chi_tilde(0.5) == 0.0 and D.chi_tilde(1.0) == 1.0 and D.chi_tilde(0.2) == 0.0
    # C2 at the joins
    for fn, a, b in ((D.chi_hat, 0.5, 0.75), (D.chi_tilde, 0.5, 1.0)):
        for x in (a, b):
            _, d1, d2 = fn(x, derivs=True)
            assert d1 == 0 and d2 == 0


def test_interior_cutoff_time_derivatives():
    r = np.linspace(0.1, 6, 60)
    t, h, M = 3.0, 1e-4, 1.0
    c, ct, ctt = D.interior_cutoff(t, r, M)
    cp = D.interior_cutoff(t + h, r, M)[0]
    cm = D.interior_cutoff(t - h, r, M)[0]
    assert np.max(np.abs((cp - cm) / (2 * h) - ct)) < 1e-6
    assert np.max(np.abs((cp - 2 * c + cm) / h**2 - ctt)) < 1e-4


# ------------------------------------------------------------ words

def test_words():
    ws = D.words(2)
    assert len(ws) == 13 and len(ws[0]) == 0 and len(set(ws)) == 13
    assert len(D.words(1)) == 4
    with pytest.raises(WordTooLong):
        D.GammaWord(("Dt", "Dt", "Dt"))
    with pytest.raises(WordTooLong):
        D.words(3)
    with pytest.raises(ValueError):
        D.GammaWord(("Dz",))


def window_from(t, grid, **fields):
    return D.SnapshotWindow(t, grid, fields, 1e-3, None, None)


def test_gamma_apply_examples():
    g = mesh.build_grid(4, 400)
    zero = np.zeros(g.N)
    w = window_from(2.5, g, f=D.RadialField(g.r.copy(), zero, zero, ODD))
    assert np.array_equal(D.gamma_apply(w, "f", D.GammaWord()), g.r)
    assert np.allclose(D.gamma_apply(w, "f", ("X",)), g.r, atol=1e-12)
    with pytest.raises(WordTooLong):
        D.gamma_apply(w, "f", ("X", "X", "X"))


# Cartesian oracle for the reduction table
tt, x, y, rr = sp.symbols("t x y r", real=True)
F_RAD = sp.exp(-rr**2) * sp.cos(tt) + rr**2 * sp.sin(2 * tt) * sp.exp(-rr**2)
W_RAD = rr * sp.exp(-rr**2) * (1 + sp.sin(tt))

LETTER_OPS = {
    "Dt": lambda e: [sp.diff(e, tt)],
    "Dr": lambda e: [sp.diff(e, x), sp.diff(e, y)],
    "X": lambda e: [tt * sp.diff(e, tt) + x * sp.diff(e, x) + y * sp.diff(e, y)],
}


def cartesian_density(components, letters):
    comps = list(components)
    for a in reversed(letters):
        comps = [d for c in comps for d in LETTER_OPS[a](c)]
    return sum(c**2 for c in comps)


def _oracle(expr_rad, vector, letters, t0, points):
    rad = sp.sqrt(x**2 + y**2)
    base = expr_rad.subs(rr, rad)
    comps = [base * x / rad, base * y / rad] if vector else [base]
    dens = sp.lambdify((tt, x, y), cartesian_density(comps, letters), "math")
    # any direction; use a rotated one to exercise both components
    return [dens(t0, p * math.cos(0.7), p * math.sin(0.7)) for p in points]


@pytest.mark.parametrize("vector", [False, True])
@pytest.mark.parametrize("letters", [w.letters for w in D.words(2)])
def test_reduction_table_against_cartesian_oracle(vector, letters):
    t0 = 1.3
    expr = W_RAD if vector else F_RAD
    parity = ODD if vector else EVEN
    g = mesh.build_grid(6, 6000)
    amps = [sp.lambdify(rr, sp.diff(expr, tt, k).subs(tt, t0), "numpy")(g.r) for k in range(3)]
    amps = [np.broadcast_to(a, g.r.shape).astype(float) for a in amps]
    w = window_from(t0, g, f=D.RadialField(*amps, parity, vector))
    dens = D.gamma_density(w, "f", letters)
    cells = [40, 300, 900, 1700, 2500]
    ref = _oracle(expr, vector, letters, t0, g.r[cells])
    for got, want in zip(dens[cells], ref):
        assert got == pytest.approx(want, rel=1e-7, abs=1e-10)


# ------------------------------------------------------------ energies

def _run_window(eps, T, R=10.0, N=800, model=CHAP):
    g = mesh.build_grid(R, N)
    prof = solver.InitialProfiles(eps)
    fs, ps = solver.init_state(prof, g, model), potential.init_potential(prof, g, model)
    z0 = transform.to_twz(fs).z
    if T > 0:
        n = int(np.ceil(T / (0.3 * g.dr)))
        for _ in range(n):
            fs = solver.step(fs, T / n)
            ps = potential.step(ps, T / n)
    return D.build_window(fs, ps, z0)


def test_zero_perturbation_energies():
    w = _run_window(0.0, 1.0)
    rep = D.compute_report(w, 1.0, D.ZIntegral())
    for k in ("E0", "E1", "E2", "Q1", "Q2", "Q1m", "Q2m", "Etilde0", "Etilde1", "Zint"):
        assert getattr(rep, k) == 0.0


def test_energies_vanish_at_t0():
    w = _run_window(0.1, 0.0)
    assert D.energy_E(0, w) <= 1e-30
    # at t = 0, X = r d_r, so only words holding Dt can see the nonzero rates
    # such as d_t z_dot = -U z_r
    g = w.grid
    for word in D.words(2):
        if "Dt" in word.letters:
            continue
        for name in D.PERTURBATIONS:
            dens = D.gamma_density(w, name, word)
            assert mesh.integrate_plane(dens, g) <= 1e-20     # theta_dot(0) is roundoff
    assert D.energy_E(1, w) > 0


def test_report_is_finite_nonnegative_and_ordered():
    w = _run_window(0.1, 2.0)
    rep = D.compute_report(w, 1.0, D.ZIntegral())
    vals = rep.to_dict()
    for k, v in vals.items():
        assert math.isfinite(v) and v >= 0, k
    assert rep.E0 <= rep.E1 <= rep.E2
    assert rep.E2 > 0 and rep.Q2 > 0 and rep.Etilde1 > 0
    assert list(D.SERIES_COLUMNS)[0] == "t" and set(D.SERIES_COLUMNS) <= set(vals)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0))
def test_energy_scaling(c):
    g = mesh.build_grid(4, 200)
    base = dict(theta_dot=D.RadialField(np.exp(-g.r**2), np.sin(g.r) * np.exp(-g.r**2),
                                        g.r**2 * np.exp(-g.r**2), EVEN),
                w_dot=D.RadialField(g.r * np.exp(-g.r**2), 0.3 * g.r * np.exp(-g.r**2),
                                    -g.r * np.exp(-g.r**2), ODD, True),
                z_dot=D.RadialField(np.exp(-2 * g.r**2), np.zeros(g.N), np.zeros(g.N), EVEN))
    w1 = window_from(2.0, g, **base)
    wc = window_from(2.0, g, **{k: v.scaled(c) for k, v in base.items()})
    for n in range(3):
        assert D.energy_E(n, wc) == pytest.approx(c**2 * D.energy_E(n, w1), rel=1e-12)
    assert D.energy_Q(2, wc) == pytest.approx(c * D.energy_Q(2, w1), rel=1e-12)


def test_energy_order_limits():
    g = mesh.build_grid(4, 200)
    w = window_from(1.0, g)
    with pytest.raises(WordTooLong):
        D.energy_E(3, w)
    with pytest.raises(WordTooLong):
        D.energy_Q(0, w)
    with pytest.raises(WordTooLong):
        D.energy_tilde(2, w)


def test_cutoff_energy_matches_plain_inside_plateau():
    g = mesh.build_grid(12, 1200)
    t, M = 6.0, 1.0
    # supported in r < 4 while chi = 1 on r <= (t + 2M + 2)/2 = 5
    bump = solver.bump(g.r, 4.0)
    fields = dict(theta_dot=D.RadialField(bump, 0.5 * bump, -bump, EVEN),
                  w_dot=D.RadialField(solver.odd_bump(g.r, 4.0), bump, 2 * bump, ODD, True))
    w = window_from(t, g, **fields)
    for n in (1, 2):
        assert D.energy_Q(n, w, with_cutoff=True, M=M) == pytest.approx(
            D.energy_Q(n, w), rel=1e-10)


def test_cutoff_energy_reduces_outside_plateau():
    g = mesh.build_grid(12, 1200)
    wide = np.exp(-((g.r - 6) ** 2))
    fields = dict(theta_dot=D.RadialField(wide, 0 * wide, 0 * wide, EVEN),
                  w_dot=D.RadialField(g.r * wide, 0 * wide, 0 * wide, ODD, True))
    w = window_from(2.0, g, **fields)
    assert D.energy_Q(1, w, with_cutoff=True) < 0.1 * D.energy_Q(1, w)


def _gauss_derivs(t, r, c=1.5):
    """phi = exp(-(r - t - c)^2) with exact first and second derivatives."""
    s = r - t - c
    e = np.exp(-s**2)
    d1 = -2 * s * e
    d2 = (4 * s**2 - 2) * e
    return D.PotentialDerivs(e, -d1, d1, d2, -d2, d2)


def _tilde_oracle(t, M, n, c=1.5):
    T, r_, X_ = sp.symbols("T r X", real=True)
    xs, ys = sp.symbols("xs ys", real=True)
    rad = sp.sqrt(xs**2 + ys**2)
    phi = sp.exp(-(rad - T - c) ** 2)

    def grad_t(e):
        return [sp.diff(e, T)], [sp.diff(e, xs), sp.diff(e, ys)]
    gammas = [phi]
    if n >= 1:
        gammas += [sp.diff(phi, T), sp.diff(phi, xs), sp.diff(phi, ys),
                   T * sp.diff(phi, T) + xs * sp.diff(phi, xs) + ys * sp.diff(phi, ys)]
    dens = 0
    for gph in gammas:
        tpart, spart = grad_t(gph)
        dens += sum(d**2 for d in tpart + spart)
    f = sp.lambdify((T, xs, ys), dens, "math")

    def smooth(v):
        v = min(max(v, 0.0), 1.0)
        return v**3 * (10 - 15 * v + 6 * v * v)

    def integrand(r):
        q = r - t
        ghost = 2 / math.sqrt(1 - q) if q <= 0 else 4 - 2 / math.sqrt(1 + q)
        chi = smooth((2 * r / (t + 2 * M + 2) - 0.5) * 2)
        w = (1 + (r - t - M) ** 2) ** -0.25 * math.exp(ghost) * chi
        return 2 * math.pi * r * w * f(t, r, 0.0)
    lo, hi = M + 1, t + c + 12
    knots = [(t + 2 * M + 2) / 4, (t + 2 * M + 2) / 2, t + c]
    return quad(integrand, lo, hi, points=knots, limit=400, epsabs=0, epsrel=1e-12)[0]


@pytest.mark.parametrize("n", [0, 1])
@pytest.mark.parametrize("t", [0.5, 10.0])
def test_energy_tilde_against_quadrature(n, t):
    M = 1.0
    g = mesh.build_grid(30, 30000)
    w = window_from(t, g)
    got = D.energy_tilde(n, w, M, _gauss_derivs(t, g.r))
    assert got == pytest.approx(_tilde_oracle(t, M, n), rel=1e-6)


def test_energy_tilde_weight_bounds():
    r = np.linspace(0, 200, 4001)
    for t in (0.0, 10.0, 100.0):
        e = np.exp(D.ghost_weight(r - t))
        assert np.all(e >= 1.0) and np.all(e <= math.exp(4))


def test_z_integral():
    z = D.ZIntegral()
    assert z.add(0.0, 0.0) == 0.0 and z.add(1.0, 0.0) == 0.0
    vals = [z.add(t, 1.0 / t) for t in np.linspace(1.5, 10, 50)]
    assert np.all(np.diff(vals) >= 0)
    g = mesh.build_grid(30, 3000)
    zero = D.PotentialDerivs(*(np.zeros(g.N) for _ in range(6)))
    assert D.z_rate(zero, 5.0, g, 1.0) == 0.0


def test_z_density_kills_outgoing_profile():
    # phi = F(r - t) has Z phi = 0 but Z X phi carries the r F'/r geometric term
    g = mesh.build_grid(30, 3000)
    d = _gauss_derivs(10.0, g.r)
    dens = D.z_density(d, 10.0, g.r)
    expected = (d.phi_r / g.r) ** 2 + (d.phi_t + d.phi_r) ** 2
    assert np.max(np.abs(dens - expected)) < 1e-12


# ------------------------------------------------------------ fits and checks

def test_decay_fit_examples():
    t = np.geomspace(1, 100, 30)
    assert D.decay_fit(t, t**-0.5).exponent == pytest.approx(-0.5, abs=1e-12)
    assert D.decay_fit(t, np.full(t.size, 3.0)).exponent == pytest.approx(0.0, abs=1e-12)
    t = np.linspace(10, 100, 200)
    m = 3 / t * (1 + 0.01 * np.sin(t))
    assert D.decay_fit(t, m).exponent == pytest.approx(-1.0, abs=0.02)


def test_decay_fit_errors():
    with pytest.raises(InsufficientSamples):
        D.decay_fit(np.arange(1, 8), np.ones(7))
    with pytest.raises(InsufficientSamples):
        D.decay_fit(np.linspace(10, 50, 20), np.ones(20))
    with pytest.raises(NonPositiveValues):
        D.decay_fit(np.geomspace(1, 100, 10), np.r_[np.ones(9), 0.0])


def test_support_radius():
    g = mesh.build_grid(3, 300)
    assert D.support_radius(np.zeros(g.N), g, 1e-10) == 0.0
    ind = np.where(g.r < 1.0, 1.0, 0.0)
    assert D.support_radius(ind, g, 0.5) == pytest.approx(1.0, abs=g.dr)
    with pytest.raises(ValueError):
        D.support_radius(ind, g, 0.0)


def _hardy_oracle(t, M):
    a, b = M + 1, M + 2

    def f(r):
        s = (2 * r - a - b) / (b - a)
        return math.exp(1 - 1 / (1 - s * s)) if abs(s) < 1 else 0.0

    def fp(r):
        s = (2 * r - a - b) / (b - a)
        if abs(s) >= 1:
            return 0.0
        return f(r) * (-2 * s / (1 - s * s) ** 2) * 2 / (b - a)
    num = quad(lambda r: 2 * math.pi * r * (f(r) / (1 + abs(t - r))) ** 2, a, b,
               points=[t], epsabs=0, epsrel=1e-13, limit=200)[0]
    den = quad(lambda r: 2 * math.pi * r * fp(r) ** 2, a, b, epsabs=0, epsrel=1e-13, limit=200)[0]
    return math.sqrt(num / den)


def test_hardy_ratio_against_quadrature():
    t, M = 10.0, 1.0
    g = mesh.build_grid(20, 20000)
    s = (2 * g.r - 5) / 1.0
    f = solver.bump(s, 1.0)
    got = D.hardy_ratio(f, t, g, M)
    assert got == pytest.approx(_hardy_oracle(t, M), rel=1e-8)
    assert D.hardy_ratio(7.5 * f, t, g, M) == pytest.approx(got, rel=1e-13)


def test_hardy_ratio_errors():
    g = mesh.build_grid(20, 2000)
    with pytest.raises(ZeroDenominator):
        D.hardy_ratio(np.zeros(g.N), 10.0, g)
    wide = np.exp(-((g.r - 15) ** 2))
    with pytest.raises(NotCompactlySupported):
        D.hardy_ratio(wide, 5.0, g)
