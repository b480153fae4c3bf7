"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible under pytest -s) and
asserts the same condition, so the printed verdict can never disagree
with the pytest outcome.  Tolerances are part of the contract: a check
that cannot be met at its stated tolerance must fail, not be loosened.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from affinetherm.contact import ContactHamiltonian, compare_with_lift
from affinetherm.duality import DualChart, divergence_report
from affinetherm.immersion import GraphImmersion, degeneracy_locus
from affinetherm.potentials import (
    constant_potential,
    ideal_gas_entropy,
    ideal_gas_helmholtz,
    ising_free_energy,
    quadratic,
    vdw_helmholtz,
)
from affinetherm.relaxation import (
    IntegratorConfig,
    LiftedState,
    RelaxationGenerator,
    closed_form_single,
    compressibility,
    induced_conjugates,
    integrate,
    lyapunov_check,
    sign_table,
)

QUARTERS = [0.75 + 0.4375 * k for k in range(10)]


def _report(ok: bool, label: str, detail: str):
    print(f"\n{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


def test_criterion_01_equation_of_state_and_specific_heat():
    p = ideal_gas_entropy(R=1.0, c=1.5)
    worst_exact = 0.0
    worst_fd = 0.0
    for U in QUARTERS:
        for V in QUARTERS:
            x = np.array([U, V])
            y = p.grad(x)
            worst_exact = max(worst_exact, abs(y[1] * V - 1.0))
            y_fd = p.fd_grad(x)
            worst_fd = max(worst_fd, abs(y_fd[1] * V - 1.0))
    # temperature probes: T = 1 / y_1 lands exactly on 1 and 2
    T1 = 1.0 / p.grad(np.array([1.5, 2.0]))[0]
    T2 = 1.0 / p.grad(np.array([3.0, 2.0]))[0]
    slope = (3.0 - 1.5) / (T2 - T1)
    fd_T1 = 1.0 / p.fd_grad(np.array([1.5, 2.0]))[0]
    fd_T2 = 1.0 / p.fd_grad(np.array([3.0, 2.0]))[0]
    ok = (
        worst_exact == 0.0
        and T1 == 1.0
        and T2 == 2.0
        and slope == 1.5
        and worst_fd <= 1e-8
        and abs(fd_T1 - 1.0) <= 1e-8
        and abs(fd_T2 - 2.0) <= 1e-8
    )
    _report(
        ok,
        "criterion-01 equation of state and specific heat",
        f"y2*V-R exact (max {worst_exact:.1e}), T probes (1,2), dU/dT = {slope}, "
        f"FD mode off by <= {max(worst_fd, abs(fd_T1 - 1.0), abs(fd_T2 - 2.0)):.1e}",
    )


def test_criterion_02_dual_potential_closed_form():
    chart = DualChart(ideal_gas_helmholtz(R=1.0, T=1.0))
    worst = 0.0
    for eta1 in np.linspace(0.1, 2.0, 20):
        phi = chart.dual_potential(np.array([eta1]), x0=np.array([1.0]))
        worst = max(worst, abs(phi - (1.0 + math.log(eta1))))
    _report(
        worst <= 1e-8,
        "criterion-02 dual potential closed form",
        f"max |phi - (RT - RT ln RT + RT ln eta)| = {worst:.2e} over 20 targets",
    )


def test_criterion_03_divergence_equality():
    rng = np.random.default_rng(42)
    models = []
    for seed in (0, 1, 2):
        r = np.random.default_rng(seed)
        M = r.normal(size=(2, 2))
        models.append((quadratic(M.T @ M + 0.5 * np.eye(2)), -2.0, 2.0))
    models.append((ideal_gas_helmholtz(), 0.3, 5.0))
    models.append((ideal_gas_entropy(), 0.3, 5.0))
    models.append((ising_free_energy(), -3.0, 3.0))
    worst = 0.0
    for p, lo, hi in models:
        chart = DualChart(p)
        imm = GraphImmersion(p)
        for _ in range(100):
            x1 = lo + (hi - lo) * rng.random(p.dim)
            x2 = lo + (hi - lo) * rng.random(p.dim)
            rep = divergence_report(chart, imm, x1, x2)
            worst = max(worst, rep.discrepancy)
    _report(
        worst <= 1e-10,
        "criterion-03 canonical equals geometric divergence",
        f"max |D_canonical - D_geometric| = {worst:.2e} over 600 pairs, 6 models",
    )


def test_criterion_04_degeneracy_locus():
    loc1 = degeneracy_locus(vdw_helmholtz(1.0), 0.4, 5.0)
    loc09 = degeneracy_locus(vdw_helmholtz(0.9), 0.4, 5.0)
    loc11 = degeneracy_locus(vdw_helmholtz(1.1), 0.4, 5.0)

    # independent oracle: dense sign scan of the scalar curvature plus brentq
    p = vdw_helmholtz(0.9)
    xs = np.linspace(0.4, 5.0, 20001)
    hs = np.array([p.hess(np.array([v]))[0, 0] for v in xs])
    oracle = []
    for i in range(len(xs) - 1):
        if hs[i] == 0.0:
            oracle.append(xs[i])
        elif hs[i] * hs[i + 1] < 0.0:
            oracle.append(brentq(lambda v: p.hess(np.array([v]))[0, 0], xs[i], xs[i + 1], xtol=1e-13))
    ok = (
        len(loc1) == 1
        and abs(loc1[0] - 1.0) <= 1e-10
        and len(loc09) == 2
        and loc09[0] < 1.0 < loc09[1]
        and len(loc11) == 0
        and len(oracle) == 2
        and abs(loc09[0] - oracle[0]) <= 1e-9
        and abs(loc09[1] - oracle[1]) <= 1e-9
    )
    _report(
        ok,
        "criterion-04 curvature degeneracy locus",
        f"critical touch off by {abs(loc1[0] - 1.0) if loc1 else float('nan'):.1e}; "
        f"two roots below, none above; sign-scan oracle agrees to 1e-9",
    )


def test_criterion_05_relaxation_matches_closed_form():
    rng = np.random.default_rng(7)
    cases = [
        (ideal_gas_helmholtz(), 0.5, 4.0),
        (ideal_gas_entropy(), 0.5, 4.0),
        (vdw_helmholtz(1.0), 0.6, 3.0),
        (ising_free_energy(), -2.0, 2.0),
    ]
    cfg = IntegratorConfig(dt=1e-3, t_end=10.0, record_every=1000, conv_tol=0.0)
    worst = 0.0
    for p, lo, hi in cases:
        gen = RelaxationGenerator.single(p)
        for _ in range(20):
            x = lo + (hi - lo) * rng.random(p.dim)
            z0 = float(rng.normal())
            y0 = rng.normal(size=p.dim)
            traj = integrate(gen, LiftedState(x, y0, z0), cfg)
            zc = closed_form_single(p, x, z0, traj.t)
            g = p.grad(x)
            yc = g[None, :] + np.exp(-traj.t)[:, None] * (y0 - g)[None, :]
            worst = max(worst, float(np.max(np.abs(traj.z - zc))),
                        float(np.max(np.abs(traj.y - yc))))
    _report(
        worst <= 1e-8,
        "criterion-05 fixed-step integration vs closed form",
        f"max deviation {worst:.2e} over 80 runs, dt=1e-3, t in [0, 10]",
    )


def test_criterion_06_lifted_limits_recover_gradient_and_value():
    p = ising_free_energy()
    gen = RelaxationGenerator.single(p)
    cfg = IntegratorConfig(dt=1e-3, t_end=25.0, record_every=5000, conv_tol=0.0)
    worst_y = 0.0
    worst_z = 0.0
    for xv in (-2.0, -0.5, 0.0, 0.5, 2.0):
        x = np.array([xv])
        traj = integrate(gen, LiftedState(x, np.array([0.0]), 0.0), cfg)
        worst_y = max(worst_y, abs(traj.y[-1, 0] - math.tanh(xv)))
        worst_z = max(worst_z, abs(traj.z[-1] - (math.log(math.cosh(xv)) + math.log(2.0))))
    _report(
        worst_y <= 1e-8 and worst_z <= 1e-8,
        "criterion-06 lifted run recovers gradient and value",
        f"max |y - tanh x| = {worst_y:.2e}, max |z - ln cosh x - ln 2| = {worst_z:.2e} by t=25",
    )


def _t_anti(u: float) -> float:
    # antiderivative of -1 / (u (u - 3)^2), real on (0, 3)
    return -math.log(u) / 9.0 + math.log(3.0 - u) / 9.0 + 1.0 / (3.0 * (u - 3.0))


def test_criterion_07_two_level_forward_and_backward():
    gen = RelaxationGenerator.two(constant_potential(0.0), constant_potential(3.0))
    x = np.array([0.0])

    fwd = integrate(gen, LiftedState(x, np.array([0.0]), 1.0),
                    IntegratorConfig(dt=1e-3, t_end=200.0, record_every=10000))
    fwd_ok = abs(fwd.z[-1]) <= 1e-6

    back_ok = True
    oracle_ok = True
    details = []
    for t_end in (-100.0, -1000.0):
        traj = integrate(gen, LiftedState(x, np.array([0.0]), 1.0),
                         IntegratorConfig(dt=1e-3, t_end=t_end, record_every=100000,
                                          conv_tol=0.0))
        z = traj.z[-1]
        back_ok = back_ok and abs(z - 3.0) <= 10.0 / abs(t_end)
        z_star = brentq(lambda u: _t_anti(u) - (_t_anti(1.0) + t_end),
                        1.0, 3.0 - 1e-12, xtol=1e-15)
        oracle_ok = oracle_ok and abs(z - z_star) <= 5e-13
        details.append(f"t={t_end:g}: |z-3|={abs(z - 3.0):.2e}, |z-oracle|={abs(z - z_star):.1e}")
    _report(
        fwd_ok and back_ok and oracle_ok,
        "criterion-07 algebraic approach to the upper level",
        f"forward |z|={abs(fwd.z[-1]):.1e} by t=200; " + "; ".join(details),
    )


def test_criterion_08_sign_tables():
    single = RelaxationGenerator.single(constant_potential(2.0))
    t1 = sign_table(single, np.array([0.0]), [1.0, 2.0, 3.0])
    gen = RelaxationGenerator.two(constant_potential(0.0), constant_potential(3.0))
    # (2 F_I + F_II) / 3 = 1 is the interior zero of the divergence
    t2 = sign_table(gen, np.array([0.0]), [-1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0])
    ok = (
        t1.w_pattern == (1, 0, -1)
        and all(r.div_base == -1.0 for r in t1.rows)
        and t2.w_pattern == (1, 0, -1, -1, -1, 0, -1)
        and t2.div_pattern == (-1, -1, -1, 0, 1, 0, -1)
    )
    _report(
        ok,
        "criterion-08 sign tables",
        f"single {t1.w_pattern}/div=-1; two-level {t2.w_pattern} and {t2.div_pattern}",
    )


def test_criterion_09_lifted_compressibility_scaling():
    rng = np.random.default_rng(99)
    checked = 0
    ok = True
    for n in (1, 2, 3):
        gen = RelaxationGenerator.two(
            constant_potential(0.0, dim=n), constant_potential(3.0, dim=n)
        )
        x = np.zeros(n)
        for _ in range(1000):
            z = float(rng.uniform(-2.0, 5.0))
            rep = compressibility(gen, x, z)
            wz, _ = gen.w_partials(z, x)
            ok = ok and rep.div_lifted == (n + 1) * wz
            ok = ok and np.sign(rep.div_lifted) == np.sign(rep.div_base)
            checked += 1
    _report(
        ok,
        "criterion-09 lifted divergence scales by n + 1",
        f"equality exact with sign preserved on {checked} samples, n in {{1, 2, 3}}",
    )


def test_criterion_10_contact_equals_lift():
    cfg = IntegratorConfig(dt=1e-3, t_end=10.0, record_every=10, conv_tol=0.0)

    p = ising_free_energy()
    rep1 = compare_with_lift(
        ContactHamiltonian.from_potential(p),
        RelaxationGenerator.single(p),
        LiftedState(np.array([1.0]), np.array([0.25]), 0.0),
        cfg,
    )
    lo, hi = constant_potential(0.0), constant_potential(3.0)
    rep2 = compare_with_lift(
        ContactHamiltonian.from_pair(lo, hi),
        RelaxationGenerator.two(lo, hi),
        LiftedState(np.array([0.0]), np.array([0.3]), 1.0),
        cfg,
    )
    ok = rep1.sup_norm_difference <= 1e-12 and rep2.sup_norm_difference <= 1e-12
    _report(
        ok,
        "criterion-10 contact flow equals the lift",
        f"sup-norm gaps {rep1.sup_norm_difference:.1e} (single, identical arithmetic) "
        f"and {rep2.sup_norm_difference:.1e} (two-level, regrouped arithmetic)",
    )


def test_criterion_11_conjugates_are_family_derivatives():
    cases = [
        (ideal_gas_helmholtz(), np.array([2.0])),
        (ideal_gas_entropy(), np.array([1.5, 3.0])),
        (vdw_helmholtz(1.0), np.array([1.2])),
        (ising_free_energy(), np.array([1.0])),
    ]
    worst = 0.0
    for t in (0.5, 2.0, 10.0):
        for p, x in cases:
            gen = RelaxationGenerator.single(p)
            rep = induced_conjugates(gen, x, t)
            worst = max(worst, rep.residual)
    _report(
        worst <= 1e-6,
        "criterion-11 conjugates match the family derivative",
        f"max FD-vs-ODE residual {worst:.2e} over 4 models, t in {{0.5, 2, 10}}",
    )


def test_criterion_12_lyapunov_descent():
    rng = np.random.default_rng(12)
    worst = -np.inf
    pairs_total = 0
    for _ in range(50):
        A = float(rng.uniform(-1.0, 1.0))
        B = A + float(rng.uniform(0.5, 3.0))
        z0 = float(rng.uniform(A - 0.5, B - 0.1))
        y0 = rng.uniform(-1.0, 1.0, size=1)
        gen = RelaxationGenerator.two(constant_potential(A), constant_potential(B))
        traj = integrate(
            gen,
            LiftedState(np.array([0.0]), y0, z0),
            IntegratorConfig(dt=1e-3, t_end=20.0, record_every=10),
        )
        rep = lyapunov_check(gen, traj)
        worst = max(worst, rep.max_increment)
        pairs_total += rep.pairs_checked
    _report(
        worst <= 1e-10 and pairs_total > 0,
        "criterion-12 Lyapunov descent",
        f"largest same-region increment {worst:.2e} over 50 runs ({pairs_total} pairs)",
    )
