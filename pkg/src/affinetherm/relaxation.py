"""Relaxation generators on the fiber coordinate and their conjugate lifts.

A generator w(z; x) drives dz/dt = w with the base point x frozen.  Its
lift adds dy_a/dt = y_a dw/dz + dw/dx_a, which keeps the conjugate
variables consistent with the x-derivative of the induced solution family.
Two canonical families are built in:

  single(F):      w = F(x) - z, exponential relaxation to the graph of F
  two(F_I, F_II): w = -(z - F_I)(z - F_II)^2 on the region F_II > F_I,
                  exponentially stable at F_I, semi-stable at F_II with an
                  algebraic 1/|t| backward-time rate

Custom generators take explicit partials.  Integration is fixed-step
classical RK4; the canonical families run in the compiled kernel when it
is available.  A negative t_end requests the backward-time run, which is
the forward integration of the negated field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import math

import numpy as np
from scipy.optimize import brentq

from . import _kernel
from .errors import DomainError, IntegrationError, StencilError
from .potentials import Domain, Potential

__all__ = [
    "RelaxationGenerator",
    "LiftedState",
    "IntegratorConfig",
    "Trajectory",
    "FixedPoint",
    "CompressibilityReport",
    "SignTable",
    "SignTableRow",
    "LyapunovReport",
    "InducedConjugates",
    "lifted_field",
    "integrate",
    "closed_form_single",
    "fixed_points",
    "compressibility",
    "sign_table",
    "lyapunov_check",
    "induced_conjugates",
    "product_pair_variant",
]


@dataclass(frozen=True)
class LiftedState:
    """State of the lifted dynamics: frozen base point x, conjugates y, fiber z."""

    x: np.ndarray
    y: np.ndarray
    z: float
    t: float = 0.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    dt is the positive step size; the sign of t_end selects the time
    direction.  Convergence is declared when ||(dy/dt, dz/dt)|| falls
    below conv_tol * (1 + ||(y, z)||); conv_tol = 0 disables the check.
    """

    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 1
    conv_tol: float = 1e-12

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError("dt must be positive and finite")
        if not np.isfinite(self.t_end):
            raise ValueError("t_end must be finite")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.conv_tol < 0.0:
            raise ValueError("conv_tol must be nonnegative")

    @property
    def n_steps(self) -> int:
        n = int(round(abs(self.t_end) / self.dt))
        if n > 200_000_000:
            raise ValueError("t_end / dt requests an unreasonable number of steps")
        return n

    @property
    def dt_signed(self) -> float:
        return -self.dt if self.t_end < 0.0 else self.dt


@dataclass
class Trajectory:
    """Recorded samples of one lifted run at a frozen base point.

    Samples are strictly ordered in |t| and always include the initial and
    final states.  converged_to holds (y*, z*) when the convergence
    criterion fired, else None; convergence_residual is the field norm at
    the final state either way.
    """

    x: np.ndarray
    t: np.ndarray
    y: np.ndarray
    z: np.ndarray
    w: np.ndarray
    div_base: np.ndarray
    steps: int
    converged_to: Optional[tuple]
    convergence_residual: float
    kind: str
    dt: float


class RelaxationGenerator:
    """Fiber generator w(z; x) with partials, one of three kinds."""

    def __init__(self, kind, potential=None, pot_low=None, pot_high=None,
                 domain=None, w_fn=None, dwdz_fn=None, dwdx_fn=None, label=""):
        self.kind = kind
        self.potential = potential
        self.pot_low = pot_low
        self.pot_high = pot_high
        self._domain = domain
        self._w = w_fn
        self._dwdz = dwdz_fn
        self._dwdx = dwdx_fn
        self.label = label or kind

    # -- constructors --------------------------------------------------

    @classmethod
    def single(cls, potential: Potential) -> "RelaxationGenerator":
        """w(z; x) = F(x) - z."""
        return cls("single", potential=potential, label=f"single({potential.label})")

    @classmethod
    def two(cls, pot_low: Potential, pot_high: Potential) -> "RelaxationGenerator":
        """w(z; x) = -(z - F_I(x)) (z - F_II(x))^2 on the region F_II > F_I.

        pot_low is F_I (the stable level), pot_high is F_II (the
        semi-stable level).  Points with F_II(x) <= F_I(x) are rejected.
        """
        if pot_low.dim != pot_high.dim:
            raise ValueError("the two potentials must share a base dimension")
        return cls(
            "two",
            pot_low=pot_low,
            pot_high=pot_high,
            label=f"two({pot_low.label}, {pot_high.label})",
        )

    @classmethod
    def custom(
        cls,
        domain: Domain,
        w: Callable,
        dw_dz: Callable,
        dw_dx: Callable,
        label: str = "custom",
    ) -> "RelaxationGenerator":
        """Arbitrary generator from explicit w(z, x) and its partials."""
        return cls("custom", domain=domain, w_fn=w, dwdz_fn=dw_dz, dwdx_fn=dw_dx, label=label)

    # -- basic queries ---------------------------------------------------

    @property
    def dim(self) -> int:
        if self.kind == "single":
            return self.potential.dim
        if self.kind == "two":
            return self.pot_low.dim
        return self._domain.dim

    def check_x(self, x) -> np.ndarray:
        """Domain check for the frozen base point, including the two-level region."""
        if self.kind == "single":
            return self.potential.domain.check(x)
        if self.kind == "two":
            x = self.pot_low.domain.check(x)
            self.pot_high.domain.check(x)
            if not (self.pot_high(x) > self.pot_low(x)):
                raise DomainError(
                    f"base point {x.tolist()} violates F_II > F_I; the two-level "
                    "generator is only defined where the upper level is higher"
                )
            return x
        return self._domain.check(x)

    def w_eval(self, z: float, x) -> float:
        """Generator value at fiber height z over base point x."""
        x = self.check_x(x)
        z = float(z)
        if self.kind == "single":
            return self.potential(x) - z
        if self.kind == "two":
            s = z - self.pot_low(x)
            r = z - self.pot_high(x)
            return -(s * (r * r))
        return float(self._w(z, x))

    def w_partials(self, z: float, x) -> tuple:
        """(dw/dz, dw/dx) at (z; x)."""
        x = self.check_x(x)
        z = float(z)
        if self.kind == "single":
            return -1.0, self.potential.grad(x)
        if self.kind == "two":
            s = z - self.pot_low(x)
            r = z - self.pot_high(x)
            rr = r * r
            sr2 = 2.0 * (s * r)
            wz = -rr - sr2
            wx = rr * self.pot_low.grad(x) + sr2 * self.pot_high.grad(x)
            return wz, wx
        wz = float(self._dwdz(z, x))
        wx = np.asarray(self._dwdx(z, x), dtype=float).reshape(self.dim)
        return wz, wx

    def w_div_arrays(self, zs: np.ndarray, x: np.ndarray) -> tuple:
        """Vectorized (w, dw/dz) along a sample array of fiber heights."""
        if self.kind == "single":
            c1 = self.potential(x)
            return c1 - zs, np.full_like(zs, -1.0)
        if self.kind == "two":
            s = zs - self.pot_low(x)
            r = zs - self.pot_high(x)
            rr = r * r
            sr2 = 2.0 * (s * r)
            return -(s * rr), -rr - sr2
        w = np.array([float(self._w(float(z), x)) for z in zs])
        dv = np.array([float(self._dwdz(float(z), x)) for z in zs])
        return w, dv

    def field_at(self, x) -> Callable:
        """Lifted RHS closure with the base-point constants baked in.

        The returned field(y, z) -> (dy, dz) reproduces the kernel
        arithmetic exactly for the canonical kinds.
        """
        x = self.check_x(x)
        if self.kind == "single":
            c1 = self.potential(x)
            g = self.potential.grad(x)

            def field(y, z):
                return g - y, c1 - z

            return field
        if self.kind == "two":
            a = self.pot_low(x)
            b = self.pot_high(x)
            ga = self.pot_low.grad(x)
            gb = self.pot_high.grad(x)

            def field(y, z):
                s = z - a
                r = z - b
                rr = r * r
                sr2 = 2.0 * (s * r)
                wz = -rr - sr2
                return y * wz + (rr * ga + sr2 * gb), -(s * rr)

            return field

        w_fn, dwdz_fn, dwdx_fn, n = self._w, self._dwdz, self._dwdx, self.dim

        def field(y, z):
            wz = float(dwdz_fn(z, x))
            wx = np.asarray(dwdx_fn(z, x), dtype=float).reshape(n)
            return y * wz + wx, float(w_fn(z, x))

        return field


def lifted_field(gen: RelaxationGenerator, state: LiftedState) -> tuple:
    """(dy/dt, dz/dt) of the lift at one state."""
    x = gen.check_x(state.x)
    y = np.asarray(state.y, dtype=float).reshape(gen.dim)
    field = gen.field_at(x)
    return field(y, float(state.z))


def _integrate_generic(field, y0, z0, dt, n_steps, record_every, conv_tol):
    """Pure-Python RK4 with the kernel's stage order and record semantics.

    Used for custom generators and wherever two fields must run through
    the literally identical integrator.
    """
    y = np.asarray(y0, dtype=float).copy()
    z = float(z0)
    n = y.shape[0]
    half = 0.5 * dt
    sixth = dt / 6.0

    cap = n_steps // record_every + 2
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    zs = np.empty(cap)
    m = 0
    ts[m] = 0.0
    ys[m] = y
    zs[m] = z
    m += 1
    last_rec = 0

    steps = 0
    converged = False
    ok = True
    resid = 0.0
    while True:
        ky1, kz1 = field(y, z)
        resid = math.sqrt(float(np.dot(ky1, ky1)) + kz1 * kz1)
        snorm = math.sqrt(float(np.dot(y, y)) + z * z)
        if conv_tol > 0.0 and resid <= conv_tol * (1.0 + snorm):
            converged = True
            break
        if steps == n_steps:
            break

        ky2, kz2 = field(y + half * ky1, z + half * kz1)
        ky3, kz3 = field(y + half * ky2, z + half * kz2)
        ky4, kz4 = field(y + dt * ky3, z + dt * kz3)
        y = y + sixth * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4)
        z = z + sixth * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4)
        steps += 1

        if not (math.isfinite(z) and np.all(np.isfinite(y))):
            ok = False
            break

        if steps % record_every == 0 or steps == n_steps:
            ts[m] = steps * dt
            ys[m] = y
            zs[m] = z
            m += 1
            last_rec = steps

    if ok and last_rec != steps:
        ts[m] = steps * dt
        ys[m] = y
        zs[m] = z
        m += 1

    return ts[:m].copy(), ys[:m].copy(), zs[:m].copy(), steps, converged, resid, ok


def integrate(gen: RelaxationGenerator, state: LiftedState, cfg: IntegratorConfig) -> Trajectory:
    """Run the lifted dynamics from state for cfg.t_end at fixed step cfg.dt.

    The base point is frozen along the run.  Canonical kinds dispatch to
    the selected kernel backend; custom kinds use the generic driver.
    Raises IntegrationError when the state goes non-finite.
    """
    x = gen.check_x(state.x)
    y0 = np.asarray(state.y, dtype=float).reshape(gen.dim)
    z0 = float(state.z)
    n_steps = cfg.n_steps
    dt = cfg.dt_signed

    if gen.kind == "single":
        c1 = gen.potential(x)
        g1 = gen.potential.grad(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_SINGLE, c1, 0.0, g1, np.zeros_like(g1), y0, z0,
            dt, n_steps, cfg.record_every, cfg.conv_tol,
        )
    elif gen.kind == "two":
        a = gen.pot_low(x)
        b = gen.pot_high(x)
        ga = gen.pot_low.grad(x)
        gb = gen.pot_high.grad(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_TWO, a, b, ga, gb, y0, z0,
            dt, n_steps, cfg.record_every, cfg.conv_tol,
        )
    else:
        out = _integrate_generic(
            gen.field_at(x), y0, z0, dt, n_steps, cfg.record_every, cfg.conv_tol
        )

    ts, ys, zs, steps, converged, resid, ok = out
    if not ok:
        raise IntegrationError(
            f"state went non-finite after {steps} steps (dt={dt:g}); "
            "the generator grows too fast for this step size"
        )
    if state.t != 0.0:
        ts = ts + state.t
    w, div = gen.w_div_arrays(zs, x)
    converged_to = (ys[-1].copy(), float(zs[-1])) if converged else None
    return Trajectory(
        x=x.copy(), t=ts, y=ys, z=zs, w=w, div_base=div, steps=steps,
        converged_to=converged_to, convergence_residual=float(resid),
        kind=gen.kind, dt=dt,
    )


def closed_form_single(potential: Potential, x, z0: float, t):
    """Exact fiber solution of the single-level family.

    z(t) = (1 - e^{-t}) F(x) + e^{-t} z(0), valid for all real t.
    """
    x = potential.domain.check(x)
    fx = potential(x)
    t_arr = np.asarray(t, dtype=float)
    em = np.exp(-t_arr)
    out = (1.0 - em) * fx + em * float(z0)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


@dataclass(frozen=True)
class FixedPoint:
    """Fiber equilibrium of the lifted field over one base point.

    y is None at non-hyperbolic roots, where the linear fixed-point
    equation for the conjugates is degenerate.
    """

    z: float
    y: Optional[np.ndarray]
    dw_dz: float
    stability: str


def fixed_points(gen: RelaxationGenerator, x, z_bracket=None, n_grid: int = 2001,
                 atol: float = 1e-12) -> list:
    """All fiber equilibria over x with conjugate values and stability.

    Canonical kinds use their analytic roots; custom kinds scan
    z_bracket = (z_lo, z_hi) for sign changes and refine by bisection.
    y* solves y* dw/dz + dw/dx = 0 when dw/dz is nonzero.
    """
    x = gen.check_x(x)
    if gen.kind == "single":
        roots = [gen.potential(x)]
    elif gen.kind == "two":
        roots = [gen.pot_low(x), gen.pot_high(x)]
    else:
        if z_bracket is None:
            raise ValueError("custom generators need an explicit z_bracket")
        z_lo, z_hi = float(z_bracket[0]), float(z_bracket[1])
        if not z_lo < z_hi:
            raise ValueError("z_bracket must be an increasing pair")
        zs = np.linspace(z_lo, z_hi, n_grid)
        vals = np.array([gen.w_eval(z, x) for z in zs])
        roots = []
        for i in range(n_grid - 1):
            if vals[i] == 0.0:
                roots.append(float(zs[i]))
            elif vals[i] * vals[i + 1] < 0.0:
                roots.append(float(brentq(lambda z: gen.w_eval(z, x), zs[i], zs[i + 1],
                                          xtol=1e-13)))
        if vals[-1] == 0.0:
            roots.append(float(zs[-1]))
        merged = []
        for r in sorted(roots):
            if not merged or abs(r - merged[-1]) > 1e-10 * max(1.0, abs(r)):
                merged.append(r)
        roots = merged

    out = []
    for z_star in roots:
        wz, wx = gen.w_partials(z_star, x)
        if abs(wz) <= atol:
            out.append(FixedPoint(z_star, None, wz, "non-hyperbolic, semi-stable"))
        else:
            y_star = -(wx / wz)
            stability = "stable" if wz < 0.0 else "unstable"
            out.append(FixedPoint(z_star, y_star, wz, stability))
    return out


@dataclass(frozen=True)
class CompressibilityReport:
    """Base and lifted divergence at one (z; x); the lift scales by dim + 1."""

    div_base: float
    div_lifted: float
    contracting: bool


def compressibility(gen: RelaxationGenerator, x, z: float) -> CompressibilityReport:
    """Divergence of the base field and of its lift at (z; x).

    The lifted divergence is (n + 1) dw/dz: each of the n conjugate
    equations contributes dw/dz and the fiber equation contributes it once
    more, so sign and zeros are preserved exactly.
    """
    x = gen.check_x(x)
    wz, _ = gen.w_partials(z, x)
    div_lifted = (gen.dim + 1) * wz
    return CompressibilityReport(wz, div_lifted, div_lifted < 0.0)


def _sign_of(v: float, atol: float) -> int:
    if abs(v) <= atol:
        return 0
    return 1 if v > 0.0 else -1


@dataclass(frozen=True)
class SignTableRow:
    z: float
    w: float
    div_base: float
    sign_w: int
    sign_div: int


@dataclass(frozen=True)
class SignTable:
    """Signs of w and dw/dz across a list of fiber heights over one base point."""

    x: np.ndarray
    rows: tuple

    @property
    def w_pattern(self) -> tuple:
        return tuple(r.sign_w for r in self.rows)

    @property
    def div_pattern(self) -> tuple:
        return tuple(r.sign_div for r in self.rows)


def sign_table(gen: RelaxationGenerator, x, z_samples, atol: float = 1e-12) -> SignTable:
    """Evaluate (w, dw/dz) and their signs at each requested fiber height."""
    x = gen.check_x(x)
    rows = []
    for z in np.asarray(z_samples, dtype=float):
        z = float(z)
        w = gen.w_eval(z, x)
        wz, _ = gen.w_partials(z, x)
        rows.append(SignTableRow(z, w, wz, _sign_of(w, atol), _sign_of(wz, atol)))
    return SignTable(x.copy(), tuple(rows))


@dataclass(frozen=True)
class LyapunovReport:
    """Largest same-region increment of the two-level Lyapunov functions."""

    max_increment: float
    pairs_checked: int


def lyapunov_check(gen: RelaxationGenerator, traj: Trajectory, x=None) -> LyapunovReport:
    """Monotonicity audit of V_I = (z - F_I)^2 / 2 below F_II and V_II = z - F_II above.

    Increments are taken between consecutive samples in forward-time order
    whenever both endpoints lie in the same region.  A positive return
    beyond integrator roundoff falsifies the descent property.
    """
    if gen.kind != "two":
        raise ValueError("lyapunov_check applies to two-level generators")
    x = gen.check_x(traj.x if x is None else x)
    a = gen.pot_low(x)
    b = gen.pot_high(x)
    order = np.argsort(traj.t)
    zs = np.asarray(traj.z)[order]
    max_inc = 0.0
    pairs = 0
    for k in range(len(zs) - 1):
        z1, z2 = zs[k], zs[k + 1]
        if z1 < b and z2 < b:
            v1 = 0.5 * (z1 - a) ** 2
            v2 = 0.5 * (z2 - a) ** 2
        elif z1 >= b and z2 >= b:
            v1 = z1 - b
            v2 = z2 - b
        else:
            continue
        pairs += 1
        inc = v2 - v1
        if inc > max_inc:
            max_inc = inc
    return LyapunovReport(float(max_inc), pairs)


@dataclass(frozen=True)
class InducedConjugates:
    """FD conjugates of the induced fiber family against the lifted ODE."""

    y_fd: np.ndarray
    y_ode: np.ndarray
    residual: float


def _integrate_base(gen: RelaxationGenerator, x: np.ndarray, z0: float,
                    dt: float, n_steps: int) -> float:
    """Fiber-only run (no conjugates), returning the final z."""
    empty = np.zeros(0)
    if gen.kind == "single":
        c1 = gen.potential(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_SINGLE, c1, 0.0, empty, empty, empty, z0,
            dt, n_steps, max(n_steps, 1), 0.0,
        )
    elif gen.kind == "two":
        a = gen.pot_low(x)
        b = gen.pot_high(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_TWO, a, b, empty, empty, empty, z0,
            dt, n_steps, max(n_steps, 1), 0.0,
        )
    else:
        w_fn = gen._w

        def field(y, z):
            return y, float(w_fn(z, x))

        out = _integrate_generic(field, empty, z0, dt, n_steps, max(n_steps, 1), 0.0)
    ts, ys, zs, steps, converged, resid, ok = out
    if not ok:
        raise IntegrationError("fiber run went non-finite during the stencil sweep")
    return float(zs[-1])


def induced_conjugates(gen: RelaxationGenerator, x, t: float, fd_step: float = 1e-5,
                       z0_family=0.0, dt: float = 1e-3) -> InducedConjugates:
    """Check that the lift really is the x-derivative of the induced family.

    The induced family z(t; x') integrates the fiber equation from the
    initial family z(0; x'), here a constant or a callable of the base
    point.  Its x-derivative at x, estimated by central differences with
    one fiber run per stencil point, must match the lifted y(t) started
    from y(0) = d z(0; .) / dx.  The returned residual is the max-norm
    mismatch; it measures the commutation of differentiation and flow.
    """
    x = gen.check_x(x)
    n = gen.dim
    if callable(z0_family):
        z0_of = lambda pt: float(z0_family(pt))
    else:
        z0_val = float(z0_family)
        z0_of = lambda pt: z0_val

    if abs(t) < dt / 2.0:
        n_steps = 0
    else:
        n_steps = int(round(abs(t) / dt))
    dt_signed = -dt if t < 0.0 else dt

    # initial conjugates: x-derivative of the initial family
    y0 = np.zeros(n)
    if callable(z0_family):
        for a in range(n):
            h = fd_step * max(1.0, abs(x[a]))
            e = np.zeros(n)
            e[a] = h
            y0[a] = (z0_of(x + e) - z0_of(x - e)) / (2.0 * h)

    # lifted run
    if gen.kind == "single":
        c1 = gen.potential(x)
        g1 = gen.potential.grad(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_SINGLE, c1, 0.0, g1, np.zeros_like(g1), y0, z0_of(x),
            dt_signed, n_steps, max(n_steps, 1), 0.0,
        )
    elif gen.kind == "two":
        a_val = gen.pot_low(x)
        b_val = gen.pot_high(x)
        out = _kernel.integrate_canonical(
            _kernel.KIND_TWO, a_val, b_val, gen.pot_low.grad(x), gen.pot_high.grad(x),
            y0, z0_of(x), dt_signed, n_steps, max(n_steps, 1), 0.0,
        )
    else:
        out = _integrate_generic(
            gen.field_at(x), y0, z0_of(x), dt_signed, n_steps, max(n_steps, 1), 0.0
        )
    _, ys, _, _, _, _, ok = out
    if not ok:
        raise IntegrationError("lifted run went non-finite")
    y_ode = ys[-1].copy()

    # FD of the induced family, one pair of fiber runs per coordinate
    y_fd = np.zeros(n)
    for a in range(n):
        h = fd_step * max(1.0, abs(x[a]))
        e = np.zeros(n)
        e[a] = h
        for _ in range(21):
            try:
                gen.check_x(x + e)
                gen.check_x(x - e)
                break
            except DomainError:
                e *= 0.5
        else:
            raise StencilError("conjugate stencil escapes the admissible region")
        h_eff = e[a]
        z_plus = _integrate_base(gen, x + e, z0_of(x + e), dt_signed, n_steps)
        z_minus = _integrate_base(gen, x - e, z0_of(x - e), dt_signed, n_steps)
        y_fd[a] = (z_plus - z_minus) / (2.0 * h_eff)

    residual = float(np.max(np.abs(y_fd - y_ode))) if n else 0.0
    return InducedConjugates(y_fd, y_ode, residual)


def product_pair_variant(pot_low: Potential, pot_high: Potential) -> RelaxationGenerator:
    """Custom preset w = (z - F_I)(z - F_II), the sign-flipped simple product.

    Kept as an exploratory variant: both roots are hyperbolic, so it loses
    the semi-stable structure of the canonical two-level family, and it is
    deliberately not part of the two-level guarantees.
    """
    if pot_low.dim != pot_high.dim:
        raise ValueError("the two potentials must share a base dimension")

    def w(z, x):
        return (z - pot_low(x)) * (z - pot_high(x))

    def dw_dz(z, x):
        return 2.0 * z - pot_low(x) - pot_high(x)

    def dw_dx(z, x):
        return -(z - pot_high(x)) * pot_low.grad(x) - (z - pot_low(x)) * pot_high.grad(x)

    return RelaxationGenerator.custom(
        pot_low.domain, w, dw_dz, dw_dx, label="product_pair_variant"
    )
