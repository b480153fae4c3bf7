"""Contact-Hamiltonian dynamics on the conormal bundle picture.

For Hamiltonians h(x, z) that do not depend on the conjugate variables,
the contact equations freeze the base point and reduce to

    dx/dt = 0,   dy_a/dt = y_a dh/dz + dh/dx_a,   dz/dt = h.

With h_F = F(x) - z this is exactly the lift of the single-level
relaxation generator, and with h = -(z - F_I)(z - F_II)^2 the lift of the
two-level one.  The comparison helper integrates a contact system and the
corresponding lift through the literally identical integrator so that the
reported gap measures only evaluation-order roundoff of the two
algebraically identical right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MismatchError
from .immersion import GraphImmersion
from .potentials import Domain, Potential
from .relaxation import IntegratorConfig, LiftedState, RelaxationGenerator, _integrate_generic

__all__ = [
    "ContactHamiltonian",
    "ContactState",
    "ComparisonReport",
    "contact_field",
    "legendrian_pullback_residual",
    "compare_with_lift",
]


@dataclass(frozen=True)
class ContactState:
    """Point of the contact space in graph coordinates (x, y, z)."""

    x: np.ndarray
    y: np.ndarray
    z: float


class ContactHamiltonian:
    """Hamiltonian h(x, z) independent of the conjugate variables."""

    def __init__(self, kind, potential=None, pot_low=None, pot_high=None,
                 domain=None, h_fn=None, dhdx_fn=None, dhdz_fn=None, label=""):
        self.kind = kind
        self.potential = potential
        self.pot_low = pot_low
        self.pot_high = pot_high
        self._domain = domain
        self._h = h_fn
        self._dhdx = dhdx_fn
        self._dhdz = dhdz_fn
        self.label = label or kind

    @classmethod
    def from_potential(cls, potential: Potential) -> "ContactHamiltonian":
        """h(x, z) = F(x) - z, whose flow relaxes onto the graph of F."""
        return cls("single", potential=potential, label=f"h[{potential.label}]")

    @classmethod
    def from_pair(cls, pot_low: Potential, pot_high: Potential) -> "ContactHamiltonian":
        """h(x, z) = -(z - F_I(x)) (z - F_II(x))^2."""
        if pot_low.dim != pot_high.dim:
            raise ValueError("the two potentials must share a base dimension")
        return cls("two", pot_low=pot_low, pot_high=pot_high,
                   label=f"h[{pot_low.label}, {pot_high.label}]")

    @classmethod
    def custom(cls, domain: Domain, h: Callable, dh_dx: Callable, dh_dz: Callable,
               label: str = "custom") -> "ContactHamiltonian":
        return cls("custom", domain=domain, h_fn=h, dhdx_fn=dh_dx, dhdz_fn=dh_dz,
                   label=label)

    @property
    def dim(self) -> int:
        if self.kind == "single":
            return self.potential.dim
        if self.kind == "two":
            return self.pot_low.dim
        return self._domain.dim

    def check_x(self, x) -> np.ndarray:
        if self.kind == "single":
            return self.potential.domain.check(x)
        if self.kind == "two":
            x = self.pot_low.domain.check(x)
            self.pot_high.domain.check(x)
            return x
        return self._domain.check(x)

    def h_eval(self, x, z: float) -> float:
        x = self.check_x(x)
        z = float(z)
        if self.kind == "single":
            return self.potential(x) - z
        if self.kind == "two":
            s = z - self.pot_low(x)
            r = z - self.pot_high(x)
            return -(s * r) * r
        return float(self._h(x, z))

    def h_partials(self, x, z: float) -> tuple:
        """(dh/dx, dh/dz) at (x, z).

        The two-level partials are arranged in the factored grouping
        -r (r + 2 s); this differs from the relaxation module's operand
        order on purpose, so that the equivalence with the lift is checked
        across two independently arranged evaluations.
        """
        x = self.check_x(x)
        z = float(z)
        if self.kind == "single":
            return self.potential.grad(x), -1.0
        if self.kind == "two":
            s = z - self.pot_low(x)
            r = z - self.pot_high(x)
            hz = -r * (r + 2.0 * s)
            hx = r * (r * self.pot_low.grad(x) + 2.0 * s * self.pot_high.grad(x))
            return hx, hz
        hx = np.asarray(self._dhdx(x, z), dtype=float).reshape(self.dim)
        return hx, float(self._dhdz(x, z))

    def field_at(self, x) -> Callable:
        """Contact RHS closure (y, z) -> (dy, dz) with x frozen."""
        x = self.check_x(x)
        if self.kind == "single":
            c = self.potential(x)
            g = self.potential.grad(x)

            def field(y, z):
                return g - y, c - z

            return field
        if self.kind == "two":
            a = self.pot_low(x)
            b = self.pot_high(x)
            ga = self.pot_low.grad(x)
            gb = self.pot_high.grad(x)

            def field(y, z):
                s = z - a
                r = z - b
                hz = -r * (r + 2.0 * s)
                hx = r * (r * ga + 2.0 * s * gb)
                return y * hz + hx, -(s * r) * r

            return field

        h_fn, dhdx_fn, dhdz_fn, n = self._h, self._dhdx, self._dhdz, self.dim

        def field(y, z):
            hz = float(dhdz_fn(x, z))
            hx = np.asarray(dhdx_fn(x, z), dtype=float).reshape(n)
            return y * hz + hx, float(h_fn(x, z))

        return field


def contact_field(ch: ContactHamiltonian, state: ContactState) -> tuple:
    """(dx/dt, dy/dt, dz/dt) of the contact equations; dx/dt vanishes."""
    x = ch.check_x(state.x)
    y = np.asarray(state.y, dtype=float).reshape(ch.dim)
    field = ch.field_at(x)
    dy, dz = field(y, float(state.z))
    return np.zeros(ch.dim), dy, dz


def legendrian_pullback_residual(immersion: GraphImmersion, x_path) -> float:
    """Discrete residual of the contact form along an on-graph path.

    Each segment contributes |dz - <ybar, dx>| / ||dx|| with z = F(x) and
    ybar the gradient at the segment midpoint.  For a smooth path sampled
    ever more finely the residual falls off with the square of the segment
    length; a large value flags data that do not lie on any Legendrian
    graph.
    """
    p = immersion.potential
    path = np.asarray(x_path, dtype=float)
    if path.ndim == 1:
        path = path.reshape(-1, 1)
    if path.ndim != 2 or path.shape[1] != p.dim:
        raise ValueError(f"path must be (m, {p.dim})")
    if path.shape[0] < 2:
        raise ValueError("path needs at least two points")
    worst = 0.0
    for k in range(path.shape[0] - 1):
        x1 = path[k]
        x2 = path[k + 1]
        dx = x2 - x1
        norm = float(np.linalg.norm(dx))
        if norm == 0.0:
            raise ValueError(f"degenerate path: repeated point at index {k}")
        mid = 0.5 * (x1 + x2)
        ybar = p.grad(mid)
        dz = p(x2) - p(x1)
        res = abs(dz - float(np.dot(ybar, dx))) / norm
        if res > worst:
            worst = res
    return worst


@dataclass(frozen=True)
class ComparisonReport:
    """Sup-norm gap between a contact run and the corresponding lifted run."""

    sup_norm_difference: float
    steps: int
    dt: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.sup_norm_difference <= self.tol


def _same_construction(ch: ContactHamiltonian, gen: RelaxationGenerator) -> bool:
    if ch.kind != gen.kind:
        return False
    if ch.kind == "single":
        return ch.potential is gen.potential
    if ch.kind == "two":
        return ch.pot_low is gen.pot_low and ch.pot_high is gen.pot_high
    return False


def compare_with_lift(ch: ContactHamiltonian, gen: RelaxationGenerator,
                      state: LiftedState, cfg: IntegratorConfig,
                      check_match: bool = True, tol: float = 1e-12) -> ComparisonReport:
    """Integrate contact and lifted systems side by side and report the gap.

    Both runs use the identical generic integrator with convergence
    stopping disabled, so the sampled states differ only by the
    evaluation-order roundoff of the two right-hand sides; the relative
    sup-norm over all samples is returned.  By default the two objects
    must be built from the very same potential objects; pass
    check_match=False to compare deliberately mismatched constructions,
    which is how a sensitivity control is run.
    """
    if check_match and not _same_construction(ch, gen):
        raise MismatchError(
            "contact Hamiltonian and generator were built from different data; "
            "pass check_match=False to compare anyway"
        )
    x = gen.check_x(state.x)
    ch.check_x(x)
    y0 = np.asarray(state.y, dtype=float).reshape(gen.dim)
    z0 = float(state.z)
    n_steps = cfg.n_steps
    dt = cfg.dt_signed

    lift_out = _integrate_generic(gen.field_at(x), y0, z0, dt, n_steps,
                                  cfg.record_every, 0.0)
    cont_out = _integrate_generic(ch.field_at(x), y0, z0, dt, n_steps,
                                  cfg.record_every, 0.0)
    _, ys_l, zs_l, steps, _, _, ok_l = lift_out
    _, ys_c, zs_c, _, _, _, ok_c = cont_out
    if not (ok_l and ok_c):
        raise MismatchError("one of the runs went non-finite; no comparison possible")

    sup = 0.0
    for k in range(zs_l.shape[0]):
        scale = max(1.0, float(np.max(np.abs(ys_l[k])) if ys_l.shape[1] else 0.0),
                    abs(zs_l[k]))
        dy = float(np.max(np.abs(ys_c[k] - ys_l[k]))) if ys_l.shape[1] else 0.0
        dz = abs(zs_c[k] - zs_l[k])
        sup = max(sup, max(dy, dz) / scale)
    return ComparisonReport(float(sup), int(steps), dt, tol)
