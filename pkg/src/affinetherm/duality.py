"""Legendre duality and divergences for immersed potentials.

The forward map sends x to its conjugate eta = grad F(x); the inverse is
computed by damped Newton iteration and is well defined wherever the
Hessian is definite (convex or concave potentials alike, the solver is
sign-agnostic).  The canonical divergence is the Bregman expression in
the potential; the geometric divergence pairs the conormal at the second
point against the ambient state difference.  The two must agree to
roundoff, and they are kept as separate code paths so that the agreement
stays a meaningful cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolveError
from .immersion import GraphImmersion
from .potentials import Potential

__all__ = [
    "NewtonConfig",
    "DualChart",
    "DivergenceReport",
    "geometric_divergence",
    "divergence_report",
]


@dataclass(frozen=True)
class NewtonConfig:
    """Damped Newton settings for inverting the gradient map.

    Convergence: ||grad F(x) - eta|| <= tol_grad * max(1, ||eta||).
    Each step is halved until the iterate stays inside the domain and the
    residual does not increase, at most max_halvings times.
    """

    max_iter: int = 100
    tol_grad: float = 1e-12
    max_halvings: int = 30


class DualChart:
    """Legendre transform data for one potential."""

    def __init__(self, potential: Potential, newton: NewtonConfig = NewtonConfig()):
        self.potential = potential
        self.newton = newton

    def forward(self, x) -> np.ndarray:
        """Conjugate coordinates eta = grad F(x)."""
        return self.potential.grad(x)

    def _definite_solve(self, H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        eigs = np.linalg.eigvalsh(H)
        if not (np.all(eigs > 0.0) or np.all(eigs < 0.0)):
            raise SolveError(
                "indefinite or singular Hessian encountered; the gradient map "
                "is not invertible here"
            )
        return np.linalg.solve(H, rhs)

    def inverse(self, eta, x0) -> np.ndarray:
        """Solve grad F(x) = eta by damped Newton from x0.

        Raises SolveError when the Hessian is indefinite at an iterate or
        when the iteration fails to converge.
        """
        p = self.potential
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        x = p.domain.check(x0).copy()
        cfg = self.newton
        tol = cfg.tol_grad * max(1.0, float(np.linalg.norm(eta)))
        r = p.grad(x) - eta
        rnorm = float(np.linalg.norm(r))
        for _ in range(cfg.max_iter):
            if rnorm <= tol:
                return x
            H = p.hess(x)
            step = self._definite_solve(H, -r)
            lam = 1.0
            for _ in range(cfg.max_halvings + 1):
                cand = x + lam * step
                if p.domain.contains(cand):
                    r_cand = p.grad(cand) - eta
                    rn_cand = float(np.linalg.norm(r_cand))
                    if rn_cand < rnorm:
                        x, r, rnorm = cand, r_cand, rn_cand
                        break
                lam *= 0.5
            else:
                raise SolveError(
                    f"Newton step could not make progress at x={x.tolist()} "
                    f"(residual {rnorm:.3e})"
                )
        if rnorm <= tol:
            return x
        raise SolveError(
            f"gradient inversion did not converge in {cfg.max_iter} iterations "
            f"(residual {rnorm:.3e}, tol {tol:.3e})"
        )

    def dual_potential(self, eta, x0) -> float:
        """phi(eta) = <x, eta> - F(x) at the preimage x of eta."""
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        x = self.inverse(eta, x0)
        return float(np.dot(x, eta)) - self.potential(x)

    def canonical_divergence(self, x1, x2) -> float:
        """Bregman form: F(x1) - F(x2) - <grad F(x2), x1 - x2>.

        The sign convention follows the potential: nonnegative for convex
        F, nonpositive for concave F.  The value is reported raw.
        """
        p = self.potential
        x1 = p.domain.check(x1)
        x2 = p.domain.check(x2)
        return p(x1) - p(x2) - float(np.dot(p.grad(x2), x1 - x2))

    def metric_duality_residual(self, x, fd_step: float = 1e-5) -> float:
        """max |Hess F(x) . Hess phi(eta(x)) - I| with Hess phi from FD.

        Hess phi columns are central differences of the inverse map around
        eta(x), each solve warm-started at x.
        """
        p = self.potential
        x = p.domain.check(x)
        eta = self.forward(x)
        n = p.dim
        B = np.empty((n, n))
        for b in range(n):
            d = fd_step * max(1.0, abs(eta[b]))
            ep = eta.copy()
            em = eta.copy()
            ep[b] += d
            em[b] -= d
            xp = self.inverse(ep, x)
            xm = self.inverse(em, x)
            B[:, b] = (xp - xm) / (2.0 * d)
        M = p.hess(x) @ B
        return float(np.max(np.abs(M - np.eye(n))))


@dataclass(frozen=True)
class DivergenceReport:
    """Both divergence routes for one ordered pair of base points."""

    x1: np.ndarray
    x2: np.ndarray
    d_canonical: float
    d_geometric: float

    @property
    def discrepancy(self) -> float:
        return abs(self.d_canonical - self.d_geometric)


def geometric_divergence(immersion: GraphImmersion, x1, x2) -> float:
    """Pair the conormal at x2 against the ambient difference of graph points.

    This is the pairing route: it never forms the Bregman expression, so
    agreement with canonical_divergence is a genuine numerical witness of
    the duality theorem rather than an identity of one code path.
    """
    p = immersion.potential
    x1 = p.domain.check(x1)
    x2 = p.domain.check(x2)
    v = immersion.conormal(x2)
    delta = immersion.immerse(x1) - immersion.immerse(x2)
    return v.pair(delta)


def divergence_report(chart: DualChart, immersion: GraphImmersion, x1, x2) -> DivergenceReport:
    if immersion.potential is not chart.potential:
        raise ValueError("chart and immersion must wrap the same potential")
    p = chart.potential
    x1 = p.domain.check(x1)
    x2 = p.domain.check(x2)
    return DivergenceReport(
        x1.copy(),
        x2.copy(),
        chart.canonical_divergence(x1, x2),
        geometric_divergence(immersion, x1, x2),
    )
