"""Graph immersion of a potential and its induced affine geometry.

The graph of F in R^(n+1) is immersed as x -> (x, F(x)) with the constant
transversal field along the last coordinate axis.  The induced fundamental
form is the Hessian of F, the shape operator and transversal connection
form vanish identically, and the conormal at x is (-grad F(x), 1).  The
pairing of the conormal against state differences is what turns this
geometry into divergences; that pairing lives in the duality module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .potentials import Potential

__all__ = [
    "EquilibriumPoint",
    "Conormal",
    "FundamentalForm",
    "GraphImmersion",
    "degeneracy_locus",
]

RANK_TOL = 1e-9


@dataclass(frozen=True)
class EquilibriumPoint:
    """On-graph state: base point x, height z = F(x), conjugates y = grad F(x)."""

    x: np.ndarray
    z: float
    y: np.ndarray


@dataclass(frozen=True)
class Conormal:
    """Conormal covector coefficients (-y_1, ..., -y_n, 1) in the ambient dual basis."""

    coeffs: np.ndarray

    def pair(self, vector) -> float:
        """Pair against an ambient vector given by its n+1 components."""
        v = np.asarray(vector, dtype=float)
        if v.shape != self.coeffs.shape:
            raise ValueError("vector dimension does not match the conormal")
        return float(np.dot(self.coeffs, v))


@dataclass(frozen=True)
class FundamentalForm:
    """Affine fundamental form at a point with its eigenvalue signature.

    signature counts (positive, negative, zero) eigenvalues; an eigenvalue
    counts as zero when |lambda| <= rank_tol * max(1, ||h||_2).
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    signature: tuple
    rank_tol: float

    @property
    def degenerate(self) -> bool:
        return self.signature[2] > 0

    @property
    def classification(self) -> str:
        return "degenerate" if self.degenerate else "nondegenerate"

    @property
    def det(self) -> float:
        return float(np.prod(self.eigenvalues))


class GraphImmersion:
    """Centro-affine graph immersion of a potential with constant transversal."""

    def __init__(self, potential: Potential):
        self.potential = potential

    @property
    def dim(self) -> int:
        return self.potential.dim

    def immerse(self, x) -> np.ndarray:
        """Ambient image (x, F(x)) of a base point."""
        x = self.potential.domain.check(x)
        return np.concatenate([x, [self.potential(x)]])

    def transversal(self) -> np.ndarray:
        """The constant transversal field: the last ambient basis vector."""
        xi = np.zeros(self.dim + 1)
        xi[-1] = 1.0
        return xi

    def pushforward_basis(self, x) -> np.ndarray:
        """Rows are the pushforwards of the coordinate frame: e_i + (dF/dx_i) e_z."""
        x = self.potential.domain.check(x)
        g = self.potential.grad(x)
        basis = np.hstack([np.eye(self.dim), g.reshape(-1, 1)])
        return basis

    def conormal(self, x) -> Conormal:
        """Conormal covector at x, normalized so it pairs to 1 with the transversal."""
        x = self.potential.domain.check(x)
        g = self.potential.grad(x)
        return Conormal(np.concatenate([-g, [1.0]]))

    def conormal_conditions(self, x) -> tuple:
        """Residuals of the defining pairings: (|<v,xi> - 1|, max_i |<v, f_* e_i>|)."""
        v = self.conormal(x)
        res_trans = abs(v.pair(self.transversal()) - 1.0)
        basis = self.pushforward_basis(x)
        res_tan = max(abs(v.pair(row)) for row in basis)
        return res_trans, res_tan

    def fundamental_form(self, x, rank_tol: float = RANK_TOL) -> FundamentalForm:
        """Hessian of the potential with signature and degeneracy classification."""
        x = self.potential.domain.check(x)
        H = self.potential.hess(x)
        H = 0.5 * (H + H.T)
        eigs = np.linalg.eigvalsh(H)
        scale = max(1.0, float(np.max(np.abs(eigs))) if eigs.size else 1.0)
        zero_cut = rank_tol * scale
        n_zero = int(np.sum(np.abs(eigs) <= zero_cut))
        n_plus = int(np.sum(eigs > zero_cut))
        n_minus = int(np.sum(eigs < -zero_cut))
        return FundamentalForm(H, eigs, (n_plus, n_minus, n_zero), rank_tol)

    def codazzi_residual(self, x, step_rel: float = 1e-5) -> float:
        """Maximum asymmetry of the finite-difference third-derivative tensor.

        The cubic form dF(X,Y,Z) must be totally symmetric; the residual is
        the largest deviation between the FD tensor and any of its index
        permutations.
        """
        x = self.potential.domain.check(x)
        n = self.dim
        T = np.empty((n, n, n))
        for k in range(n):
            h = step_rel * max(abs(x[k]), 1.0)
            e = np.zeros(n)
            e[k] = h
            for _ in range(21):
                if self.potential.domain.contains(x + e) and self.potential.domain.contains(x - e):
                    break
                e *= 0.5
            else:
                raise DomainError("third-derivative stencil escapes the domain")
            T[:, :, k] = (self.potential.hess(x + e) - self.potential.hess(x - e)) / (2.0 * e[k])
        worst = 0.0
        for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            worst = max(worst, float(np.max(np.abs(T - np.transpose(T, perm)))))
        return worst

    def equilibrium_point(self, x) -> EquilibriumPoint:
        x = self.potential.domain.check(x)
        return EquilibriumPoint(x.copy(), self.potential(x), self.potential.grad(x))


def _hess_scalar(p: Potential, x: float) -> float:
    return float(p.hess(np.array([x]))[0, 0])


def _fd_slope(p: Potential, x: float, delta: float) -> float:
    """Fourth-order central difference slope of the scalar Hessian."""
    f = lambda u: _hess_scalar(p, u)
    return (-f(x + 2.0 * delta) + 8.0 * f(x + delta) - 8.0 * f(x - delta) + f(x - 2.0 * delta)) / (
        12.0 * delta
    )


def _bracket_delta(p: Potential, a: float, b: float) -> float:
    """Slope step usable across [a, b]: shrink until the widest stencil stays in."""
    delta = 5e-4 * max(1.0, abs(a), abs(b))
    for _ in range(21):
        if p.domain.contains(np.array([a - 2.0 * delta])) and p.domain.contains(
            np.array([b + 2.0 * delta])
        ):
            return delta
        delta *= 0.5
    raise DomainError("slope stencil escapes the domain near the interval edge")


def degeneracy_locus(
    potential: Potential,
    lo: float,
    hi: float,
    n_grid: int = 4001,
    xtol: float = 1e-12,
    touch_rel: float = 1e-8,
) -> list:
    """All zeros of the scalar fundamental form on (lo, hi), one dimension only.

    Simple zeros are bracketed by a sign scan over a dense grid and refined
    by bisection.  Sign-preserving zeros (the form touches zero without
    crossing, as happens at a critical temperature) are located by
    bisecting the FD slope of the form between grid points where the slope
    changes sign, and accepted only when the form itself vanishes there to
    within touch_rel relative to its scale on the interval.
    """
    if potential.dim != 1:
        raise ValueError("degeneracy_locus requires a one-dimensional potential")
    if not (lo < hi):
        raise ValueError("need lo < hi")
    xs = np.linspace(lo, hi, n_grid)
    for end in (lo, hi):
        potential.domain.check(np.array([end]))
    hs = np.array([_hess_scalar(potential, u) for u in xs])
    scale = max(1.0, float(np.max(np.abs(hs))))

    roots = []

    # crossings
    for i in range(n_grid - 1):
        a, b = hs[i], hs[i + 1]
        if a == 0.0:
            roots.append(float(xs[i]))
        elif a * b < 0.0:
            r = brentq(lambda u: _hess_scalar(potential, u), xs[i], xs[i + 1], xtol=xtol)
            roots.append(float(r))
    if hs[-1] == 0.0:
        roots.append(float(xs[-1]))

    # sign-preserving touch points: bisect the slope where it crosses zero
    dgrid = np.diff(hs)
    for i in range(1, n_grid - 2):
        if dgrid[i - 1] * dgrid[i + 1] >= 0.0:
            continue
        # only chase extrema where the form is already close to zero
        if abs(hs[i]) > max(1e-3 * scale, 1e4 * touch_rel * scale):
            continue
        a, b = float(xs[i - 1]), float(xs[i + 2])
        delta = _bracket_delta(potential, a, b)
        sa = _fd_slope(potential, a, delta)
        sb = _fd_slope(potential, b, delta)
        if sa == 0.0:
            cand = a
        elif sa * sb > 0.0:
            continue
        else:
            cand = brentq(lambda u: _fd_slope(potential, u, delta), a, b, xtol=xtol)
        if abs(_hess_scalar(potential, cand)) <= touch_rel * scale:
            roots.append(float(cand))

    roots.sort()
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-8 * max(1.0, abs(r)):
            merged.append(r)
    return merged
