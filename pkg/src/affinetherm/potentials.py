"""Thermodynamic potentials on box domains with optional guards.

A potential is a smooth real function F on an open subset of R^n together
with optional analytic first and second derivatives.  When an analytic
derivative is absent, central finite differences on the values are used,
with steps scaled per coordinate and shrunk automatically near the domain
boundary.  Built-in models cover the ideal gas (Helmholtz and entropy
forms), the reduced van der Waals fluid, the kinetic Ising mean field and
quadratic forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, StencilError

__all__ = [
    "Domain",
    "DiffConfig",
    "Potential",
    "ModelParams",
    "DerivativeValidation",
    "make_builtin",
    "ideal_gas_helmholtz",
    "ideal_gas_entropy",
    "vdw_helmholtz",
    "ising_free_energy",
    "quadratic",
    "constant_potential",
    "BUILTIN_MODEL_IDS",
]


def _as_point(x, dim: int) -> np.ndarray:
    """Coerce x to a float vector of length dim."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise ValueError(f"expected a point of dimension {dim}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Domain:
    """Open box with an optional guard predicate for non-box constraints.

    lower/upper are per-coordinate open bounds; use -inf/+inf for
    unbounded coordinates.  The guard, when present, must accept the
    point as a 1-d array and return a boolean.
    """

    dim: int
    lower: tuple = ()
    upper: tuple = ()
    guard: Optional[Callable[[np.ndarray], bool]] = None

    def __post_init__(self):
        lo = tuple(self.lower) if self.lower else (-np.inf,) * self.dim
        hi = tuple(self.upper) if self.upper else (np.inf,) * self.dim
        if len(lo) != self.dim or len(hi) != self.dim:
            raise ValueError("domain bounds must match dim")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, x) -> bool:
        x = _as_point(x, self.dim)
        if not np.all(np.isfinite(x)):
            return False
        for xi, lo, hi in zip(x, self.lower, self.upper):
            if not (lo < xi < hi):
                return False
        if self.guard is not None and not bool(self.guard(x)):
            return False
        return True

    def check(self, x) -> np.ndarray:
        x = _as_point(x, self.dim)
        if not self.contains(x):
            raise DomainError(f"point {x.tolist()} outside admissible domain")
        return x


@dataclass(frozen=True)
class DiffConfig:
    """Finite-difference configuration.

    Central differences, second order.  The gradient step for coordinate i
    is max(step_rel * max(|x_i|, 1), step_abs); second derivatives use
    sqrt(step_rel) in place of step_rel so that value roundoff does not
    dominate the divided second difference.  Near a boundary the whole
    stencil is shrunk geometrically (factor 1/2, at most max_shrink times)
    but never below step_abs.
    """

    step_rel: float = 1e-6
    step_abs: float = 1e-8
    max_shrink: int = 20


DEFAULT_DIFF = DiffConfig()


class Potential:
    """Smooth potential F with optional analytic derivatives.

    Instances are immutable after construction; all evaluation goes
    through domain checks.  Sign conventions are the caller's: convex and
    concave potentials are both admissible, and convexity_hint is
    advisory metadata only, never enforced.
    """

    def __init__(
        self,
        domain: Domain,
        value: Callable[[np.ndarray], float],
        gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        label: str = "",
        convexity_hint: str = "unknown",
        diff: DiffConfig = DEFAULT_DIFF,
    ):
        if convexity_hint not in ("convex", "concave", "indefinite", "unknown"):
            raise ValueError(f"bad convexity_hint {convexity_hint!r}")
        self.domain = domain
        self._value = value
        self._gradient = gradient
        self._hessian = hessian
        self.label = label or "potential"
        self.convexity_hint = convexity_hint
        self.diff = diff

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def has_analytic_gradient(self) -> bool:
        return self._gradient is not None

    @property
    def has_analytic_hessian(self) -> bool:
        return self._hessian is not None

    def __repr__(self):
        return f"Potential({self.label!r}, dim={self.dim})"

    def __call__(self, x) -> float:
        x = self.domain.check(x)
        return float(self._value(x))

    def grad(self, x) -> np.ndarray:
        """Gradient at x, analytic when available, else central FD."""
        x = self.domain.check(x)
        if self._gradient is not None:
            g = np.asarray(self._gradient(x), dtype=float).reshape(self.dim)
            return g.copy()
        return self.fd_grad(x)

    def hess(self, x) -> np.ndarray:
        """Hessian at x, analytic when available, else symmetrized FD."""
        x = self.domain.check(x)
        if self._hessian is not None:
            h = np.asarray(self._hessian(x), dtype=float).reshape(self.dim, self.dim)
            return h.copy()
        return self.fd_hess(x)

    # -- finite differences ------------------------------------------------

    def fd_grad(self, x, cfg: Optional[DiffConfig] = None) -> np.ndarray:
        """Central-difference gradient from values only."""
        x = self.domain.check(x)
        cfg = cfg or self.diff
        h = np.maximum(cfg.step_rel * np.maximum(np.abs(x), 1.0), cfg.step_abs)

        def stencil(hv):
            pts = [x]
            for i in range(self.dim):
                e = np.zeros(self.dim)
                e[i] = hv[i]
                pts.append(x + e)
                pts.append(x - e)
            return pts

        h = self._shrink_for(stencil, h, cfg, "gradient")
        g = np.empty(self.dim)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h[i]
            g[i] = (self._value(x + e) - self._value(x - e)) / (2.0 * h[i])
        return g

    def fd_hess(self, x, cfg: Optional[DiffConfig] = None) -> np.ndarray:
        """Central second differences from values only, symmetrized."""
        x = self.domain.check(x)
        cfg = cfg or self.diff
        rel = np.sqrt(cfg.step_rel)
        h = np.maximum(rel * np.maximum(np.abs(x), 1.0), cfg.step_abs)

        def stencil(hv):
            pts = [x]
            for i in range(self.dim):
                ei = np.zeros(self.dim)
                ei[i] = hv[i]
                pts.extend([x + ei, x - ei])
                for j in range(i + 1, self.dim):
                    ej = np.zeros(self.dim)
                    ej[j] = hv[j]
                    pts.extend([x + ei + ej, x + ei - ej, x - ei + ej, x - ei - ej])
            return pts

        h = self._shrink_for(stencil, h, cfg, "hessian")
        n = self.dim
        H = np.empty((n, n))
        f0 = self._value(x)
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h[i]
            H[i, i] = (self._value(x + ei) - 2.0 * f0 + self._value(x - ei)) / (h[i] * h[i])
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h[j]
                H[i, j] = (
                    self._value(x + ei + ej)
                    - self._value(x + ei - ej)
                    - self._value(x - ei + ej)
                    + self._value(x - ei - ej)
                ) / (4.0 * h[i] * h[j])
                H[j, i] = H[i, j]
        return 0.5 * (H + H.T)

    def _shrink_for(self, stencil, h, cfg: DiffConfig, what: str):
        for _ in range(cfg.max_shrink + 1):
            if all(self.domain.contains(p) for p in stencil(h)):
                return h
            if np.any(h * 0.5 < cfg.step_abs):
                raise StencilError(
                    f"{what} stencil escapes the domain even at the minimum "
                    f"step {cfg.step_abs:g}"
                )
            h = h * 0.5
        raise StencilError(f"{what} stencil still infeasible after {cfg.max_shrink} shrinks")


@dataclass(frozen=True)
class DerivativeValidation:
    """Result of comparing analytic derivatives against finite differences."""

    grad_max_diff: float
    hess_max_diff: Optional[float]
    grad_worst_index: int
    hess_worst_index: Optional[tuple]
    tol: float
    passed: bool


def validate_derivatives(p: Potential, x, tol: float = 1e-6) -> DerivativeValidation:
    """Compare analytic gradient (and Hessian, when present) against FD.

    Differences are measured relative to max(1, scale of the analytic
    object).  Requires an analytic gradient.
    """
    if not p.has_analytic_gradient:
        raise ValueError("validate_derivatives requires an analytic gradient")
    x = p.domain.check(x)
    g = p.grad(x)
    gf = p.fd_grad(x)
    gscale = max(1.0, float(np.max(np.abs(g))))
    gdiff = np.abs(g - gf) / gscale
    gi = int(np.argmax(gdiff))
    gmax = float(gdiff[gi])

    hmax = None
    hidx = None
    if p.has_analytic_hessian:
        H = p.hess(x)
        Hf = p.fd_hess(x)
        hscale = max(1.0, float(np.max(np.abs(H))))
        hdiff = np.abs(H - Hf) / hscale
        hidx = tuple(int(v) for v in np.unravel_index(np.argmax(hdiff), hdiff.shape))
        hmax = float(hdiff[hidx])

    passed = gmax <= tol and (hmax is None or hmax <= tol)
    return DerivativeValidation(gmax, hmax, gi, hidx, tol, passed)


# -- built-in models --------------------------------------------------------

BUILTIN_MODEL_IDS = (
    "ideal_gas_helmholtz",
    "ideal_gas_entropy",
    "vdw_helmholtz",
    "ising_free_energy",
    "quadratic",
)


@dataclass(frozen=True)
class ModelParams:
    """Identifier plus parameter map for a built-in model."""

    model_id: str
    params: dict = field(default_factory=dict)


def _require_positive(params: dict, names, model_id: str):
    for name in names:
        if name not in params:
            raise ValueError(f"model {model_id!r} requires parameter {name!r}")
        v = params[name]
        if not np.isfinite(v) or v <= 0:
            raise ValueError(f"model {model_id!r}: parameter {name!r} must be positive, got {v!r}")


def ideal_gas_helmholtz(R: float = 1.0, T: float = 1.0) -> Potential:
    """F(x) = R T ln x on x > 0.  Concave; x is the molar volume."""
    _require_positive({"R": R, "T": T}, ("R", "T"), "ideal_gas_helmholtz")
    RT = R * T
    return Potential(
        Domain(1, (0.0,), (np.inf,)),
        value=lambda x: RT * np.log(x[0]),
        gradient=lambda x: np.array([RT / x[0]]),
        hessian=lambda x: np.array([[-RT / (x[0] * x[0])]]),
        label=f"ideal_gas_helmholtz(R={R:g},T={T:g})",
        convexity_hint="concave",
    )


def ideal_gas_entropy(R: float = 1.0, c: float = 1.5) -> Potential:
    """S(x1, x2) = R (c ln x1 + ln x2) on (0, inf)^2.

    x1 is internal energy, x2 volume; the conjugate variables are
    (c R / x1, R / x2), so x2 * grad_2 = R identically.
    """
    _require_positive({"R": R, "c": c}, ("R", "c"), "ideal_gas_entropy")
    cR = c * R
    return Potential(
        Domain(2, (0.0, 0.0), (np.inf, np.inf)),
        value=lambda x: R * (c * np.log(x[0]) + np.log(x[1])),
        gradient=lambda x: np.array([cR / x[0], R / x[1]]),
        hessian=lambda x: np.diag([-cR / (x[0] * x[0]), -R / (x[1] * x[1])]),
        label=f"ideal_gas_entropy(R={R:g},c={c:g})",
        convexity_hint="concave",
    )


def vdw_helmholtz(T: float = 1.0) -> Potential:
    """Reduced van der Waals potential F(x) = 3/x + (8T/3) ln(3x - 1).

    Defined for x > 0 with the guard 3x - 1 > 0.  The second derivative
    6/x^3 - 24T/(3x - 1)^2 changes sign below the critical temperature,
    so the induced fundamental form is degenerate on a nonempty locus for
    T <= 1 (touching, at T = 1, at x = 1).
    """
    _require_positive({"T": T}, ("T",), "vdw_helmholtz")
    coef = 8.0 * T / 3.0
    return Potential(
        Domain(1, (0.0,), (np.inf,), guard=lambda x: 3.0 * x[0] - 1.0 > 0.0),
        value=lambda x: 3.0 / x[0] + coef * np.log(3.0 * x[0] - 1.0),
        gradient=lambda x: np.array([-3.0 / (x[0] * x[0]) + 8.0 * T / (3.0 * x[0] - 1.0)]),
        hessian=lambda x: np.array(
            [[6.0 / x[0] ** 3 - 24.0 * T / (3.0 * x[0] - 1.0) ** 2]]
        ),
        label=f"vdw_helmholtz(T={T:g})",
        convexity_hint="indefinite",
    )


def ising_free_energy() -> Potential:
    """F(x) = ln cosh x + ln 2 on the whole line.

    Evaluated as |x| + log1p(exp(-2|x|)) to stay finite for large |x|.
    The gradient tanh x is the mean-field magnetization map.
    """

    def value(x):
        a = abs(x[0])
        return a + np.log1p(np.exp(-2.0 * a))

    def hessian(x):
        # sech(x)^2 without overflowing cosh for large |x|
        a = abs(x[0])
        sech = 2.0 * np.exp(-a) / (1.0 + np.exp(-2.0 * a))
        return np.array([[sech * sech]])

    return Potential(
        Domain(1),
        value=value,
        gradient=lambda x: np.array([np.tanh(x[0])]),
        hessian=hessian,
        label="ising_free_energy()",
        convexity_hint="convex",
    )


def quadratic(matrix, offset: float = 0.0) -> Potential:
    """F(x) = x^T A x / 2 + offset with A symmetric.

    The Hessian equals A everywhere.  A zero matrix with a nonzero offset
    yields a constant potential, which is how constant equilibrium levels
    are expressed.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"quadratic matrix must be square, got shape {A.shape}")
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12):
        raise ValueError("quadratic matrix must be symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    offset = float(offset)
    eigs = np.linalg.eigvalsh(A)
    if np.all(eigs > 0):
        hint = "convex"
    elif np.all(eigs < 0):
        hint = "concave"
    elif np.all(eigs == 0):
        hint = "unknown"
    else:
        hint = "indefinite"
    return Potential(
        Domain(n),
        value=lambda x: 0.5 * float(x @ A @ x) + offset,
        gradient=lambda x: A @ x,
        hessian=lambda x: A.copy(),
        label=f"quadratic(n={n})",
        convexity_hint=hint,
    )


def constant_potential(level: float, dim: int = 1) -> Potential:
    """Constant potential F(x) = level, a zero quadratic with an offset."""
    return quadratic(np.zeros((dim, dim)), offset=level)


def make_builtin(spec: ModelParams) -> Potential:
    """Construct a built-in model from an id and a parameter map.

    Unknown ids and missing or non-positive required parameters are
    rejected with a descriptive ValueError.
    """
    mid = spec.model_id
    params = dict(spec.params)
    if mid == "ideal_gas_helmholtz":
        return ideal_gas_helmholtz(R=params.pop("R", 1.0), T=params.pop("T", 1.0))
    if mid == "ideal_gas_entropy":
        return ideal_gas_entropy(R=params.pop("R", 1.0), c=params.pop("c", 1.5))
    if mid == "vdw_helmholtz":
        return vdw_helmholtz(T=params.pop("T", 1.0))
    if mid == "ising_free_energy":
        return ising_free_energy()
    if mid == "quadratic":
        offset = float(params.pop("offset", 0.0))
        if "matrix" in params:
            return quadratic(params.pop("matrix"), offset=offset)
        dim = int(params.pop("dim", 1))
        if dim < 1:
            raise ValueError("quadratic dim must be >= 1")
        scale = float(params.pop("scale", 1.0))
        return quadratic(scale * np.eye(dim), offset=offset)
    raise ValueError(f"unknown model_id {mid!r}; known ids: {', '.join(BUILTIN_MODEL_IDS)}")
