"""Command-line front end driven by scenario files.

Usage:
    affinetherm --scenario run.json [--out DIR] [--quiet]
    affinetherm --suite [--out DIR] [--dt-scale X] [--quiet]

A scenario is a JSON object with a "command" plus command-specific keys;
the schema is exported as SCENARIO_SCHEMA and documented in the README.
Artifacts are written to the output directory (flag --out, else the
scenario's "output_dir", else $AFFINETHERM_OUT, else ./affinetherm_out)
together with a run manifest listing every artifact with its sha256.
CSV artifacts render floats with 17 significant digits in a fixed column
order, so identical scenarios and seeds reproduce byte-identical files.

Exit codes: 0 success, 2 scenario validation failure, 3 domain violation,
4 numeric failure (non-convergence, non-finite state, failed suite).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import jsonschema

from . import __version__
from ._kernel import BACKEND as KERNEL_BACKEND
from .contact import ContactHamiltonian, compare_with_lift
from .duality import DualChart, divergence_report
from .errors import (
    DomainError,
    IntegrationError,
    MismatchError,
    ScenarioError,
    SolveError,
    StencilError,
)
from .immersion import GraphImmersion, degeneracy_locus
from .potentials import ModelParams, make_builtin
from .relaxation import (
    IntegratorConfig,
    LiftedState,
    RelaxationGenerator,
    integrate,
    sign_table,
)

_MODEL_SCHEMA = {
    "type": "object",
    "required": ["model_id"],
    "properties": {
        "model_id": {"type": "string"},
        "params": {"type": "object"},
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "properties": {
        "command": {
            "enum": [
                "geometry",
                "legendre",
                "divergence",
                "relax",
                "contact-compare",
                "sign-table",
                "sweep",
            ]
        },
        "model": _MODEL_SCHEMA,
        "model2": _MODEL_SCHEMA,
        "kind": {"enum": ["single", "two"]},
        "points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "grid": {
            "type": "object",
            "required": ["lower", "upper", "shape"],
            "properties": {
                "lower": {"type": "array", "items": {"type": "number"}},
                "upper": {"type": "array", "items": {"type": "number"}},
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
        },
        "eta": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "x0": {"type": "array", "items": {"type": "number"}},
        "pairs": {"type": "object"},
        "x": {"type": "array", "items": {"type": "number"}},
        "y0": {"type": "array", "items": {"type": "number"}},
        "z0": {"type": "number"},
        "z_samples": {"type": "array", "items": {"type": "number"}},
        "integrator": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number"},
                "record_every": {"type": "integer", "minimum": 1},
                "conv_tol": {"type": "number", "minimum": 0},
            },
        },
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "base": {"type": "object"},
        "overrides": {"type": "array", "items": {"type": "object"}},
        "parallel": {"type": "boolean"},
    },
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _validate(scenario: dict):
    try:
        jsonschema.validate(scenario, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"scenario failed schema validation: {exc.message}") from exc


def _model_from(scenario: dict, key: str):
    if key not in scenario:
        raise ScenarioError(f"scenario requires a {key!r} entry for this command")
    obj = scenario[key]
    try:
        return make_builtin(ModelParams(obj["model_id"], obj.get("params", {})))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def _generator_from(scenario: dict) -> RelaxationGenerator:
    kind = scenario.get("kind", "single")
    if kind == "single":
        return RelaxationGenerator.single(_model_from(scenario, "model"))
    return RelaxationGenerator.two(
        _model_from(scenario, "model"), _model_from(scenario, "model2")
    )


def _hamiltonian_from(scenario: dict, gen: RelaxationGenerator) -> ContactHamiltonian:
    if gen.kind == "single":
        return ContactHamiltonian.from_potential(gen.potential)
    return ContactHamiltonian.from_pair(gen.pot_low, gen.pot_high)


def _integrator_from(scenario: dict, dt_scale: float = 1.0) -> IntegratorConfig:
    cfg = dict(scenario.get("integrator", {}))
    dt = float(cfg.get("dt", 1e-3)) * dt_scale
    return IntegratorConfig(
        dt=dt,
        t_end=float(cfg.get("t_end", 10.0)),
        record_every=int(cfg.get("record_every", 1)),
        conv_tol=float(cfg.get("conv_tol", 1e-12)),
    )


def _points_from(scenario: dict, dim: int) -> np.ndarray:
    if "points" in scenario:
        pts = np.asarray(scenario["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise ScenarioError(f"points must be rows of dimension {dim}")
        return pts
    if "grid" in scenario:
        g = scenario["grid"]
        lower, upper, shape = g["lower"], g["upper"], g["shape"]
        if not (len(lower) == len(upper) == len(shape) == dim):
            raise ScenarioError(f"grid must describe {dim} axes")
        axes = [np.linspace(lo, hi, n) for lo, hi, n in zip(lower, upper, shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)
    raise ScenarioError("scenario needs either 'points' or 'grid'")


def _xcols(prefix: str, n: int):
    return [f"{prefix}{i + 1}" for i in range(n)]


# -- commands ----------------------------------------------------------------


def _cmd_geometry(scenario: dict, out: Path):
    p = _model_from(scenario, "model")
    imm = GraphImmersion(p)
    pts = _points_from(scenario, p.dim)
    records = []
    rows = []
    for x in pts:
        eq = imm.equilibrium_point(x)
        ff = imm.fundamental_form(x)
        res_t, res_tan = imm.conormal_conditions(x)
        records.append(
            {
                "x": eq.x.tolist(),
                "z": eq.z,
                "y": eq.y.tolist(),
                "h_matrix": ff.matrix.tolist(),
                "signature": list(ff.signature),
                "classification": ff.classification,
                "conormal": imm.conormal(x).coeffs.tolist(),
                "residuals": {"transversal": res_t, "tangency": res_tan},
            }
        )
        rows.append(
            list(x)
            + list(ff.eigenvalues)
            + list(ff.signature)
            + [ff.det, 1 if ff.degenerate else 0]
        )
    _write_json(out / "geometry_report.json", {"model": scenario["model"], "records": records})
    header = (
        _xcols("x", p.dim)
        + _xcols("eig", p.dim)
        + ["n_plus", "n_minus", "n_zero", "det", "degenerate"]
    )
    _write_csv(out / "fundamental_form.csv", header, rows)
    return ["geometry_report.json", "fundamental_form.csv"]


def _cmd_legendre(scenario: dict, out: Path):
    p = _model_from(scenario, "model")
    chart = DualChart(p)
    if "eta" not in scenario or "x0" not in scenario:
        raise ScenarioError("legendre scenarios need 'eta' rows and an 'x0' start")
    etas = np.asarray(scenario["eta"], dtype=float)
    if etas.ndim != 2 or etas.shape[1] != p.dim:
        raise ScenarioError(f"eta must be rows of dimension {p.dim}")
    x0 = np.asarray(scenario["x0"], dtype=float)
    rows = []
    for eta in etas:
        x = chart.inverse(eta, x0)
        phi = float(np.dot(x, eta)) - p(x)
        resid = float(np.linalg.norm(p.grad(x) - eta))
        rows.append(list(eta) + list(x) + [phi, resid])
    header = _xcols("eta", p.dim) + _xcols("x", p.dim) + ["phi", "grad_residual"]
    _write_csv(out / "legendre.csv", header, rows)
    return ["legendre.csv"]


def _cmd_divergence(scenario: dict, out: Path):
    p = _model_from(scenario, "model")
    chart = DualChart(p)
    imm = GraphImmersion(p)
    spec = scenario.get("pairs")
    if not isinstance(spec, dict):
        raise ScenarioError("divergence scenarios need a 'pairs' object")
    if "explicit" in spec:
        pairs = [
            (np.asarray(a, dtype=float), np.asarray(b, dtype=float))
            for a, b in spec["explicit"]
        ]
    else:
        for key in ("count", "seed", "lower", "upper"):
            if key not in spec:
                raise ScenarioError(f"random pairs need {key!r}")
        rng = np.random.default_rng(int(spec["seed"]))
        lo = np.asarray(spec["lower"], dtype=float)
        hi = np.asarray(spec["upper"], dtype=float)
        if lo.shape != (p.dim,) or hi.shape != (p.dim,):
            raise ScenarioError(f"pair bounds must have dimension {p.dim}")
        count = int(spec["count"])
        pairs = [
            (lo + (hi - lo) * rng.random(p.dim), lo + (hi - lo) * rng.random(p.dim))
            for _ in range(count)
        ]
    rows = []
    worst = 0.0
    for x1, x2 in pairs:
        rep = divergence_report(chart, imm, x1, x2)
        worst = max(worst, rep.discrepancy)
        rows.append(
            list(rep.x1) + list(rep.x2) + [rep.d_canonical, rep.d_geometric, rep.discrepancy]
        )
    header = _xcols("x1_", p.dim) + _xcols("x2_", p.dim) + [
        "D_canonical",
        "D_geometric",
        "discrepancy",
    ]
    _write_csv(out / "divergence.csv", header, rows)
    _write_json(out / "divergence_summary.json", {"pairs": len(rows), "max_discrepancy": worst})
    return ["divergence.csv", "divergence_summary.json"]


def _state_from(scenario: dict, gen: RelaxationGenerator) -> LiftedState:
    for key in ("x", "y0"):
        if key not in scenario:
            raise ScenarioError(f"this command needs {key!r}")
    if "z0" not in scenario:
        raise ScenarioError("this command needs 'z0'")
    x = np.asarray(scenario["x"], dtype=float)
    y0 = np.asarray(scenario["y0"], dtype=float)
    if x.shape != (gen.dim,) or y0.shape != (gen.dim,):
        raise ScenarioError(f"x and y0 must have dimension {gen.dim}")
    return LiftedState(x, y0, float(scenario["z0"]))


def _cmd_relax(scenario: dict, out: Path, dt_scale: float = 1.0):
    gen = _generator_from(scenario)
    state = _state_from(scenario, gen)
    cfg = _integrator_from(scenario, dt_scale)
    traj = integrate(gen, state, cfg)
    n = gen.dim
    rows = []
    for k in range(traj.t.shape[0]):
        rows.append(
            [traj.t[k]]
            + list(traj.x)
            + list(traj.y[k])
            + [traj.z[k], traj.w[k], traj.div_base[k]]
        )
    header = ["t"] + _xcols("x", n) + _xcols("y", n) + ["z", "w", "div_base"]
    _write_csv(out / "trajectory.csv", header, rows)
    conv = None
    if traj.converged_to is not None:
        conv = {"y": traj.converged_to[0].tolist(), "z": traj.converged_to[1]}
    _write_json(
        out / "convergence.json",
        {
            "converged_to": conv,
            "residual": traj.convergence_residual,
            "steps": traj.steps,
            "dt": traj.dt,
        },
    )
    return ["trajectory.csv", "convergence.json"]


def _cmd_contact_compare(scenario: dict, out: Path, dt_scale: float = 1.0):
    gen = _generator_from(scenario)
    ch = _hamiltonian_from(scenario, gen)
    state = _state_from(scenario, gen)
    cfg = _integrator_from(scenario, dt_scale)
    tol = float(scenario.get("tol", 1e-12))
    rep = compare_with_lift(ch, gen, state, cfg, tol=tol)
    _write_json(
        out / "contact_compare.json",
        {
            "sup_norm_difference": rep.sup_norm_difference,
            "steps": rep.steps,
            "dt": rep.dt,
            "tol": rep.tol,
            "pass": rep.passed,
        },
    )
    return ["contact_compare.json"]


def _cmd_sign_table(scenario: dict, out: Path):
    gen = _generator_from(scenario)
    if "x" not in scenario or "z_samples" not in scenario:
        raise ScenarioError("sign-table scenarios need 'x' and 'z_samples'")
    x = np.asarray(scenario["x"], dtype=float)
    table = sign_table(gen, x, scenario["z_samples"])
    rows = [[r.z, r.w, r.div_base, r.sign_w, r.sign_div] for r in table.rows]
    _write_csv(out / "sign_table.csv", ["z", "w", "div_base", "sign_w", "sign_div"], rows)
    return ["sign_table.csv"]


def _merged(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merged(out[k], v)
        else:
            out[k] = v
    return out


def _cmd_sweep(scenario: dict, out: Path, dt_scale: float = 1.0):
    base = scenario.get("base")
    overrides = scenario.get("overrides")
    if not isinstance(base, dict) or not isinstance(overrides, list) or not overrides:
        raise ScenarioError("sweep scenarios need a 'base' object and a nonempty 'overrides' list")
    if base.get("command") == "sweep":
        raise ScenarioError("sweeps cannot nest")
    items = []
    for i, ov in enumerate(overrides):
        scn = _merged(base, ov)
        _validate(scn)
        items.append((f"item_{i:03d}", scn))

    def run_item(arg):
        name, scn = arg
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        files = _dispatch(scn, sub, dt_scale)
        return name, [f"{name}/{f}" for f in files]

    artifacts = []
    if scenario.get("parallel", False):
        with ThreadPoolExecutor() as pool:
            results = list(pool.map(run_item, items))
    else:
        results = [run_item(it) for it in items]
    summary = {}
    for name, files in results:
        summary[name] = files
        artifacts.extend(files)
    _write_json(out / "sweep_summary.json", {"items": summary})
    artifacts.append("sweep_summary.json")
    return artifacts


def _dispatch(scenario: dict, out: Path, dt_scale: float = 1.0):
    cmd = scenario["command"]
    if cmd == "geometry":
        return _cmd_geometry(scenario, out)
    if cmd == "legendre":
        return _cmd_legendre(scenario, out)
    if cmd == "divergence":
        return _cmd_divergence(scenario, out)
    if cmd == "relax":
        return _cmd_relax(scenario, out, dt_scale)
    if cmd == "contact-compare":
        return _cmd_contact_compare(scenario, out, dt_scale)
    if cmd == "sign-table":
        return _cmd_sign_table(scenario, out)
    if cmd == "sweep":
        return _cmd_sweep(scenario, out, dt_scale)
    raise ScenarioError(f"unknown command {cmd!r}")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: Path, scenario: dict, artifacts, wall: float):
    entries = []
    for rel in sorted(artifacts):
        path = out / rel
        entries.append({"path": rel, "sha256": _sha256(path), "bytes": path.stat().st_size})
    _write_json(
        out / "run_manifest.json",
        {
            "command": scenario.get("command"),
            "scenario": scenario,
            "artifacts": entries,
            "library_version": __version__,
            "kernel_backend": KERNEL_BACKEND,
            "wall_time_s": wall,
        },
    )


def run_scenario(scenario: dict, out_dir, quiet: bool = False) -> list:
    """Validate and execute one scenario; returns the artifact list."""
    _validate(scenario)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    artifacts = _dispatch(scenario, out)
    _write_manifest(out, scenario, artifacts, time.perf_counter() - t0)
    if not quiet:
        for rel in artifacts + ["run_manifest.json"]:
            print(out / rel)
    return artifacts


# -- bundled verification suite ---------------------------------------------


def _suite_scenarios(dt_scale: float):
    quarters = [0.75 + 0.4375 * k for k in range(10)]
    ising = {"model_id": "ising_free_energy", "params": {}}
    helm = {"model_id": "ideal_gas_helmholtz", "params": {"R": 1.0, "T": 1.0}}
    entropy = {"model_id": "ideal_gas_entropy", "params": {"R": 1.0, "c": 1.5}}
    level0 = {"model_id": "quadratic", "params": {"dim": 1, "scale": 0.0, "offset": 0.0}}
    level3 = {"model_id": "quadratic", "params": {"dim": 1, "scale": 0.0, "offset": 3.0}}
    return [
        (
            "helmholtz_geometry",
            {
                "command": "geometry",
                "model": helm,
                "points": [[v] for v in quarters],
            },
        ),
        (
            "entropy_geometry",
            {
                "command": "geometry",
                "model": entropy,
                "grid": {"lower": [0.75, 0.75], "upper": [4.6875, 4.6875], "shape": [5, 5]},
            },
        ),
        (
            "legendre_helmholtz",
            {
                "command": "legendre",
                "model": helm,
                "eta": [[0.1 + 0.095 * k] for k in range(20)],
                "x0": [1.0],
            },
        ),
        (
            "divergence_ising",
            {
                "command": "divergence",
                "model": ising,
                "pairs": {"count": 100, "seed": 11, "lower": [-3.0], "upper": [3.0]},
            },
        ),
        (
            "divergence_entropy",
            {
                "command": "divergence",
                "model": entropy,
                "pairs": {"count": 100, "seed": 12, "lower": [0.3, 0.3], "upper": [6.0, 6.0]},
            },
        ),
        (
            "relax_ising",
            {
                "command": "relax",
                "kind": "single",
                "model": ising,
                "x": [1.0],
                "y0": [0.0],
                "z0": 0.0,
                "integrator": {"dt": 1e-3, "t_end": 25.0, "record_every": 100},
            },
        ),
        (
            "relax_two_forward",
            {
                "command": "relax",
                "kind": "two",
                "model": level0,
                "model2": level3,
                "x": [0.0],
                "y0": [0.0],
                "z0": 1.0,
                "integrator": {"dt": 1e-3, "t_end": 200.0, "record_every": 1000},
            },
        ),
        (
            "relax_two_backward",
            {
                "command": "relax",
                "kind": "two",
                "model": level0,
                "model2": level3,
                "x": [0.0],
                "y0": [0.0],
                "z0": 1.0,
                "integrator": {"dt": 1e-3, "t_end": -100.0, "record_every": 1000},
            },
        ),
        (
            "sign_table_single",
            {
                "command": "sign-table",
                "kind": "single",
                "model": {"model_id": "quadratic", "params": {"dim": 1, "scale": 0.0, "offset": 2.0}},
                "x": [0.0],
                "z_samples": [1.0, 2.0, 3.0],
            },
        ),
        (
            "sign_table_two",
            {
                "command": "sign-table",
                "kind": "two",
                "model": level0,
                "model2": level3,
                "x": [0.0],
                "z_samples": [-1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0],
            },
        ),
        (
            "contact_compare_single",
            {
                "command": "contact-compare",
                "kind": "single",
                "model": ising,
                "x": [1.0],
                "y0": [0.25],
                "z0": 0.0,
                "integrator": {"dt": 1e-3, "t_end": 10.0, "record_every": 10},
            },
        ),
        (
            "contact_compare_two",
            {
                "command": "contact-compare",
                "kind": "two",
                "model": level0,
                "model2": level3,
                "x": [0.0],
                "y0": [0.3],
                "z0": 1.0,
                "integrator": {"dt": 1e-3, "t_end": 10.0, "record_every": 10},
            },
        ),
    ]


def _suite_check(name: str, out: Path, dt_scale: float):
    """Evaluate the pass criterion for one bundled scenario."""
    if name == "helmholtz_geometry":
        rep = json.loads((out / "geometry_report.json").read_text())
        ok = all(r["classification"] == "nondegenerate" for r in rep["records"])
        res = max(
            max(r["residuals"]["transversal"], r["residuals"]["tangency"])
            for r in rep["records"]
        )
        return ok and res <= 1e-12, f"nondegenerate everywhere, residuals <= 1e-12 (max {res:.2e})"
    if name == "entropy_geometry":
        rep = json.loads((out / "geometry_report.json").read_text())
        sig_ok = all(tuple(r["signature"]) == (0, 2, 0) for r in rep["records"])
        eos = max(abs(r["y"][1] * r["x"][1] - 1.0) for r in rep["records"])
        return sig_ok and eos <= 1e-12, f"signature (0,2,0), |y2*x2 - R| <= 1e-12 (max {eos:.2e})"
    if name == "legendre_helmholtz":
        worst = 0.0
        with open(out / "legendre.csv") as fh:
            for row in csv.DictReader(fh):
                eta = float(row["eta1"])
                phi = float(row["phi"])
                closed = 1.0 + np.log(eta)
                worst = max(worst, abs(phi - closed))
        return worst <= 1e-8, f"|phi - closed form| <= 1e-8 (max {worst:.2e})"
    if name.startswith("divergence"):
        summ = json.loads((out / "divergence_summary.json").read_text())
        return summ["max_discrepancy"] <= 1e-10, (
            f"max |D_canonical - D_geometric| <= 1e-10 (got {summ['max_discrepancy']:.2e})"
        )
    if name == "relax_ising":
        F = float(np.log(np.cosh(1.0)) + np.log(2.0))
        g = float(np.tanh(1.0))
        last = None
        with open(out / "trajectory.csv") as fh:
            for row in csv.DictReader(fh):
                last = row
        errz = abs(float(last["z"]) - F)
        erry = abs(float(last["y1"]) - g)
        return max(errz, erry) <= 1e-8, (
            f"final |z - F| and |y - tanh x| <= 1e-8 (got {errz:.2e}, {erry:.2e})"
        )
    if name == "relax_two_forward":
        conv = json.loads((out / "convergence.json").read_text())
        zf = conv["converged_to"]["z"] if conv["converged_to"] else None
        if zf is None:
            with open(out / "trajectory.csv") as fh:
                for row in csv.DictReader(fh):
                    pass
                zf = float(row["z"])
        return abs(zf) <= 1e-6, f"forward limit |z - F_I| <= 1e-6 (got {abs(zf):.2e})"
    if name == "relax_two_backward":
        from scipy.optimize import brentq

        with open(out / "trajectory.csv") as fh:
            for row in csv.DictReader(fh):
                pass
        t = float(row["t"])
        z = float(row["z"])
        bound = 10.0 / abs(t)

        # time of flight for dz/dt = -z(z-3)^2 via its antiderivative,
        # real-valued on (0, 3); inverted for the exact backward endpoint
        def t_anti(u):
            return -np.log(u) / 9.0 + np.log(3.0 - u) / 9.0 + 1.0 / (3.0 * (u - 3.0))

        zstar = brentq(lambda u: t_anti(u) - (t_anti(1.0) + t), 1.0, 3.0 - 1e-12, xtol=1e-15)
        err = abs(z - zstar)
        ok = abs(z - 3.0) <= bound and err <= 1e-9
        return ok, (
            f"backward |z - F_II| <= 10/|t| and |z - exact| <= 1e-9 (got {err:.2e})"
        )
    if name == "sign_table_single":
        with open(out / "sign_table.csv") as fh:
            rows = list(csv.DictReader(fh))
        w_pat = tuple(int(r["sign_w"]) for r in rows)
        div_ok = all(float(r["div_base"]) == -1.0 for r in rows)
        return w_pat == (1, 0, -1) and div_ok, "w signs (+,0,-) and div identically -1"
    if name == "sign_table_two":
        with open(out / "sign_table.csv") as fh:
            rows = list(csv.DictReader(fh))
        w_pat = tuple(int(r["sign_w"]) for r in rows)
        d_pat = tuple(int(r["sign_div"]) for r in rows)
        ok = w_pat == (1, 0, -1, -1, -1, 0, -1) and d_pat == (-1, -1, -1, 0, 1, 0, -1)
        return ok, "w and div sign patterns across {F_I, z0, F_II}"
    if name.startswith("contact_compare"):
        rep = json.loads((out / "contact_compare.json").read_text())
        return rep["pass"], (
            f"contact vs lift sup-norm <= {rep['tol']:g} (got {rep['sup_norm_difference']:.2e})"
        )
    raise ScenarioError(f"no pass criterion for scenario {name!r}")


def emit_verification_suite(out_dir, dt_scale: float = 1.0, quiet: bool = False):
    """Run the bundled scenarios into an empty directory, with a PASS/FAIL summary.

    Also verifies the van der Waals degeneracy locus, which has no
    scenario command of its own.  Individual failures do not stop the
    suite.  Returns (all_passed, summary dict).
    """
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        raise ScenarioError(f"suite output directory {out} is not empty")
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for name, scenario in _suite_scenarios(dt_scale):
        sub = out / "scenarios" / name
        sub.mkdir(parents=True, exist_ok=True)
        try:
            artifacts = _dispatch(scenario, sub, dt_scale)
            _write_manifest(sub, scenario, artifacts, 0.0)
            passed, detail = _suite_check(name, sub, dt_scale)
        except Exception as exc:  # a failing scenario must not stop the suite
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results[name] = {"passed": bool(passed), "detail": detail}

    # degeneracy locus checks, computed directly
    try:
        from .potentials import vdw_helmholtz

        loc1 = degeneracy_locus(vdw_helmholtz(1.0), 0.4, 5.0)
        loc09 = degeneracy_locus(vdw_helmholtz(0.9), 0.4, 5.0)
        loc11 = degeneracy_locus(vdw_helmholtz(1.1), 0.4, 5.0)
        ok = (
            len(loc1) == 1
            and abs(loc1[0] - 1.0) <= 1e-10
            and len(loc09) == 2
            and loc09[0] < 1.0 < loc09[1]
            and len(loc11) == 0
        )
        detail = f"critical touch at x=1 (off by {abs(loc1[0] - 1.0) if loc1 else float('nan'):.1e}), 2 roots at T=0.9, none at T=1.1"
    except Exception as exc:
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    results["vdw_degeneracy"] = {"passed": bool(ok), "detail": detail}

    all_passed = all(r["passed"] for r in results.values())
    summary = {
        "all_passed": all_passed,
        "dt_scale": dt_scale,
        "results": results,
        "library_version": __version__,
        "kernel_backend": KERNEL_BACKEND,
    }
    _write_json(out / "summary.json", summary)
    lines = []
    for name, r in results.items():
        lines.append(f"{'PASS' if r['passed'] else 'FAIL'} {name}: {r['detail']}")
    lines.append(f"{'PASS' if all_passed else 'FAIL'} overall")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    if not quiet:
        for line in lines:
            print(line)
    return all_passed, summary


# -- entry point -------------------------------------------------------------


def _default_out() -> str:
    return os.environ.get("AFFINETHERM_OUT", "affinetherm_out")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="affinetherm",
        description="Affine-geometric thermodynamics scenario runner",
    )
    parser.add_argument("--scenario", help="path to a scenario JSON file")
    parser.add_argument("--out", help="output directory (default: $AFFINETHERM_OUT or ./affinetherm_out)")
    parser.add_argument("--suite", action="store_true", help="run the bundled verification suite")
    parser.add_argument("--dt-scale", type=float, default=1.0,
                        help="multiply every suite dt by this factor (sensitivity control)")
    parser.add_argument("--quiet", action="store_true", help="suppress informational output")
    args = parser.parse_args(argv)

    try:
        if args.suite:
            out = args.out or _default_out()
            all_passed, _ = emit_verification_suite(out, dt_scale=args.dt_scale, quiet=args.quiet)
            return 0 if all_passed else 4
        if not args.scenario:
            parser.error("either --scenario or --suite is required")
        try:
            with open(args.scenario) as fh:
                scenario = json.load(fh)
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
        out = args.out or scenario.get("output_dir") or _default_out()
        run_scenario(scenario, out, quiet=args.quiet)
        return 0
    except (DomainError, StencilError) as exc:
        print(json.dumps({"error": {"code": 3, "type": type(exc).__name__, "message": str(exc)}}))
        return 3
    except (SolveError, IntegrationError, MismatchError) as exc:
        print(json.dumps({"error": {"code": 4, "type": type(exc).__name__, "message": str(exc)}}))
        return 4
    except (ScenarioError, ValueError, KeyError) as exc:
        print(json.dumps({"error": {"code": 2, "type": type(exc).__name__, "message": str(exc)}}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
