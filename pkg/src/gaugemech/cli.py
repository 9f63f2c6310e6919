"""Scenario runner: verification suites, leaf reports, and simulations.

Usage:
    gaugemech verify|leaves|simulate <scenario.json | builtin-name>
              [--seed N] [--tol-scale X] [--out DIR] [--list-builtins]

A scenario is a single JSON document naming specs (built-in or inline or by
file path), the suites to run, and a mandatory seed.  Exit codes: 0 pass,
1 check failure, 2 configuration error, 3 numerical divergence.  Reports are
written as `report.json` with 17-significant-digit floats; a fixed seed
reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bundle as bundle_mod
from . import dynamics, groupoid, liealg, poisson, semidirect
from .report import SuiteReport, dump_json

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGENCE = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# built-in scenarios
# ---------------------------------------------------------------------------

_SO3_CONNECTION = {
    # A = (0.3 x dy, -0.2 y dx, 0.1 dx + 0.4 x y dy) in the so3 basis: degree <= 2
    "A": [
        [[], [[-0.2, [0, 1]]], [[0.1, [0, 0]]]],
        [[[0.3, [1, 0]]], [], [[0.4, [1, 1]]]],
    ]
}

_U1_CONNECTION = {"A": [[[[-0.5, [0, 1]]]], [[[0.5, [1, 0]]]]]}

BUILTIN_SCENARIOS: dict[str, dict] = {
    "so3-trivial-bundle": {
        "name": "so3-trivial-bundle",
        "kind": "verify",
        "seed": 20260810,
        "group": "so3",
        "bundle": {
            "kind": "TrivialProduct",
            "group": "so3",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": _SO3_CONNECTION,
        },
        "suites": [
            "liealg.validate",
            "bundle.action",
            "bundle.connection",
            "bundle.momentum",
            "bundle.dual_sequence",
            "bundle.anchor_pullback",
            "groupoid.vb_axioms",
            "groupoid.laws",
            "groupoid.dual_structure",
            "groupoid.cores",
            "groupoid.momentum_morphism",
            "groupoid.ses",
            "poisson.properties",
            "poisson.jacobi",
            "poisson.dual_pair",
        ],
    },
    "heisenberg-verify": {
        "name": "heisenberg-verify",
        "kind": "verify",
        "seed": 20260810,
        "group": "heisenberg3",
        "bundle": {
            "kind": "TrivialProduct",
            "group": "heisenberg3",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": {"A": [[[], [[0.2, [0, 0]]], []], [[[0.3, [1, 0]]], [], []]]},
        },
        "suites": [
            "liealg.validate",
            "bundle.action",
            "bundle.momentum",
            "bundle.dual_sequence",
            "groupoid.vb_axioms",
            "groupoid.cores",
            "groupoid.ses",
            "poisson.dual_pair",
        ],
    },
    "se3-verify": {
        "name": "se3-verify",
        "kind": "verify",
        "seed": 20260810,
        "semidirect": "so3_r3",
        "suites": [
            "semidirect.spec",
            "semidirect.trivialization",
            "semidirect.action",
            "semidirect.equivariance",
            "semidirect.pullback_form",
            "semidirect.momentum_form",
            "semidirect.reduced_sequence",
            "semidirect.total_bundle",
        ],
    },
    "so3-leaves": {
        "name": "so3-leaves",
        "kind": "leaves",
        "seed": 20260810,
        "group": "so3",
        "bundle": {
            "kind": "TrivialProduct",
            "group": "so3",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": _SO3_CONNECTION,
        },
        "leaves": {"mu0": [0.0, 0.0, 1.0], "orbit_samples": 40, "samples": 20, "groupoid_action": True},
    },
    "so3-zero-leaf": {
        "name": "so3-zero-leaf",
        "kind": "leaves",
        "seed": 20260810,
        "group": "so3",
        "bundle": {
            "kind": "TrivialProduct",
            "group": "so3",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": _SO3_CONNECTION,
        },
        "leaves": {"mu0": [0.0, 0.0, 0.0], "orbit_samples": 10, "samples": 15},
    },
    "u1-magnetic": {
        "name": "u1-magnetic",
        "kind": "leaves",
        "seed": 20260810,
        "group": "t1",
        "bundle": {
            "kind": "TrivialProduct",
            "group": "t1",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": _U1_CONNECTION,
        },
        "leaves": {"mu0": [1.0], "orbit_samples": 10, "samples": 12, "chi": [1.0]},
    },
    "heavy-top-lagrange": {
        "name": "heavy-top-lagrange",
        "kind": "simulate",
        "seed": 20260810,
        "simulate": {
            "model": "heavy_top",
            "inertia": [1.0, 1.0, 0.5],
            "mgl": 1.0,
            "axis": [0.0, 0.0, 1.0],
            "x0": [0.8, -0.3, 0.6, 0.2, 0.1, 0.9],
            "h": 1e-3,
            "n_steps": 10000,
            "convergence_check": True,
        },
    },
    "heavy-top-free": {
        "name": "heavy-top-free",
        "kind": "simulate",
        "seed": 20260810,
        "simulate": {
            "model": "heavy_top",
            "inertia": [1.0, 2.0, 3.0],
            "mgl": 0.0,
            "axis": [0.0, 0.0, 1.0],
            "x0": [1.0, 0.2, -0.4, 0.3, 0.4, 0.5],
            "h": 1e-3,
            "n_steps": 10000,
            "convergence_check": False,
        },
    },
}


# ---------------------------------------------------------------------------
# spec resolution
# ---------------------------------------------------------------------------


def _resolve_group(ref: Any, basedir: Path) -> liealg.LieGroupSpec:
    if isinstance(ref, liealg.LieGroupSpec):
        return ref
    if isinstance(ref, dict):
        return liealg.spec_from_json(ref)
    if isinstance(ref, str):
        try:
            return liealg.builtin_group(ref)
        except KeyError:
            pass
        path = (basedir / ref).resolve() if not Path(ref).is_absolute() else Path(ref)
        if not path.exists():
            raise ConfigError(f"group spec {ref!r} is neither builtin nor an existing file")
        return liealg.load_spec(str(path))
    raise ConfigError(f"cannot resolve group reference {ref!r}")


def _resolve_bundle(doc: Any, basedir: Path) -> bundle_mod.BundleSpec:
    if isinstance(doc, bundle_mod.BundleSpec):
        return doc
    if isinstance(doc, str):
        path = (basedir / doc).resolve() if not Path(doc).is_absolute() else Path(doc)
        if not path.exists():
            raise ConfigError(f"bundle spec file {doc!r} not found")
        with path.open(encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"cannot resolve bundle reference {doc!r}")
    return bundle_mod.bundle_from_json(doc, group_resolver=lambda g: _resolve_group(g, basedir))


def _resolve_semidirect(ref: Any, basedir: Path) -> semidirect.SemidirectSpec:
    if isinstance(ref, semidirect.SemidirectSpec):
        return ref
    if isinstance(ref, str):
        try:
            return semidirect.builtin_semidirect(ref)
        except KeyError:
            raise ConfigError(f"unknown semidirect spec {ref!r}")
    if isinstance(ref, dict):
        return semidirect.sd_from_json(ref)
    raise ConfigError(f"cannot resolve semidirect reference {ref!r}")


def load_scenario(arg: str) -> tuple[dict, Path]:
    if arg in BUILTIN_SCENARIOS:
        return json.loads(json.dumps(BUILTIN_SCENARIOS[arg])), Path.cwd()
    path = Path(arg)
    if not path.exists():
        raise ConfigError(f"scenario {arg!r} is neither a builtin nor an existing file")
    with path.open(encoding="utf-8") as fh:
        return json.load(fh), path.parent


# ---------------------------------------------------------------------------
# the verify suite registry
# ---------------------------------------------------------------------------


def _suite_registry() -> dict[str, Callable[[dict, int], list[SuiteReport]]]:
    def need(ctx: dict, key: str) -> Any:
        if ctx.get(key) is None:
            raise ConfigError(f"suite requires a {key!r} entry in the scenario")
        return ctx[key]

    def groupoid_axioms(ctx, seed):
        b = need(ctx, "bundle")
        return [groupoid.vb_axiom_suite(b, tag, samples=60, seed=seed) for tag in groupoid.SPACE_TAGS]

    def groupoid_laws(ctx, seed):
        b = need(ctx, "bundle")
        return [groupoid.groupoid_law_suite(b, tag, samples=30, seed=seed) for tag in groupoid.SPACE_TAGS]

    def groupoid_ses(ctx, seed):
        b = need(ctx, "bundle")
        return [groupoid.ses_fiber_check(b, sid, samples=50, seed=seed) for sid in ("duzyVtrojka", "duzyVdual", "Adual", "quotiented")]

    def poisson_properties(ctx, seed):
        b = need(ctx, "bundle")
        spaces = [poisson.lie_poisson(b.group), poisson.canonical_cotangent(b.d or 1)]
        if b.kind == "TrivialProduct":
            spaces.append(poisson.quotient_cotangent(b))
        return [poisson.bracket_property_suite(s, trials=60, seed=seed) for s in spaces]

    def poisson_jacobi(ctx, seed):
        b = need(ctx, "bundle")
        rep = SuiteReport("poisson.jacobi")
        rep.add("canonical", poisson.jacobi_check(poisson.canonical_cotangent(max(b.d, 1)), trials=10, seed=seed), 1e-6)
        rep.add("lie_poisson", poisson.jacobi_check(poisson.lie_poisson(b.group), trials=10, seed=seed), 1e-6)
        if b.kind == "TrivialProduct":
            rep.add("quotient", poisson.jacobi_check(poisson.quotient_cotangent(b), trials=6, seed=seed), 1e-6)
        return [rep]

    def sd_total_bundle(ctx, seed):
        sd = need(ctx, "semidirect")
        b = semidirect.total_bundle(sd)
        return [
            bundle_mod.action_suite(b, samples=25, seed=seed),
            bundle_mod.momentum_suite(b, samples=40, seed=seed),
            bundle_mod.anchor_pullback_suite(b, samples=25, seed=seed),
            _momentum_cross_check(sd, b, seed),
        ]

    return {
        "liealg.validate": lambda ctx, seed: [liealg.validate_spec(need(ctx, "group"), seed=seed)],
        "bundle.action": lambda ctx, seed: [bundle_mod.action_suite(need(ctx, "bundle"), samples=40, seed=seed)],
        "bundle.connection": lambda ctx, seed: [bundle_mod.connection_suite(need(ctx, "bundle"), samples=40, seed=seed)],
        "bundle.momentum": lambda ctx, seed: [bundle_mod.momentum_suite(need(ctx, "bundle"), samples=80, seed=seed)],
        "bundle.dual_sequence": lambda ctx, seed: [bundle_mod.dual_sequence_suite(need(ctx, "bundle"), samples=60, seed=seed)],
        "bundle.anchor_pullback": lambda ctx, seed: [bundle_mod.anchor_pullback_suite(need(ctx, "bundle"), samples=40, seed=seed)],
        "groupoid.vb_axioms": groupoid_axioms,
        "groupoid.laws": groupoid_laws,
        "groupoid.dual_structure": lambda ctx, seed: [groupoid.dual_structure_suite(need(ctx, "bundle"), samples=25, seed=seed)],
        "groupoid.cores": lambda ctx, seed: [groupoid.core_suite(need(ctx, "bundle"), fibers=50, seed=seed)],
        "groupoid.momentum_morphism": lambda ctx, seed: [groupoid.momentum_morphism_suite(need(ctx, "bundle"), samples=60, seed=seed)],
        "groupoid.ses": groupoid_ses,
        "poisson.properties": poisson_properties,
        "poisson.jacobi": poisson_jacobi,
        "poisson.dual_pair": lambda ctx, seed: [poisson.dual_pair_check(need(ctx, "bundle"), trials=100, seed=seed)],
        "semidirect.spec": lambda ctx, seed: [semidirect.spec_suite(need(ctx, "semidirect"), samples=40, seed=seed)],
        "semidirect.trivialization": lambda ctx, seed: [semidirect.trivialization_suite(need(ctx, "semidirect"), samples=40, seed=seed)],
        "semidirect.action": lambda ctx, seed: [semidirect.action_suite(need(ctx, "semidirect"), samples=40, seed=seed)],
        "semidirect.equivariance": lambda ctx, seed: [semidirect.equivariance_suite(need(ctx, "semidirect"), samples=200, seed=seed)],
        "semidirect.pullback_form": lambda ctx, seed: [semidirect.pullback_form_suite(need(ctx, "semidirect"), samples=30, seed=seed)],
        "semidirect.momentum_form": lambda ctx, seed: [semidirect.momentum_form_suite(need(ctx, "semidirect"), samples=20, seed=seed)],
        "semidirect.reduced_sequence": lambda ctx, seed: [semidirect.reduced_sequence_suite(need(ctx, "semidirect"), samples=25, seed=seed)],
        "semidirect.total_bundle": sd_total_bundle,
    }


def _momentum_cross_check(sd: semidirect.SemidirectSpec, b: bundle_mod.BundleSpec, seed: int) -> SuiteReport:
    """bundle.momentum on the total space matches the factor momentum J_N."""
    from .rng import stream

    rep = SuiteReport(f"semidirect.momentum_cross_check[{sd.name}]")
    rng = stream(seed, f"semidirect.momentum_cross/{sd.name}")
    worst = 0.0
    for _ in range(40):
        s = b.random_cotangent(rng)
        fc = semidirect.FactoredCotangent(s.point.base, s.a, s.point.fiber, s.b)
        _, jn = semidirect.momentum_factorized(sd, fc)
        worst = max(worst, float(np.linalg.norm(b.momentum(s) - jn)))
        beta = semidirect.tstar_sigma(sd, fc)
        jn_group = sd.iota_dot().T @ beta
        worst = max(worst, float(np.linalg.norm(jn_group - jn)))
    rep.add("J_matches_factor_momentum", worst, 1e-10)
    rep.extras["trials"] = 40
    return rep


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def run_verify(scenario: dict, basedir: Path, seed: int, tol_scale: float, out_dir: Path) -> int:
    ctx = {
        "group": _resolve_group(scenario["group"], basedir) if "group" in scenario else None,
        "bundle": _resolve_bundle(scenario["bundle"], basedir) if "bundle" in scenario else None,
        "semidirect": _resolve_semidirect(scenario["semidirect"], basedir) if "semidirect" in scenario else None,
    }
    registry = _suite_registry()
    reports: list[SuiteReport] = []
    for name in scenario.get("suites", []):
        if name not in registry:
            raise ConfigError(f"unknown suite {name!r}")
        reports.extend(registry[name](ctx, seed))
    for rep in reports:
        for check in rep.checks:
            check.tol *= tol_scale
    doc = {
        "scenario": scenario.get("name", "unnamed"),
        "kind": "verify",
        "seed": seed,
        "tol_scale": tol_scale,
        "pass": all(r.passed for r in reports),
        "suites": [r.to_dict() for r in sorted(reports, key=lambda r: r.name)],
        "failures": sorted(f"{r.name}:{c.name}" for r in reports for c in r.failures()),
    }
    dump_json(doc, str(out_dir / "report.json"))
    return EXIT_PASS if doc["pass"] else EXIT_CHECK_FAILURE


def run_leaves(scenario: dict, basedir: Path, seed: int, tol_scale: float, out_dir: Path) -> int:
    cfg = scenario.get("leaves")
    if cfg is None:
        raise ConfigError("leaves scenario needs a 'leaves' section")
    b = _resolve_bundle(scenario["bundle"], basedir)
    mu0 = np.asarray(cfg["mu0"], dtype=float)
    orbit = poisson.coadjoint_orbit(b.group, mu0, n_samples=int(cfg.get("orbit_samples", 40)), seed=seed)
    reports = [poisson.leaf_structure(b, orbit, samples=int(cfg.get("samples", 20)), seed=seed)]
    extras: dict[str, Any] = {"orbit_dim": orbit.dim, "leaf_dim": 2 * b.d + orbit.dim}

    if cfg.get("groupoid_action"):
        reports.append(poisson.groupoid_action_suite(b, orbit, samples=8, seed=seed))

    if "chi" in cfg:
        _, mag_rep = poisson.magnetic_term(b, np.asarray(cfg["chi"], dtype=float), samples=int(cfg.get("samples", 12)), seed=seed)
        reports.append(mag_rep)
        extras["magnetic_closedness_residual"] = mag_rep.extras.get("magnetic_closedness_residual")

    for rep in reports:
        for check in rep.checks:
            check.tol *= tol_scale
    doc = {
        "scenario": scenario.get("name", "unnamed"),
        "kind": "leaves",
        "seed": seed,
        "tol_scale": tol_scale,
        "pass": all(r.passed for r in reports),
        "suites": [r.to_dict() for r in sorted(reports, key=lambda r: r.name)],
        "failures": sorted(f"{r.name}:{c.name}" for r in reports for c in r.failures()),
    }
    doc.update(extras)
    dump_json(doc, str(out_dir / "report.json"))

    # sampled leaf points as CSV: class coordinates (m, a, bbar)
    if b.kind == "TrivialProduct":
        from .rng import stream

        rng = stream(seed, "cli.leaf_points")
        rows = []
        for mu in orbit.samples[: int(cfg.get("samples", 20))]:
            m = b.random_base(rng)
            cls = b.sigma(m, mu)
            rows.append(np.concatenate([m, cls.rep.a + rng.standard_normal(b.d), cls.rep.b]))
        with (out_dir / "leaf_points.csv").open("w", encoding="utf-8") as fh:
            fh.write(",".join([f"m{i+1}" for i in range(b.d)] + [f"a{i+1}" for i in range(b.d)] + [f"b{i+1}" for i in range(b.n)]) + "\n")
            for row in rows:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return EXIT_PASS if doc["pass"] else EXIT_CHECK_FAILURE


def run_simulate(scenario: dict, basedir: Path, seed: int, tol_scale: float, out_dir: Path) -> int:
    cfg = scenario.get("simulate")
    if cfg is None:
        raise ConfigError("simulate scenario needs a 'simulate' section")
    if cfg.get("model", "heavy_top") != "heavy_top":
        raise ConfigError(f"unknown model {cfg.get('model')!r}")
    model = semidirect.heavy_top_model(cfg["inertia"], float(cfg["mgl"]), cfg["axis"])
    x0 = np.asarray(cfg["x0"], dtype=float)
    h = float(cfg["h"])
    n_steps = int(cfg["n_steps"])
    monitors = {"energy": model.hamiltonian}
    for c in model.casimirs:
        monitors[c.name] = c
    if model.inertia[0] == model.inertia[1] and np.allclose(model.axis, [0, 0, 1]):
        monitors["Pi3"] = poisson.coordinate_field(2, 6)
    if model.mgl == 0.0:
        monitors["|Pi|^2"] = poisson.ScalarField(lambda x: float(x[:3] @ x[:3]), lambda x: np.concatenate([2 * x[:3], np.zeros(3)]))

    doc: dict[str, Any] = {
        "scenario": scenario.get("name", "unnamed"),
        "kind": "simulate",
        "seed": seed,
        "model": {"inertia": list(model.inertia), "mgl": model.mgl, "axis": list(model.axis)},
        "h": h,
        "n_steps": n_steps,
    }
    try:
        traj = dynamics.integrate(model.space, model.hamiltonian, x0, h, n_steps, monitors=monitors)
    except dynamics.DivergenceError as exc:
        doc["pass"] = False
        doc["divergence_step"] = exc.step
        doc["last_valid_time"] = float(exc.trajectory.times[-1]) if exc.trajectory.times.size else 0.0
        dump_json(doc, str(out_dir / "report.json"))
        return EXIT_DIVERGENCE

    drift = dynamics.monitor_drift(traj)
    doc["drift"] = drift
    drift_tol = 1e-6 * tol_scale
    passed = all(v <= drift_tol for k, v in drift.items())
    if cfg.get("convergence_check"):
        ratio, d1, d2 = dynamics.convergence_ratio(model.space, model.hamiltonian, x0, h=8e-3, t_final=4.0, quantity=model.hamiltonian)
        doc["convergence"] = {"ratio": ratio, "drift_h": d1, "drift_h_half": d2}
        passed = passed and (12.0 <= ratio <= 20.0)
    doc["drift_tol"] = drift_tol
    doc["pass"] = passed
    dump_json(doc, str(out_dir / "report.json"))
    dynamics.write_trajectory_csv(traj, out_dir / "trajectory.csv")
    dynamics.write_run_metadata(out_dir / "trajectory.meta.json", model.space.name, "heavy_top", h, n_steps, seed)
    return EXIT_PASS if passed else EXIT_CHECK_FAILURE


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gaugemech", description="Verification and simulation scenario runner.")
    parser.add_argument("command", choices=["verify", "leaves", "simulate"], nargs="?")
    parser.add_argument("scenario", nargs="?", help="scenario JSON file or builtin name")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--tol-scale", type=float, default=1.0, help="multiply all tolerances")
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument("--list-builtins", action="store_true")
    args = parser.parse_args(argv)

    if args.list_builtins:
        for name in sorted(BUILTIN_SCENARIOS):
            print(f"{name}  ({BUILTIN_SCENARIOS[name]['kind']})")
        return EXIT_PASS
    if args.command is None or args.scenario is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        scenario, basedir = load_scenario(args.scenario)
        if scenario.get("kind") not in (None, args.command):
            raise ConfigError(f"scenario kind {scenario.get('kind')!r} does not match command {args.command!r}")
        seed = args.seed if args.seed is not None else scenario.get("seed")
        if seed is None:
            raise ConfigError("a seed is mandatory (scenario 'seed' field or --seed)")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        runner = {"verify": run_verify, "leaves": run_leaves, "simulate": run_simulate}[args.command]
        code = runner(scenario, basedir, int(seed), float(args.tol_scale), out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if code == EXIT_CHECK_FAILURE:
        print("one or more checks failed; see report.json", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
