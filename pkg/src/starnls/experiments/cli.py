"""Command line interface: run, sweep, thresholds, gn-estimate, check."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..params import ModelParams
from .scenario import ConfigError, EXAMPLE_CONFIG


def _cmd_run(args) -> int:
    from .runner import run_scenario

    try:
        result = run_scenario(args.config, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"termination: {result.termination}")
    print(f"outputs in {result.out_dir}")
    if result.termination == "boundary_contaminated":
        return 1
    return 0


def _cmd_sweep(args) -> int:
    from .runner import sweep

    try:
        path = sweep(args.config, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"sweep table: {path}")
    return 0


def _cmd_thresholds(args) -> int:
    from ..functionals import threshold_table

    mp = ModelParams(gamma=args.gamma, p=args.p, omega=args.omega)
    table = threshold_table(mp)
    text = table.to_json(indent=1)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.json}")
    else:
        print(text)
    return 0


def _cmd_gn_estimate(args) -> int:
    from ..variational import estimate_gn_constant, line_gn_constant

    mp = ModelParams(gamma=args.gamma, p=args.p)
    est = estimate_gn_constant(mp, budget=args.budget, seed=args.seed)
    doc = {
        "p": args.p,
        "gamma": args.gamma,
        "seed": args.seed,
        "estimate": est.value,
        "line_constant": line_gn_constant(args.p),
        "escape_shifts": [float(v) for v in est.escape_shifts],
        "escape_series": [float(v) for v in est.escape_series],
        "dilation_series": [float(v) for v in est.dilation_series],
        "ascent_best": est.ascent_best,
        "witness_centroids": [float(v) for v in est.witness_centroids],
    }
    text = json.dumps(doc, sort_keys=True, indent=1)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.json}")
    else:
        print(text)
    return 0


def _cmd_example_config(args) -> int:
    print(EXAMPLE_CONFIG, end="")
    return 0


def _cmd_check(args) -> int:
    """Quick built-in property suite; prints one PASS/FAIL line per check."""
    from ..decomposition import decompose, reconstruct
    from ..functionals import cutoff_profile, pohozaev_check, soliton_amplitude, threshold_table
    from ..grid import EdgeGrid, GraphFunction, mass
    from ..propagator import LinearPropagatorConfig, propagate_graph_linear

    rng = np.random.default_rng(0)
    failures = 0

    def report(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
        failures += 0 if ok else 1

    grid = EdgeGrid(length=30.0, n_points=751)
    for n_edges in (3, 4, 5):
        f = GraphFunction(grid, rng.normal(size=(n_edges, grid.n_points))
                          + 1j * rng.normal(size=(n_edges, grid.n_points)))
        back = reconstruct(decompose(f))
        err = float(np.abs(back.values - f.values).max())
        report(f"decomposition bijection N={n_edges}", err < 1e-12, f"max err {err:.2e}")

    x = grid.x
    bump = np.exp(-((x - 12.0) / 2.0) ** 2).astype(complex)
    f = GraphFunction(grid, np.stack([bump, 0.5 * bump, -0.25 * bump]))
    for gamma in (0.0, 1.0):
        cfg = LinearPropagatorConfig(dt=0.02, gamma=gamma)
        out = propagate_graph_linear(f, 0.5, cfg)
        drift = abs(mass(out) / mass(f) - 1.0)
        report(f"linear unitarity gamma={gamma}", drift < 1e-10, f"drift {drift:.2e}")

    res = pohozaev_check(7.0, 1.0, EdgeGrid(length=25.0, n_points=25001))
    worst = max(res.l2_vs_grad, res.grad_vs_lp1, res.l2_vs_lp1, res.mass_energy_ratio)
    report("pohozaev identities p=7", worst < 1e-5, f"worst {worst:.2e}")

    amp = soliton_amplitude(7.0, 1.0)
    report("soliton peak p=7", abs(amp - 4.0 ** (1.0 / 6.0)) < 1e-14)

    cut = cutoff_profile(5.0, grid)
    report("cutoff certificate", cut.max_second_derivative <= 2.0 + 1e-12,
           f"max chi'' {cut.max_second_derivative:.12f}")

    table = threshold_table(ModelParams(p=7.0))
    report("sharp-constant relation p=7", table.sharp_relation_residual < 1e-8,
           f"residual {table.sharp_relation_residual:.2e}")

    print(f"{failures} failure(s)")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="starnls",
        description="Nonlinear Schrodinger dynamics on a star graph: "
                    "scenario runner and analysis tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_thr = sub.add_parser("thresholds", help="print the soliton threshold table")
    p_thr.add_argument("--p", type=float, required=True)
    p_thr.add_argument("--omega", type=float, default=1.0)
    p_thr.add_argument("--gamma", type=float, default=0.0)
    p_thr.add_argument("--json", default=None, help="write to this file instead of stdout")
    p_thr.set_defaults(func=_cmd_thresholds)

    p_gn = sub.add_parser("gn-estimate", help="estimate the sharp GN constant")
    p_gn.add_argument("--p", type=float, required=True)
    p_gn.add_argument("--gamma", type=float, default=0.0)
    p_gn.add_argument("--budget", type=int, default=200)
    p_gn.add_argument("--seed", type=int, default=0)
    p_gn.add_argument("--json", default=None)
    p_gn.set_defaults(func=_cmd_gn_estimate)

    p_chk = sub.add_parser("check", help="run the built-in property suite")
    p_chk.set_defaults(func=_cmd_check)

    p_ex = sub.add_parser("example-config", help="print a template scenario config")
    p_ex.set_defaults(func=_cmd_example_config)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
