"""Command-line front end.

Subcommands: check-kernel, effective, solve, converge, diagnose.  Every run
reads one JSON config, writes a self-describing output directory (config
copy, JSON reports, CSVs, plot data, figures) and is deterministic for a
fixed config.  Exit codes: 0 success, 1 config/execution error, 2 a
requested hypothesis check failed.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .coefficients import (
    EffectiveField,
    LocallyPeriodicCoefficient,
    effective_lambda,
)
from .config import ExperimentConfig, load_config
from .diagnostics import (
    StudyConfig,
    cube_decomposition_check,
    exterior_decay_check,
    region_split_energy,
    run_convergence_study,
    translation_energy_check,
)
from .discretization import (
    AngularDensity,
    GridFunction,
    apply_operator,
    assemble_effective,
    assemble_eps,
    energy,
)
from .errors import NlhomogError, SupportError
from .kernels import estimate_k, verify_hypotheses
from .solver import SolveConfig, resolvent_solve
from . import reporting


def _check_support(cfg: ExperimentConfig) -> None:
    cap = cfg.R / 4.0
    radius = cfg.rhs.support_radius()
    if radius > cap * (1.0 + 1e-12):
        raise SupportError(
            f"rhs support radius {radius} exceeds R/4 = {cap}; widen the box"
        )


def cmd_check_kernel(cfg: ExperimentConfig, args, out: str) -> int:
    kernel = cfg.build_kernel()
    report = verify_hypotheses(kernel, which=cfg.hypotheses)
    reporting.write_json(os.path.join(out, "hypotheses.json"), report.as_dict())
    for name, res in report.results.items():
        print(f"{name}: {'pass' if res.passed else 'FAIL'}")
    return 0 if report.all_passed else 2


def cmd_effective(cfg: ExperimentConfig, args, out: str) -> int:
    kernel = cfg.build_kernel()
    coeff = cfg.build_coefficient()
    est = estimate_k(kernel)
    k_rows = []
    for i, direction in enumerate(est.directions):
        row = [str(direction)]
        row += [repr(float(v)) for v in est.table[i]]
        row += [repr(float(est.limits[i])), str(bool(est.converged[i]))]
        k_rows.append(row)
    header = ["direction"] + [f"khat_n={n:g}" for n in est.n_list] + ["limit", "converged"]
    reporting.write_csv(os.path.join(out, "k_table.csv"), header, k_rows)
    doc = {
        "kernel": kernel.name,
        "alpha": cfg.alpha,
        "k": {
            "n_list": list(est.n_list),
            "limits": est.limits,
            "converged": est.converged,
        },
    }
    if isinstance(coeff, LocallyPeriodicCoefficient):
        fld = EffectiveField(coeff, s=cfg.lambda_s)
        axis = np.linspace(-cfg.R, cfg.R, 17)
        samples = [
            {"x": float(x), "y": float(y), "lambda_bar": float(fld.values(np.array([x]), np.array([y]))[0])}
            for x in axis
            for y in axis
        ]
        doc["lambda_bar_field"] = samples
        print(f"lambda_bar(0, 1) = {samples[8 * 17 + 9]['lambda_bar']!r}")
    else:
        lam = effective_lambda(coeff, s=cfg.lambda_s)
        doc["lambda_bar"] = lam
        print(f"lambda_bar = {lam!r}")
    reporting.write_json(os.path.join(out, "effective.json"), doc)
    return 0


def _assemble_requested(cfg: ExperimentConfig, args, kernel, coeff, grid):
    if args.effective:
        est = estimate_k(kernel)
        kang = AngularDensity.from_estimate(est)
        if isinstance(coeff, LocallyPeriodicCoefficient):
            lam = EffectiveField(coeff, s=cfg.lambda_s)
        else:
            lam = effective_lambda(coeff, s=cfg.lambda_s)
        return assemble_effective(kang, lam, cfg.alpha, grid)
    return assemble_eps(kernel, coeff, args.eps, grid)


def cmd_solve(cfg: ExperimentConfig, args, out: str) -> int:
    _check_support(cfg)
    kernel = cfg.build_kernel()
    coeff = cfg.build_coefficient()
    grid = cfg.build_grid()
    f = GridFunction.from_callable(grid, cfg.rhs.build())
    op = _assemble_requested(cfg, args, kernel, coeff, grid)
    rep = resolvent_solve(op, f, SolveConfig(m=cfg.m, rel_tol=cfg.solver_rel_tol))
    if not rep.converged:
        print("error: solver did not reach the requested residual", file=sys.stderr)
        return 1
    rep.u.to_csv(os.path.join(out, "solution.csv"))
    doc = rep.as_dict()
    doc["operator"] = "effective" if args.effective else f"eps={args.eps!r}"
    reporting.write_json(os.path.join(out, "solve_report.json"), doc)
    if grid.dimension == 1:
        reporting.render_profile_figure(
            os.path.join(out, "solution.png"), grid.centers(),
            {"u": rep.u.values, "f": f.values},
        )
    print(f"iterations={rep.iterations} rel_residual={rep.rel_residual:.3e}")
    return 0


def cmd_converge(cfg: ExperimentConfig, args, out: str) -> int:
    _check_support(cfg)
    study = StudyConfig(
        kernel=cfg.build_kernel(), coeff=cfg.build_coefficient(), m=cfg.m,
        grid=cfg.build_grid(), eps_list=cfg.eps_list, rhs=cfg.rhs.build(),
        rhs_support_radius=cfg.rhs.support_radius(),
        solver_rel_tol=cfg.solver_rel_tol, lambda_quad_s=cfg.lambda_s,
    )
    rep = run_convergence_study(study, workers=args.threads)
    rows = [
        [repr(r.eps), repr(r.error), r.solve.iterations, r.solve.converged,
         repr(r.solve.rel_residual), repr(r.solve.u_norm),
         r.solve.resolvent_bound_ok]
        for r in rep.rows
    ]
    reporting.write_csv(
        os.path.join(out, "convergence.csv"),
        ["eps", "error", "iterations", "converged", "rel_residual", "u_norm",
         "resolvent_bound_ok"],
        rows,
    )
    reporting.write_plot_data(
        os.path.join(out, "errors.dat"), "eps  l2_error",
        [(r.eps, r.error) for r in rep.rows],
    )
    doc = {
        "lambda_bar": rep.lambda_bar,
        "k_limits": rep.k_values.values,
        "m": rep.m,
        "eps": rep.eps_values,
        "errors": rep.errors,
        "strictly_decreasing": rep.strictly_decreasing,
        "reduction_ratio": rep.reduction_ratio,
        "u0": rep.u0_solve.as_dict(),
    }
    reporting.write_json(os.path.join(out, "convergence.json"), doc)
    rep.u0.to_csv(os.path.join(out, "u0.csv"))
    reporting.render_convergence_figure(
        os.path.join(out, "convergence.png"), rep.eps_values, rep.errors)
    if study.grid.dimension == 1:
        finest = rep.rows[-1]
        reporting.render_profile_figure(
            os.path.join(out, "profiles.png"), study.grid.centers(),
            {"u0": rep.u0.values, f"eps={finest.eps:g}": finest.u.values},
        )
    for r in rep.rows:
        print(f"eps={r.eps:<10g} error={r.error:.6e}")
    print(f"strictly_decreasing={rep.strictly_decreasing} "
          f"reduction_ratio={rep.reduction_ratio:.4f}")
    return 0


def _operator_identities(op, grid, seed: int, n_vectors: int = 5) -> dict:
    rng = np.random.default_rng(seed)
    sym = float(np.max(np.abs(op.weights - op.weights.T)))
    worst = 0.0
    for _ in range(n_vectors):
        u = GridFunction(grid, rng.standard_normal(grid.size))
        lu = apply_operator(op, u)
        defect = abs(energy(op, u, u) + lu.inner(u))
        scale = max(abs(energy(op, u, u)), 1e-300)
        worst = max(worst, defect / scale)
    ones = GridFunction(grid, np.ones(grid.size))
    # remove the killing column: interaction part alone must kill constants
    interaction = apply_operator(op, ones).values + op.kappa * ones.values
    return {
        "symmetry_defect": sym,
        "energy_identity_rel_defect": worst,
        "constant_annihilation": float(np.max(np.abs(interaction))),
        "vectors": n_vectors,
        "seed": seed,
    }


def cmd_diagnose(cfg: ExperimentConfig, args, out: str) -> int:
    _check_support(cfg)
    kernel = cfg.build_kernel()
    coeff = cfg.build_coefficient()
    grid = cfg.build_grid()
    rhs_fn = cfg.rhs.build()
    f = GridFunction.from_callable(grid, rhs_fn)
    eps_ref = min(cfg.eps_list)
    op = assemble_eps(kernel, coeff, eps_ref, grid)
    solve = resolvent_solve(op, f, SolveConfig(m=cfg.m, rel_tol=cfg.solver_rel_tol))
    u = solve.u
    doc = {
        "eps": eps_ref,
        "solve": solve.as_dict(),
        "identities": _operator_identities(op, grid, args.seed),
    }
    diag = cfg.diagnostics
    if diag.regions:
        rows = []
        for delta in diag.regions:
            split = region_split_energy(op, u, u, delta)
            rows.append([repr(delta), repr(split.g1), repr(split.g2),
                         repr(split.g3), repr(split.total_pair_form),
                         repr(split.partition_defect)])
        reporting.write_csv(
            os.path.join(out, "region_split.csv"),
            ["delta", "g1", "g2", "g3", "total_pair_form", "partition_defect"],
            rows)
        doc["regions"] = [
            {"delta": r[0], "g1": r[1], "g2": r[2], "g3": r[3]} for r in rows
        ]
    if diag.cubes:
        rows = []
        for eps_c, delta_c in diag.cubes:
            cc = cube_decomposition_check(
                kernel, coeff, eps=eps_c, delta=delta_c, u=rhs_fn, phi=rhs_fn,
                grid=grid, lambda_s=cfg.lambda_s)
            rows.append([repr(eps_c), repr(delta_c), repr(cc.lhs), repr(cc.rhs),
                         repr(cc.gap_rel), repr(cc.boundary_mass),
                         cc.boundary_cubes])
        reporting.write_csv(
            os.path.join(out, "cube_check.csv"),
            ["eps", "delta", "lhs", "rhs", "gap_rel", "boundary_mass",
             "boundary_cubes"],
            rows)
        doc["cubes"] = [{"eps": r[0], "delta": r[1], "gap_rel": r[4]} for r in rows]
    if diag.translation_shifts:
        tr = translation_energy_check(
            u, eps=eps_ref, M=kernel.M, alpha=cfg.alpha,
            shifts=diag.translation_shifts)
        reporting.write_csv(
            os.path.join(out, "translation.csv"),
            ["steps", "shift", "energy", "regime", "ratio"],
            [[r.steps, repr(r.shift), repr(r.energy), r.regime, repr(r.ratio)]
             for r in tr.rows])
        reporting.render_translation_figure(
            os.path.join(out, "translation.png"), tr.rows)
        doc["translation"] = {
            "coarse_ratio_spread": tr.ratio_spread("coarse"),
        }
    if diag.exterior:
        ex = exterior_decay_check(u, n_list=diag.exterior)
        reporting.write_csv(
            os.path.join(out, "exterior.csv"), ["n", "tail"],
            [[repr(r.n), repr(r.tail)] for r in ex.rows])
        reporting.render_exterior_figure(
            os.path.join(out, "exterior.png"), ex.rows)
        doc["exterior"] = {
            "tails": [{"n": r.n, "tail": r.tail} for r in ex.rows],
            "nonincreasing": ex.nonincreasing,
        }
    reporting.write_json(os.path.join(out, "diagnostics.json"), doc)
    print("diagnose: wrote", ", ".join(sorted(os.listdir(out))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlhomog",
        description="Homogenization laboratory for nonlocal convolution operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (default: from config)")
        p.add_argument("--threads", type=int, default=1,
                       help="thread pool size for study rows")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for random test-vector diagnostics only")

    p = sub.add_parser("check-kernel", help="verify kernel hypotheses")
    common(p)
    p.set_defaults(func=cmd_check_kernel)

    p = sub.add_parser("effective", help="effective coefficient and tail density")
    common(p)
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("solve", help="one resolvent solve")
    common(p)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--eps", type=float, help="assemble at this eps")
    which.add_argument("--effective", action="store_true",
                       help="assemble the homogenized operator")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="full eps sweep against u0")
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("diagnose", help="region/cube/translation/exterior checks")
    common(p)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = args.out or cfg.output_dir or os.path.join("runs", args.command)
        os.makedirs(out, exist_ok=True)
        reporting.copy_config(args.config, out)
        return args.func(cfg, args, out)
    except NlhomogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
