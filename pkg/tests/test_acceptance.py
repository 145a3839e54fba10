"""Acceptance suite: every primary claim, one printed pass/fail line each.

Run with -s to see the per-criterion lines.  The studies use the full
production sizes (N = 4096 boxes), so this module dominates suite runtime;
everything is single-threaded and deterministic.
"""

import time

import numpy as np
import pytest
from helpers import naive_assemble_1d

from nlhomog import (
    ConvolutionApplier,
    Grid,
    GridFunction,
    NonlocalOperator,
    StudyConfig,
    apply_operator,
    assemble_eps,
    cube_decomposition_check,
    energy,
    estimate_k,
    exterior_decay_check,
    make_constant,
    make_cosine_difference,
    make_pareto_kernel,
    make_product_sine,
    make_slow_modulated,
    mass,
    oscillation_phi,
    region_split_energy,
    run_convergence_study,
    shell_mass,
    translation_energy_check,
    effective_lambda,
)

M_VALUE = 1.0
SIGMA = 0.5


def _gauss(x):
    return np.exp(-0.5 * (x / SIGMA) ** 2)


def _bump(x):
    x = np.asarray(x, dtype=float)
    t = x / 0.5
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def _verdict(num, label, ok, detail=""):
    tail = f" ({detail})" if detail else ""
    print(f"criterion {num:02d} {label}: {'PASS' if ok else 'FAIL'}{tail}",
          flush=True)
    return ok


def _study(alpha, coeff, grid, eps_list):
    cfg = StudyConfig(
        kernel=make_pareto_kernel(1, alpha), coeff=coeff, m=M_VALUE,
        grid=grid, eps_list=eps_list, rhs=_gauss,
        rhs_support_radius=4.0 * SIGMA,
    )
    t0 = time.perf_counter()
    rep = run_convergence_study(cfg)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def grid4096():
    return Grid(dimension=1, half_width=8.0, n=4096)


@pytest.fixture(scope="module")
def grid1024():
    return Grid(dimension=1, half_width=8.0, n=1024)


@pytest.fixture(scope="module")
def study_a(grid4096):
    return _study(1.0, make_cosine_difference(), grid4096,
                  (0.25, 0.125, 0.0625, 0.03125))


@pytest.fixture(scope="module")
def study_b(grid4096):
    return {
        alpha: _study(alpha, make_cosine_difference(), grid4096,
                      (0.25, 0.125, 0.0625, 0.03125))
        for alpha in (0.5, 1.5)
    }


@pytest.fixture(scope="module")
def study_c(grid1024):
    return _study(1.0, make_slow_modulated(), grid1024,
                  (0.25, 0.125, 0.0625))


def test_criterion_01_kernel_oracles():
    t0 = time.perf_counter()
    ok = True
    details = []
    for alpha in (0.5, 1.0, 1.5):
        k = make_pareto_kernel(1, alpha)
        ok &= abs(mass(k) - 1.0) <= 1e-6
        for r in (1.0, 4.0, 16.0):
            annular = r**alpha * shell_mass(k, r, 2.0 * r)
            ok &= abs(annular - (1.0 - 2.0**-alpha)) <= 1e-6
        est = estimate_k(k)
        khat_1024 = np.asarray(est.table)[:, -1]  # n_list ends at 1024
        ok &= bool(np.all(np.abs(khat_1024 - alpha / 2.0) <= 0.01 * (alpha / 2.0)))
        phi = oscillation_phi(k)  # r = 16, 32, 64
        ok &= all(b < a for a, b in zip(phi.values[:-1], phi.values[1:]))
        details.append(f"alpha={alpha}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    assert _verdict(1, "kernel oracles", ok, f"{elapsed:.1f}s")


def test_criterion_02_effective_coefficient():
    ok = True
    for coeff in (make_product_sine(), make_cosine_difference()):
        lam = effective_lambda(coeff)
        ok &= abs(lam - 2.0) <= 1e-6
        # independent midpoint quadrature on a 512 x 512 cell grid
        t = (np.arange(512) + 0.5) / 512.0
        brute = float(np.mean(coeff.evaluate(t[:, None], t[None, :])))
        ok &= abs(lam - brute) <= 1e-6
    ok &= effective_lambda(make_constant(1.0)) == 1.0
    assert _verdict(2, "effective coefficient", ok)


def test_criterion_03_assembly_equivalence(grid1024):
    grid64 = Grid(dimension=1, half_width=8.0, n=64)
    kernel = make_pareto_kernel(1, 1.0)
    coeff = make_cosine_difference()
    op64 = assemble_eps(kernel, coeff, 0.25, grid64)
    mirror = naive_assemble_1d(kernel, coeff, 0.25, grid64)
    exact = np.array_equal(op64.weights, mirror)

    op = assemble_eps(kernel, make_constant(2.0), 0.25, grid1024)
    fast = ConvolutionApplier(op)
    rng = np.random.default_rng(0)
    fft_ok = True
    for _ in range(5):
        u = GridFunction(grid1024, rng.standard_normal(grid1024.size))
        dense = apply_operator(op, u).values
        quick = fast.apply(u).values
        scale = max(1.0, float(np.max(np.abs(dense))))
        fft_ok &= float(np.max(np.abs(dense - quick))) <= 1e-10 * scale
    ok = exact and fft_ok
    assert _verdict(3, "assembly equivalence", ok,
                    f"bitwise={exact} fft={fft_ok}")


def test_criterion_04_operator_identities():
    grid = Grid(dimension=1, half_width=8.0, n=256)
    op = assemble_eps(make_pareto_kernel(1, 1.0), make_cosine_difference(),
                      0.25, grid)
    sym = np.array_equal(op.weights, op.weights.T)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        u = GridFunction(grid, rng.standard_normal(grid.size))
        e = energy(op, u, u)
        pair = apply_operator(op, u).inner(u)
        worst = max(worst, abs(e + pair) / max(abs(e), 1e-300))
    identity_ok = worst <= 1e-10
    bare = NonlocalOperator(grid=grid, weights=op.weights,
                            kappa=np.zeros(grid.size), alpha=op.alpha)
    ones = GridFunction(grid, np.ones(grid.size))
    const_ok = bool(np.all(apply_operator(bare, ones).values == 0.0))
    ok = sym and identity_ok and const_ok
    assert _verdict(4, "operator and form identities", ok,
                    f"energy defect {worst:.2e}")


def test_criterion_05_resolvent_bound(study_a, study_b, study_c):
    reports = []
    for rep, _ in (study_a, study_c, *study_b.values()):
        reports.append(rep.u0_solve)
        reports.extend(r.solve for r in rep.rows)
    ok = True
    for sol in reports:
        ok &= sol.converged
        ok &= sol.resolvent_bound_ok
        ok &= sol.u_norm <= sol.f_norm / sol.m + 1e-10 * sol.f_norm / sol.m + 1e-300
    assert _verdict(5, "resolvent bound on every solve", ok,
                    f"{len(reports)} solves")


def test_criterion_06_study_a(study_a):
    rep, elapsed = study_a
    errors = rep.errors
    decreasing = rep.strictly_decreasing
    ratio = rep.reduction_ratio
    ok = decreasing and ratio < 0.5 and elapsed < 300.0
    assert _verdict(
        6, "homogenization study A", ok,
        f"errors={['%.3e' % e for e in errors]} ratio={ratio:.3f} {elapsed:.0f}s")


def test_criterion_07_study_b(study_b):
    ok = True
    parts = []
    for alpha, (rep, _) in sorted(study_b.items()):
        ok &= rep.strictly_decreasing
        parts.append(f"alpha={alpha}: ratio={rep.reduction_ratio:.3f}")
    assert _verdict(7, "study B alpha sensitivity", ok, "; ".join(parts))


def test_criterion_08_study_c(study_c):
    rep, _ = study_c
    ok = rep.strictly_decreasing and rep.lambda_bar is None
    assert _verdict(8, "study C locally periodic field", ok,
                    f"ratio={rep.reduction_ratio:.3f}")


def test_criterion_09_same_limit(grid1024):
    eps_list = (0.25, 0.125, 0.0625)
    rep_osc, _ = _study(1.0, make_product_sine(), grid1024, eps_list)
    rep_const, _ = _study(1.0, make_constant(2.0), grid1024, eps_list)
    identical = np.array_equal(rep_osc.u0.values, rep_const.u0.values)
    ok = identical and rep_osc.strictly_decreasing and rep_const.strictly_decreasing
    assert _verdict(9, "same homogenized limit", ok,
                    f"u0 identical={identical}")


def test_criterion_10_cube_decomposition(grid1024):
    kernel = make_pareto_kernel(1, 1.0)
    coeff = make_cosine_difference()
    u = lambda x: np.exp(-0.5 * x**2)
    phi = lambda x: np.exp(-0.5 * (x - 1.0) ** 2)
    gaps = []
    for eps in (0.125, 0.0625, 0.03125):
        rep = cube_decomposition_check(kernel, coeff, eps, 1.0, u, phi, grid1024)
        gaps.append(rep.gap_rel)
    decreasing = all(b < a for a, b in zip(gaps[:-1], gaps[1:]))
    final_ok = gaps[-1] < 0.05
    const = cube_decomposition_check(kernel, make_constant(2.0), 0.125, 1.0,
                                     u, phi, grid1024)
    const_ok = const.gap_abs == 0.0
    ok = decreasing and final_ok and const_ok
    assert _verdict(
        10, "cube decomposition gap", ok,
        f"gaps={['%.2e' % g for g in gaps]} const={const.gap_abs}")


def test_criterion_11_region_split(grid1024):
    coeff = make_cosine_difference()
    u = GridFunction.from_callable(grid1024, _bump)
    ok = True
    parts = []
    for alpha in (0.5, 1.0, 1.5):
        op = assemble_eps(make_pareto_kernel(1, alpha), coeff, 0.125, grid1024)
        wide = region_split_energy(op, u, u, delta=0.5)
        narrow = region_split_energy(op, u, u, delta=0.25)
        ok &= wide.partition_defect <= 1e-13
        ok &= narrow.partition_defect <= 1e-13
        shrink = narrow.g3 / wide.g3
        lo, hi = 2.0**-alpha / 3.0, 3.0 * 2.0**-alpha
        ok &= lo <= shrink <= hi
        parts.append(f"alpha={alpha}: {shrink:.3f} in [{lo:.3f}, {hi:.3f}]")
    assert _verdict(11, "region split partition and G3 trend", ok,
                    "; ".join(parts))


def test_criterion_12_translation_and_exterior(study_a, grid4096):
    rep, _ = study_a
    f = GridFunction.from_callable(grid4096, _gauss)
    budget = 0.01 * f.norm() ** 2 / M_VALUE**2
    ok = True
    spreads, tails = [], []
    for row in rep.rows:
        tr = translation_energy_check(row.u, eps=row.eps, M=1.0, alpha=1.0,
                                      shifts=(256, 512, 1024))
        spread = tr.ratio_spread("coarse")
        spreads.append(spread)
        ok &= spread < 10.0
        ex = exterior_decay_check(row.u, n_list=(4.0,))
        tails.append(ex.rows[0].tail)
        ok &= ex.rows[0].tail < budget
    assert _verdict(
        12, "translation energy and exterior decay", ok,
        f"spread<= {max(spreads):.2f}; tail max {max(tails):.2e} vs {budget:.2e}")
