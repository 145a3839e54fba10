"""Convergence studies and the supporting diagnostic checks."""

import numpy as np
import pytest

from nlhomog import (
    Grid,
    GridFunction,
    GridMismatchError,
    InvalidParameterError,
    ResolutionError,
    ScaleSeparationError,
    StudyConfig,
    SupportError,
    assemble_eps,
    cube_decomposition_check,
    exterior_cutoff,
    exterior_decay_check,
    make_constant,
    make_cosine_difference,
    make_pareto_kernel,
    make_slow_modulated,
    region_split_energy,
    run_convergence_study,
    translation_energy_check,
)


def _gauss(x, center=0.0, sigma=0.5):
    return np.exp(-0.5 * ((x - center) / sigma) ** 2)


@pytest.fixture(scope="module")
def small_study(grid256, pareto1, cos_coeff):
    cfg = StudyConfig(
        kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid256,
        eps_list=(0.25, 0.125), rhs=_gauss, rhs_support_radius=2.0,
    )
    return run_convergence_study(cfg)


# ---------------------------------------------------------------------------
# convergence study


def test_study_errors_decrease(small_study):
    assert small_study.eps_values == [0.25, 0.125]
    assert all(e > 0.0 for e in small_study.errors)
    assert small_study.strictly_decreasing
    assert small_study.reduction_ratio < 1.0


def test_study_effective_data(small_study):
    assert small_study.lambda_bar == pytest.approx(2.0, abs=1e-9)
    assert small_study.k_values.value_for_sign(1.0) == pytest.approx(0.5, rel=1e-6)
    assert small_study.u0_solve.converged
    assert small_study.u0_solve.resolvent_bound_ok
    for row in small_study.rows:
        assert row.solve.converged
        assert row.solve.resolvent_bound_ok


def test_study_thread_pool_identical(small_study, grid256, pareto1, cos_coeff):
    cfg = StudyConfig(
        kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid256,
        eps_list=(0.25, 0.125), rhs=_gauss, rhs_support_radius=2.0,
    )
    pooled = run_convergence_study(cfg, workers=2)
    assert pooled.errors == small_study.errors
    assert np.array_equal(pooled.u0.values, small_study.u0.values)


def test_study_orders_eps_descending(grid256, pareto1, cos_coeff):
    cfg = StudyConfig(
        kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid256,
        eps_list=(0.125, 0.25), rhs=_gauss,
    )
    rep = run_convergence_study(cfg)
    assert rep.eps_values == [0.25, 0.125]


def test_study_locally_periodic_field(pareto1):
    grid = Grid(dimension=1, half_width=8.0, n=128)
    cfg = StudyConfig(
        kernel=pareto1, coeff=make_slow_modulated(), m=1.0, grid=grid,
        eps_list=(0.25,), rhs=_gauss, lambda_quad_s=32,
    )
    rep = run_convergence_study(cfg)
    assert rep.lambda_bar is None
    assert np.isfinite(rep.errors[0])


def test_study_support_guard(grid256, pareto1, cos_coeff):
    cfg = StudyConfig(
        kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid256,
        eps_list=(0.25,), rhs=_gauss, rhs_support_radius=3.0,
    )
    with pytest.raises(SupportError):
        run_convergence_study(cfg)


def test_study_resolution_guard(grid64, pareto1, cos_coeff):
    cfg = StudyConfig(
        kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid64,
        eps_list=(0.125,), rhs=_gauss,
    )
    with pytest.raises(ResolutionError):
        run_convergence_study(cfg)


def test_study_config_validation(grid256, pareto1, cos_coeff):
    with pytest.raises(InvalidParameterError):
        StudyConfig(kernel=pareto1, coeff=cos_coeff, m=1.0, grid=grid256,
                    eps_list=(), rhs=_gauss)
    with pytest.raises(InvalidParameterError):
        StudyConfig(kernel=pareto1, coeff=cos_coeff, m=0.0, grid=grid256,
                    eps_list=(0.25,), rhs=_gauss)


# ---------------------------------------------------------------------------
# region split


def test_region_split_partitions_exactly(op_small):
    g = op_small.grid
    u = GridFunction.from_callable(g, _gauss)
    phi = GridFunction.from_callable(g, lambda x: _gauss(x, center=1.0))
    split = region_split_energy(op_small, u, phi, delta=0.5)
    assert split.partition_defect <= 1e-13
    assert split.g1 + split.g2 + split.g3 == pytest.approx(
        split.total_pair_form, rel=1e-13)


def test_region_split_nonnegative_on_diagonal_pairing(op_small):
    u = GridFunction.from_callable(op_small.grid, _gauss)
    split = region_split_energy(op_small, u, u, delta=0.5)
    assert split.g1 >= 0.0
    assert split.g2 >= 0.0
    assert split.g3 >= 0.0
    assert split.total_pair_form > 0.0


def test_region_split_delta_range(op_small):
    u = GridFunction.from_callable(op_small.grid, _gauss)
    with pytest.raises(InvalidParameterError):
        region_split_energy(op_small, u, u, delta=0.05)  # below 2h
    with pytest.raises(InvalidParameterError):
        region_split_energy(op_small, u, u, delta=2.5)  # above R/4


def test_region_split_rejects_2d():
    grid = Grid(dimension=2, half_width=2.0, n=8)
    op = assemble_eps(make_pareto_kernel(2, 1.0), make_constant(1.0), 0.5, grid)
    u = GridFunction(grid, np.ones(grid.size))
    with pytest.raises(InvalidParameterError):
        region_split_energy(op, u, u, delta=0.4)


def test_region_split_grid_mismatch(op_small, grid64):
    u = GridFunction(grid64, np.ones(grid64.size))
    with pytest.raises(GridMismatchError):
        region_split_energy(op_small, u, u, delta=0.5)


# ---------------------------------------------------------------------------
# cube decomposition


def test_cube_check_constant_coefficient_exact(pareto1, grid256):
    rep = cube_decomposition_check(
        pareto1, make_constant(2.0), 0.125, 1.0,
        _gauss, lambda x: _gauss(x, center=1.0), grid256)
    assert rep.gap_abs == 0.0
    assert rep.boundary_cubes > 0
    assert rep.boundary_mass >= 0.0


def test_cube_check_small_gap(pareto1, cos_coeff, grid256):
    rep = cube_decomposition_check(
        pareto1, cos_coeff, 0.125, 1.0,
        lambda x: np.exp(-0.5 * x**2),
        lambda x: np.exp(-0.5 * (x - 1.0) ** 2), grid256)
    assert rep.gap_rel < 0.05
    assert rep.lhs != rep.rhs  # oscillation leaves a genuine finite-eps gap


def test_cube_check_scale_separation(pareto1, cos_coeff, grid256):
    with pytest.raises(ScaleSeparationError):
        cube_decomposition_check(pareto1, cos_coeff, 0.25, 1.0,
                                 _gauss, _gauss, grid256)


def test_cube_check_resolution(pareto1, cos_coeff, grid64):
    # h = 0.25 cannot resolve eps = 0.125
    with pytest.raises(ResolutionError):
        cube_decomposition_check(pareto1, cos_coeff, 0.125, 2.0,
                                 _gauss, _gauss, grid64)


def test_cube_check_rejects_locally_periodic(pareto1, grid256):
    with pytest.raises(InvalidParameterError):
        cube_decomposition_check(pareto1, make_slow_modulated(), 0.125, 1.0,
                                 _gauss, _gauss, grid256)


def test_cube_check_rejects_2d(cos_coeff):
    grid = Grid(dimension=2, half_width=2.0, n=8)
    with pytest.raises(InvalidParameterError):
        cube_decomposition_check(make_pareto_kernel(2, 1.0), cos_coeff,
                                 0.125, 1.0, _gauss, _gauss, grid)


def test_cube_check_sum_cap_tightens_region(pareto1, cos_coeff, grid256):
    base = cube_decomposition_check(
        pareto1, cos_coeff, 0.125, 1.0, _gauss,
        lambda x: _gauss(x, center=1.0), grid256)
    capped = cube_decomposition_check(
        pareto1, cos_coeff, 0.125, 1.0, _gauss,
        lambda x: _gauss(x, center=1.0), grid256, sum_cap=6.0)
    assert abs(capped.rhs) <= abs(base.rhs) + 1e-12


# ---------------------------------------------------------------------------
# translation energies


def test_translation_energy_hand_check(grid64):
    u = GridFunction(grid64, np.full(grid64.size, 2.0))
    rep = translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0, shifts=(4,))
    # zero extension clips the last 4 cells: T = h * 4 * 2^2
    assert rep.rows[0].energy == pytest.approx(0.25 * 4 * 4.0, rel=1e-14)


def test_translation_zero_function(grid64):
    u = GridFunction(grid64, np.zeros(grid64.size))
    rep = translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0,
                                   shifts=(2, 4, 8))
    assert all(r.energy == 0.0 for r in rep.rows)
    assert rep.ratio_spread("coarse") == np.inf  # no positive ratios


def test_translation_regime_boundary(grid64):
    u = GridFunction.from_callable(grid64, _gauss)
    rep = translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0,
                                   shifts=(2, 3, 4))
    # 3 M eps = 0.75; shifts of 2 (0.5) are fine, 3 (0.75) and up coarse
    regimes = {r.steps: r.regime for r in rep.rows}
    assert regimes == {2: "fine", 3: "coarse", 4: "coarse"}
    for r in rep.rows:
        base = r.shift if r.regime == "coarse" else 0.25
        assert r.ratio == pytest.approx(r.energy / base, rel=1e-14)


def test_translation_spread_needs_two_rows(grid64):
    u = GridFunction.from_callable(grid64, _gauss)
    rep = translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0, shifts=(4,))
    assert rep.ratio_spread("coarse") == np.inf
    assert rep.ratio_spread("fine") == np.inf


def test_translation_validation(grid64):
    u = GridFunction.from_callable(grid64, _gauss)
    with pytest.raises(InvalidParameterError):
        translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0, shifts=(-1,))
    with pytest.raises(InvalidParameterError):
        translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0, shifts=(64,))
    with pytest.raises(InvalidParameterError):
        translation_energy_check(u, eps=0.0, M=1.0, alpha=1.0)


def test_translation_rejects_2d():
    grid = Grid(dimension=2, half_width=2.0, n=8)
    u = GridFunction(grid, np.ones(grid.size))
    with pytest.raises(InvalidParameterError):
        translation_energy_check(u, eps=0.25, M=1.0, alpha=1.0)


# ---------------------------------------------------------------------------
# exterior decay


def test_exterior_cutoff_profile():
    got = exterior_cutoff(np.array([0.0, 2.0, 3.0, 4.0, 5.0]), 2.0)
    assert np.array_equal(got[:2], [0.0, 0.0])
    assert got[2] == pytest.approx(0.5, rel=1e-14)
    assert np.array_equal(got[3:], [1.0, 1.0])
    # even in x
    assert np.array_equal(exterior_cutoff(np.array([-3.0]), 2.0),
                          exterior_cutoff(np.array([3.0]), 2.0))


def test_exterior_decay_nonincreasing(grid256):
    u = GridFunction.from_callable(grid256, _gauss)
    rep = exterior_decay_check(u, n_list=(2.0, 4.0))
    assert [r.n for r in rep.rows] == [2.0, 4.0]
    assert rep.nonincreasing
    assert rep.rows[0].tail > rep.rows[1].tail > 0.0


def test_exterior_decay_validation(grid256):
    u = GridFunction.from_callable(grid256, _gauss)
    with pytest.raises(InvalidParameterError):
        exterior_decay_check(u, n_list=(8.0,))  # n = R
    with pytest.raises(InvalidParameterError):
        exterior_decay_check(u, n_list=(0.0,))
    grid2 = Grid(dimension=2, half_width=2.0, n=8)
    u2 = GridFunction(grid2, np.ones(grid2.size))
    with pytest.raises(InvalidParameterError):
        exterior_decay_check(u2)
