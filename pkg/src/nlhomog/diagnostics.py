"""Convergence studies and proof-machinery diagnostics (data emission only).

run_convergence_study sweeps eps and measures ||u^eps - u^0|| against the
homogenized solve.  The remaining checks quantify, on actual discrete
operators, the estimates the limit theorem rests on:

  region split      the energy double sum split over
                    G1 = {|x-y| > delta, |x|+|y| < 1/delta},
                    G2 = {|x-y| <= delta, |x|+|y| < 1/delta},
                    G3 = {|x|+|y| >= 1/delta}
                    (ties: G2 owns |x-y| = delta, G3 owns |x|+|y| = 1/delta);
  cube check        the coefficient-replacement gap on the far-off-diagonal
                    region, cube by cube on the eps-lattice, plus the kernel
                    mass sitting on boundary-straddling cubes;
  translation       shifted-difference energies against |h|^alpha (coarse
                    shifts) or eps^alpha (fine shifts);
  exterior decay    smooth-cutoff tail masses of a solution.

All region diagnostics are d=1 (the d=2 analogs are out of scope).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (
    EffectiveField,
    LocallyPeriodicCoefficient,
    PeriodicCoefficient,
    effective_lambda,
)
from .discretization import (
    AngularDensity,
    AssemblyConfig,
    Grid,
    GridFunction,
    NonlocalOperator,
    _same_grid,
    _signed_differences,
    assemble_effective,
    assemble_eps,
)
from .errors import (
    InvalidParameterError,
    ResolutionError,
    ScaleSeparationError,
    SupportError,
)
from .kernels import KernelSpec, estimate_k
from .solver import SolveConfig, SolveReport, resolvent_solve


# ---------------------------------------------------------------------------
# eps-sweep convergence study


@dataclass(frozen=True)
class StudyConfig:
    """One homogenization experiment: kernel, coefficient, box, sweep."""

    kernel: KernelSpec
    coeff: object
    m: float
    grid: Grid
    eps_list: tuple
    rhs: callable
    rhs_support_radius: float | None = None
    assembly: AssemblyConfig = field(default_factory=AssemblyConfig)
    solver_rel_tol: float = 1e-10
    lambda_quad_s: int = 64
    k_n_list: tuple = (64.0, 256.0, 1024.0)

    def __post_init__(self):
        if not self.eps_list:
            raise InvalidParameterError("eps_list must be nonempty")
        if self.m <= 0.0:
            raise InvalidParameterError(f"m must be positive, got {self.m}")


@dataclass
class StudyRow:
    eps: float
    error: float
    u: GridFunction
    solve: SolveReport


@dataclass
class ConvergenceReport:
    """Sweep rows (descending eps) plus the shared homogenized solve."""

    rows: list
    u0: GridFunction
    u0_solve: SolveReport
    lambda_bar: float | None
    k_values: AngularDensity
    m: float

    @property
    def eps_values(self) -> list:
        return [r.eps for r in self.rows]

    @property
    def errors(self) -> list:
        return [r.error for r in self.rows]

    @property
    def strictly_decreasing(self) -> bool:
        e = self.errors
        return all(b < a for a, b in zip(e[:-1], e[1:]))

    @property
    def reduction_ratio(self) -> float:
        """error at the finest eps over error at the coarsest."""
        e = self.errors
        return e[-1] / e[0]


def run_convergence_study(cfg: StudyConfig, workers: int = 1) -> ConvergenceReport:
    """Assemble, solve and compare across the eps sweep.

    The homogenized operator is built once from the estimated angular tail
    density and the cell-averaged coefficient (a field for locally periodic
    coefficients), then each eps row is assembled, solved and measured.
    workers > 1 runs the eps rows on a thread pool (each row holds a dense
    operator, so memory grows with the pool size); results are identical
    either way.
    """
    grid = cfg.grid
    eps_sorted = sorted(set(float(e) for e in cfg.eps_list), reverse=True)
    if grid.h > min(eps_sorted):
        raise ResolutionError(
            f"h={grid.h} does not resolve the finest eps={min(eps_sorted)}"
        )
    if cfg.rhs_support_radius is not None:
        cap = grid.half_width / 4.0
        if cfg.rhs_support_radius > cap * (1.0 + 1e-12):
            raise SupportError(
                f"rhs support radius {cfg.rhs_support_radius} exceeds R/4 = {cap}"
            )
    f = GridFunction.from_callable(grid, cfg.rhs)
    est = estimate_k(cfg.kernel, n_list=cfg.k_n_list)
    kang = AngularDensity.from_estimate(est)
    if isinstance(cfg.coeff, LocallyPeriodicCoefficient):
        lam_eff = EffectiveField(cfg.coeff, s=cfg.lambda_quad_s)
        lam_scalar = None
    else:
        lam_scalar = effective_lambda(cfg.coeff, s=cfg.lambda_quad_s)
        lam_eff = lam_scalar
    op0 = assemble_effective(kang, lam_eff, cfg.kernel.alpha, grid, cfg.assembly)
    scfg = SolveConfig(m=cfg.m, rel_tol=cfg.solver_rel_tol)
    rep0 = resolvent_solve(op0, f, scfg)

    def one_row(eps: float) -> StudyRow:
        op = assemble_eps(cfg.kernel, cfg.coeff, eps, grid, cfg.assembly)
        rep = resolvent_solve(op, f, scfg)
        diff = GridFunction(grid, rep.u.values - rep0.u.values)
        return StudyRow(eps=eps, error=diff.norm(), u=rep.u, solve=rep)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_row, eps_sorted))
    else:
        rows = [one_row(eps) for eps in eps_sorted]
    return ConvergenceReport(
        rows=rows, u0=rep0.u, u0_solve=rep0, lambda_bar=lam_scalar,
        k_values=kang, m=cfg.m,
    )


# ---------------------------------------------------------------------------
# G-region split of the energy double sum


@dataclass(frozen=True)
class RegionSplit:
    delta: float
    g1: float
    g2: float
    g3: float
    total_pair_form: float

    @property
    def partition_defect(self) -> float:
        s = self.g1 + self.g2 + self.g3
        return abs(s - self.total_pair_form) / max(abs(self.total_pair_form), 1e-300)


def region_split_energy(op: NonlocalOperator, u: GridFunction, phi: GridFunction,
                        delta: float) -> RegionSplit:
    """Split 1/2 sum_ij w_ij (u_j-u_i)(phi_j-phi_i) h^d by pair membership.

    Valid for 2h < delta < R/4 in d=1.  The killing term is diagonal and not
    part of the pair sum.
    """
    _same_grid(op.grid, u.grid)
    _same_grid(op.grid, phi.grid)
    g = op.grid
    if g.dimension != 1:
        raise InvalidParameterError("region split is defined for d=1 grids")
    if not (2.0 * g.h < delta < g.half_width / 4.0):
        raise InvalidParameterError(
            f"delta={delta} outside (2h, R/4) = ({2*g.h}, {g.half_width/4})"
        )
    x = g.centers()
    D = np.abs(x[:, None] - x[None, :])
    S = np.abs(x)[:, None] + np.abs(x)[None, :]
    hd = g.h
    du = u.values[None, :] - u.values[:, None]
    dphi = phi.values[None, :] - phi.values[:, None]
    terms = op.weights * du * dphi
    inv = 1.0 / delta
    g3_mask = S >= inv
    g2_mask = ~g3_mask & (D <= delta)
    g1_mask = ~g3_mask & (D > delta)
    c1 = 0.5 * hd * float(np.sum(terms[g1_mask]))
    c2 = 0.5 * hd * float(np.sum(terms[g2_mask]))
    c3 = 0.5 * hd * float(np.sum(terms[g3_mask]))
    total = 0.5 * hd * float(np.sum(terms))
    return RegionSplit(delta=delta, g1=c1, g2=c2, g3=c3, total_pair_form=total)


# ---------------------------------------------------------------------------
# cube-decomposition (coefficient replacement) check


@dataclass(frozen=True)
class CubeCheckReport:
    eps: float
    delta: float
    lhs: float
    rhs: float
    boundary_mass: float
    boundary_cubes: int

    @property
    def gap_abs(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def gap_rel(self) -> float:
        return self.gap_abs / max(abs(self.rhs), 1e-300)


def cube_decomposition_check(kernel: KernelSpec, coeff: PeriodicCoefficient,
                             eps: float, delta: float, u: callable,
                             phi: callable, grid: Grid,
                             sum_cap: float | None = None,
                             lambda_s: int = 64,
                             gauss_order: int = 6) -> CubeCheckReport:
    """Coefficient-replacement gap on the far-off-diagonal pair region.

    lhs and rhs are the double integrals of eps^{-1-alpha} p((x-y)/eps)
    u(x) phi(y) weighted by Lambda(x/eps, y/eps) and by Lambda_bar
    respectively, over the cell pairs with |x_i - x_j| > delta (and
    |x_i| + |x_j| < sum_cap when given; by default the box itself is the
    outer cutoff).  Both sides use a tensor Gauss rule inside each cell
    pair: the coefficient oscillates at scale eps, and center sampling
    would alias it on the grid lattice instead of integrating it out.
    boundary_mass is the rescaled kernel mass carried by eps-lattice cubes
    straddling the region boundary, and boundary_cubes counts them.

    u and phi are callables (test-function profiles).  Requires a periodic
    (or constant) coefficient, d=1, h <= eps and eps <= delta / 8.
    """
    g = grid
    if g.dimension != 1:
        raise InvalidParameterError("cube check is defined for d=1 grids")
    if isinstance(coeff, LocallyPeriodicCoefficient):
        raise InvalidParameterError("cube check needs a periodic coefficient")
    if eps > delta / 8.0:
        raise ScaleSeparationError(f"need eps <= delta/8, got eps={eps}, delta={delta}")
    if g.h > eps:
        raise ResolutionError(f"h={g.h} does not resolve eps={eps}")
    lam_bar = effective_lambda(coeff, s=lambda_s)
    x = g.centers()
    D = np.abs(x[:, None] - x[None, :])
    scale = eps ** (-(1.0 + kernel.alpha))
    mask = D > delta
    if sum_cap is not None:
        S = np.abs(x)[:, None] + np.abs(x)[None, :]
        mask &= S < sum_cap
    nodes, wts = np.polynomial.legendre.leggauss(int(gauss_order))
    offs = 0.5 * g.h * nodes
    w1 = 0.5 * g.h * wts  # sums to h
    n = g.n
    acc_base = np.zeros((n, n))
    acc_p = np.zeros((n, n))
    acc_lam = None if coeff.is_constant else np.zeros((n, n))
    for a in range(len(offs)):
        xa = x + offs[a]
        ua = u(xa)
        for b in range(len(offs)):
            yb = x + offs[b]
            Z = xa[:, None] - yb[None, :]
            pv = kernel.density(Z / eps)
            w2 = w1[a] * w1[b]
            acc_p += w2 * pv
            block = w2 * pv * (ua[:, None] * phi(yb)[None, :])
            acc_base += block
            if acc_lam is not None:
                block *= coeff.evaluate((xa / eps)[:, None], (yb / eps)[None, :])
                acc_lam += block
    base_sum = scale * float(np.sum(acc_base[mask]))
    if coeff.is_constant:
        # factor the scalar out so a constant coefficient gives gap 0 exactly
        lhs = float(coeff.value) * base_sum
    else:
        lhs = scale * float(np.sum(acc_lam[mask]))
    rhs = lam_bar * base_sum
    # eps-lattice cubes in the (x, y) pair plane: index k = round(x/eps)
    kx = np.rint(x / eps)
    cx = eps * kx
    C1 = cx[:, None] + 0.0 * cx[None, :]
    C2 = 0.0 * cx[:, None] + cx[None, :]
    cd = np.abs(C1 - C2)
    min_diff = np.maximum(cd - eps, 0.0)
    max_diff = cd + eps
    inside = min_diff > delta
    outside = max_diff <= delta
    if sum_cap is not None:
        cs_min = np.maximum(np.abs(C1) - eps / 2.0, 0.0) + np.maximum(np.abs(C2) - eps / 2.0, 0.0)
        cs_max = np.abs(C1) + np.abs(C2) + eps
        inside &= cs_max < sum_cap
        outside |= cs_min >= sum_cap
    straddle = ~inside & ~outside
    boundary_mass = scale * float(np.sum(acc_p[straddle]))
    # count distinct straddling cubes, not pairs
    ki = np.broadcast_to(kx[:, None].astype(np.int64), straddle.shape)[straddle]
    kj = np.broadcast_to(kx[None, :].astype(np.int64), straddle.shape)[straddle]
    boundary_cubes = int(np.unique(np.stack([ki, kj], axis=1), axis=0).shape[0])
    return CubeCheckReport(
        eps=eps, delta=delta, lhs=lhs, rhs=rhs,
        boundary_mass=boundary_mass, boundary_cubes=boundary_cubes,
    )


# ---------------------------------------------------------------------------
# translation energies


@dataclass(frozen=True)
class TranslationRow:
    steps: int
    shift: float
    energy: float
    regime: str  # "coarse" (|h| >= 3 M eps) or "fine"
    ratio: float  # energy / |h|^alpha, or energy / eps^alpha in the fine regime


@dataclass(frozen=True)
class TranslationReport:
    eps: float
    M: float
    alpha: float
    rows: tuple

    def regime_rows(self, regime: str) -> list:
        return [r for r in self.rows if r.regime == regime]

    def ratio_spread(self, regime: str = "coarse") -> float:
        """max/min of energy/|h|^alpha over the regime; inf if under 2 rows."""
        ratios = [r.ratio for r in self.regime_rows(regime) if r.ratio > 0.0]
        if len(ratios) < 2:
            return math.inf
        return max(ratios) / min(ratios)


def translation_energy_check(u: GridFunction, eps: float, M: float, alpha: float,
                             shifts=(8, 16, 32, 64)) -> TranslationReport:
    """Shifted-difference energies sum (u(x+h) - u(x))^2 h_grid, zero-extended.

    Shifts are integer numbers of grid steps (d=1).  Each row reports the
    energy normalized by |h|^alpha when |h| >= 3 M eps and by eps^alpha
    otherwise.
    """
    g = u.grid
    if g.dimension != 1:
        raise InvalidParameterError("translation check is defined for d=1 grids")
    if eps <= 0.0 or M <= 0.0:
        raise InvalidParameterError("eps and M must be positive")
    rows = []
    vals = u.values
    for s in shifts:
        s = int(s)
        if s < 0 or s >= g.n:
            raise InvalidParameterError(f"shift {s} outside [0, n)")
        shifted = np.zeros_like(vals)
        if s == 0:
            shifted[:] = vals
        else:
            shifted[:-s] = vals[s:]  # u(x + s h), zero beyond the box
        T = float(g.h * np.sum((shifted - vals) ** 2))
        hphys = s * g.h
        if hphys >= 3.0 * M * eps:
            rows.append(TranslationRow(s, hphys, T, "coarse", T / hphys**alpha))
        else:
            rows.append(TranslationRow(s, hphys, T, "fine", T / eps**alpha))
    return TranslationReport(eps=eps, M=M, alpha=alpha, rows=tuple(rows))


# ---------------------------------------------------------------------------
# exterior decay


def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def exterior_cutoff(x: np.ndarray, n: float) -> np.ndarray:
    """psi_n(x) = psi(x/n): 0 on B_n, 1 outside B_2n, smooth in between."""
    r = np.abs(np.asarray(x, dtype=float))
    return _smoothstep(r / n - 1.0)


@dataclass(frozen=True)
class ExteriorRow:
    n: float
    tail: float


@dataclass(frozen=True)
class ExteriorReport:
    rows: tuple

    @property
    def nonincreasing(self) -> bool:
        t = [r.tail for r in self.rows]
        return all(b <= a for a, b in zip(t[:-1], t[1:]))


def exterior_decay_check(u: GridFunction, n_list=(2.0, 4.0)) -> ExteriorReport:
    """Cutoff tail masses integral psi_n u^2 for increasing n (d=1).

    Each n must satisfy 0 < n < R; psi_n vanishes inside B_n so the tail is
    the mass of u beyond radius n, smoothly weighted.
    """
    g = u.grid
    if g.dimension != 1:
        raise InvalidParameterError("exterior check is defined for d=1 grids")
    n_sorted = sorted(float(n) for n in n_list)
    rows = []
    x = g.centers()
    for n in n_sorted:
        if not 0.0 < n < g.half_width:
            raise InvalidParameterError(f"cutoff scale n={n} outside (0, R)")
        psi = exterior_cutoff(x, n)
        rows.append(ExteriorRow(n=n, tail=float(g.h * np.sum(psi * u.values**2))))
    return ExteriorReport(rows=tuple(rows))
