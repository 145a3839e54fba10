"""Jump kernels and their regularity checks.

A kernel here is a probability density p on R^d (d = 1 or 2), even, with a
heavy polynomial tail.  The checks verify, numerically, the four standing
assumptions behind the homogenization limit:

  H1  p >= 0, p(-z) = p(z), integral of p equals 1;
  H2  two-sided power bounds for |z| >= M: pointwise lower bound
      p(z) >= C1 |z|^(-d-alpha) and annular upper bound
      r^alpha * integral over {r <= |z| <= 2r} of p bounded;
  H3  regular tail attraction: alpha * n^alpha * integral over
      {|z| > n, z/|z| in D} of p converges to an angular density k(D);
  H4  vanishing relative oscillation of unit-cube averages at infinity.

Directions in d=1 carry counting measure on {-1, +1}; in d=2 a direction set
is an arc of the unit circle measured by its length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .quadrature import QuadConfig, integrate_to_infinity, panel_integrate, split_panels

# surface measure of the unit sphere: 2 points (d=1), circle length (d=2)
_SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi}


@dataclass(frozen=True)
class TailDescriptor:
    """Exact power-law tail: p(z) = c * |z|^(-d-alpha) for |z| >= r0."""

    c: float
    r0: float


@dataclass(frozen=True)
class KernelSpec:
    """A jump kernel with the metadata the quadratures need.

    density maps an array of radii (d=1, signed values allowed) or an array
    of points with shape (..., 2) (d=2) to density values.  radial is an
    optional isotropic profile r -> p(|z|=r); all built-ins provide it.
    breakpoints are radii where the density is allowed to be non-smooth.
    M is the radius beyond which the H2/H3 tail structure is claimed.
    """

    dimension: int
    alpha: float
    density: callable
    radial: callable | None
    near_origin_bounded: bool
    M: float
    tail: TailDescriptor | None
    breakpoints: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise InvalidParameterError(f"dimension must be 1 or 2, got {self.dimension}")
        if not 0.0 < self.alpha < 2.0:
            raise InvalidParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.M <= 0.0:
            raise InvalidParameterError(f"M must be positive, got {self.M}")

    @property
    def sphere_measure(self) -> float:
        return _SPHERE_MEASURE[self.dimension]


# ---------------------------------------------------------------------------
# constructors


def make_pareto_kernel(dimension: int, alpha: float, r0: float = 1.0) -> KernelSpec:
    """Pure power-law kernel: zero inside |z| < r0, c|z|^(-d-alpha) outside.

    c is fixed by unit mass: c = alpha * r0^alpha / S_{d-1}, so in d=1
    c = alpha * r0^alpha / 2.
    """
    if r0 <= 0.0:
        raise InvalidParameterError(f"r0 must be positive, got {r0}")
    if dimension not in (1, 2):
        raise InvalidParameterError(f"dimension must be 1 or 2, got {dimension}")
    if not 0.0 < alpha < 2.0:
        raise InvalidParameterError(f"alpha must lie in (0, 2), got {alpha}")
    c = alpha * r0**alpha / _SPHERE_MEASURE[dimension]
    expo = -(dimension + alpha)

    def radial(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        m = r >= r0
        out[m] = c * r[m] ** expo
        return out

    def density(z):
        z = np.asarray(z, dtype=float)
        r = np.abs(z) if dimension == 1 else np.sqrt(np.sum(z * z, axis=-1))
        return radial(r)

    return KernelSpec(
        dimension=dimension,
        alpha=alpha,
        density=density,
        radial=radial,
        near_origin_bounded=True,
        M=r0,
        tail=TailDescriptor(c=c, r0=r0),
        breakpoints=(r0,),
        name="pareto",
        params={"dimension": dimension, "alpha": alpha, "r0": r0},
    )


def make_core_tail_kernel(dimension: int, alpha: float, core_mass: float = 0.5) -> KernelSpec:
    """Uniform core on the unit ball plus a pareto tail from r0 = 1.

    core_mass of the probability sits uniformly on |z| < 1, the rest follows
    c|z|^(-d-alpha) with c = (1 - core_mass) * alpha / S_{d-1}.
    """
    if not 0.0 <= core_mass < 1.0:
        raise InvalidParameterError(f"core_mass must lie in [0, 1), got {core_mass}")
    if dimension not in (1, 2):
        raise InvalidParameterError(f"dimension must be 1 or 2, got {dimension}")
    if not 0.0 < alpha < 2.0:
        raise InvalidParameterError(f"alpha must lie in (0, 2), got {alpha}")
    ball_volume = 2.0 if dimension == 1 else math.pi
    core_density = core_mass / ball_volume
    c = (1.0 - core_mass) * alpha / _SPHERE_MEASURE[dimension]
    expo = -(dimension + alpha)

    def radial(r):
        r = np.asarray(r, dtype=float)
        out = np.full_like(r, core_density)
        m = r >= 1.0
        out[m] = c * r[m] ** expo
        return out

    def density(z):
        z = np.asarray(z, dtype=float)
        r = np.abs(z) if dimension == 1 else np.sqrt(np.sum(z * z, axis=-1))
        return radial(r)

    return KernelSpec(
        dimension=dimension,
        alpha=alpha,
        density=density,
        radial=radial,
        near_origin_bounded=True,
        M=1.0,
        tail=TailDescriptor(c=c, r0=1.0),
        breakpoints=(1.0,),
        name="core_tail",
        params={"dimension": dimension, "alpha": alpha, "core_mass": core_mass},
    )


def make_truncated_kernel(
    dimension: int, alpha: float, r0: float = 1.0, cutoff: float = 10.0
) -> KernelSpec:
    """Negative control: pareto shape on r0 <= |z| <= cutoff, zero beyond.

    Mass is renormalized to 1 so H1 still passes; the missing tail makes the
    H2 lower bound fail at sample radii beyond the cutoff.
    """
    if cutoff <= r0:
        raise InvalidParameterError(f"cutoff must exceed r0, got {cutoff} <= {r0}")
    base = alpha * r0**alpha / _SPHERE_MEASURE[dimension]
    # mass of the untruncated kernel kept by the window: 1 - (r0/cutoff)^alpha
    kept = 1.0 - (r0 / cutoff) ** alpha
    c = base / kept
    expo = -(dimension + alpha)

    def radial(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        m = (r >= r0) & (r <= cutoff)
        out[m] = c * r[m] ** expo
        return out

    def density(z):
        z = np.asarray(z, dtype=float)
        r = np.abs(z) if dimension == 1 else np.sqrt(np.sum(z * z, axis=-1))
        return radial(r)

    return KernelSpec(
        dimension=dimension,
        alpha=alpha,
        density=density,
        radial=radial,
        near_origin_bounded=True,
        M=r0,
        tail=None,
        breakpoints=(r0, cutoff),
        name="truncated_pareto",
        params={"dimension": dimension, "alpha": alpha, "r0": r0, "cutoff": cutoff},
    )


# ---------------------------------------------------------------------------
# radial integration helpers


def _shell_density(kernel: KernelSpec, quad: QuadConfig):
    """Return f(r) with integral over {a <= |z| <= b} = int_a^b f(r) dr."""
    if kernel.dimension == 1:
        dens = kernel.density

        def f(r):
            return dens(r) + dens(-r)

        if kernel.radial is not None:
            rad = kernel.radial

            def f(r):  # noqa: F811 - isotropic fast path
                return 2.0 * rad(r)

        return f

    # d=2: angular average times circumference, uniform rule in theta
    n_theta = quad.n_theta
    theta = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    ct, st = np.cos(theta), np.sin(theta)
    if kernel.radial is not None:
        rad = kernel.radial

        def f(r):
            return 2.0 * math.pi * np.asarray(r) * rad(r)

        return f
    dens = kernel.density

    def f(r):
        r = np.asarray(r, dtype=float)
        pts = np.stack(
            [r[..., None] * ct, r[..., None] * st], axis=-1
        )  # (..., n_theta, 2)
        return 2.0 * math.pi * r * np.mean(dens(pts), axis=-1)

    return f


def _inner_edges(kernel: KernelSpec, stop: float) -> np.ndarray:
    """Panel edges on [0, stop] with dyadic refinement and kernel breakpoints."""
    first = min([b for b in kernel.breakpoints if b > 0.0], default=stop)
    first = min(first, stop)
    edges = [0.0, first]
    t = first
    while t < stop:
        t = min(2.0 * t, stop)
        edges.append(t)
    return split_panels(np.array(edges), kernel.breakpoints)


def _tail_mass_analytic(kernel: KernelSpec, start: float) -> float:
    """Closed-form integral of the descriptor tail over |z| >= start."""
    t = kernel.tail
    return t.c * kernel.sphere_measure * start ** (-kernel.alpha) / kernel.alpha


def shell_mass(kernel: KernelSpec, a: float, b: float, quad: QuadConfig | None = None) -> float:
    """Integral of p over the annulus a <= |z| <= b."""
    quad = quad or QuadConfig()
    if b <= a:
        return 0.0
    f = _shell_density(kernel, quad)
    edges = split_panels(np.array([a, b]), kernel.breakpoints)
    # keep panel aspect ratio <= 2 so Gauss stays in its comfort zone
    refined = [edges[0]]
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = lo
        while t < hi:
            t = min(max(2.0 * t, lo + (hi - lo) * 1e-12), hi)
            refined.append(t)
    edges = np.array(refined)
    vals = panel_integrate(f, edges[:-1], edges[1:], quad.nodes_per_panel)
    return float(np.sum(vals))


def tail_mass(kernel: KernelSpec, R: float, quad: QuadConfig | None = None) -> float:
    """Integral of p over |z| > R; analytic when the descriptor covers it."""
    quad = quad or QuadConfig()
    if R < 0.0:
        raise InvalidParameterError(f"R must be nonnegative, got {R}")
    t = kernel.tail
    if t is not None:
        if R >= t.r0:
            return _tail_mass_analytic(kernel, R)
        return shell_mass(kernel, R, t.r0, quad) + _tail_mass_analytic(kernel, t.r0)
    f = _shell_density(kernel, quad)
    start = max(R, 1e-12)
    far = max([b for b in kernel.breakpoints] + [start])
    inner = shell_mass(kernel, R, far, quad) if far > R else 0.0
    return inner + integrate_to_infinity(f, far, quad)


def mass(kernel: KernelSpec, quad: QuadConfig | None = None) -> float:
    """Total mass of p, dyadic shells plus analytic tail completion."""
    quad = quad or QuadConfig()
    t = kernel.tail
    stop = t.r0 if t is not None else max(list(kernel.breakpoints) + [kernel.M])
    f = _shell_density(kernel, quad)
    edges = _inner_edges(kernel, stop)
    inner = float(np.sum(panel_integrate(f, edges[:-1], edges[1:], quad.nodes_per_panel)))
    if t is not None:
        return inner + _tail_mass_analytic(kernel, stop)
    return inner + integrate_to_infinity(f, stop, quad)


# ---------------------------------------------------------------------------
# sample clouds


def _sample_points(kernel: KernelSpec, radii: np.ndarray) -> np.ndarray:
    """Deterministic evaluation points on the given radii (all directions)."""
    radii = np.asarray(radii, dtype=float)
    if kernel.dimension == 1:
        return np.concatenate([radii, -radii])
    # 16 angles, offset so no sample sits on a coordinate axis
    theta = (np.arange(16) + 0.37) * (2.0 * math.pi / 16)
    ct, st = np.cos(theta), np.sin(theta)
    return np.stack(
        [np.outer(radii, ct).ravel(), np.outer(radii, st).ravel()], axis=-1
    )


def _default_radii(kernel: KernelSpec) -> np.ndarray:
    # start at 2M: radius M itself can fall on a structural boundary of the
    # density, where directional roundoff (d=2) flips the indicator
    return kernel.M * np.array([2.0, 4.0, 8.0, 16.0, 32.0, 64.0])


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckResult:
    """Verdict plus the numbers it was based on."""

    name: str
    passed: bool
    details: dict


def check_h1(kernel: KernelSpec, quad: QuadConfig | None = None,
             mass_tol: float = 1e-6, symmetry_tol: float = 1e-12) -> CheckResult:
    """Unit mass, evenness and nonnegativity on a deterministic sample cloud."""
    quad = quad or QuadConfig()
    total = mass(kernel, quad)
    radii = np.concatenate([_default_radii(kernel), kernel.M * np.array([0.25, 0.5, 0.75])])
    pts = _sample_points(kernel, radii)
    vals = kernel.density(pts)
    neg_pts = -pts
    defect = float(np.max(np.abs(vals - kernel.density(neg_pts))))
    min_val = float(np.min(vals))
    passed = (abs(total - 1.0) <= mass_tol) and (defect <= symmetry_tol) and (min_val >= 0.0)
    return CheckResult(
        name="H1",
        passed=bool(passed),
        details={
            "mass": total,
            "mass_defect": abs(total - 1.0),
            "symmetry_defect": defect,
            "min_sample": min_val,
        },
    )


def check_lower_bound(kernel: KernelSpec, radii=None) -> CheckResult:
    """H2 lower bound: c1 = min over samples of p(z) * |z|^(d+alpha) > 0."""
    radii = np.asarray(radii, dtype=float) if radii is not None else _default_radii(kernel)
    if np.any(radii < kernel.M):
        raise InvalidParameterError("H2 samples must satisfy |z| >= M")
    pts = _sample_points(kernel, radii)
    r = np.abs(pts) if kernel.dimension == 1 else np.sqrt(np.sum(pts * pts, axis=-1))
    scaled = kernel.density(pts) * r ** (kernel.dimension + kernel.alpha)
    c1 = float(np.min(scaled))
    return CheckResult(
        name="H2_lower",
        passed=bool(c1 > 0.0),
        details={"c1_estimate": c1, "radii": [float(t) for t in radii]},
    )


def check_annular_bound(kernel: KernelSpec, radii=None,
                        quad: QuadConfig | None = None) -> CheckResult:
    """H2 upper bound: values r^alpha * mass(r <= |z| <= 2r), max over r."""
    quad = quad or QuadConfig()
    radii = np.asarray(radii, dtype=float) if radii is not None else _default_radii(kernel)
    if np.any(radii < kernel.M):
        raise InvalidParameterError("H2 samples must satisfy |z| >= M")
    t = kernel.tail
    values = []
    for r in radii:
        if t is not None and r >= t.r0:
            # closed form: r^alpha * c * S * (r^-alpha - (2r)^-alpha) / alpha
            v = t.c * kernel.sphere_measure * (1.0 - 2.0 ** (-kernel.alpha)) / kernel.alpha
        else:
            v = float(r**kernel.alpha * shell_mass(kernel, r, 2.0 * r, quad))
        values.append(float(v))
    c2 = max(values)
    return CheckResult(
        name="H2_upper",
        passed=bool(np.isfinite(c2)),
        details={"c2_estimate": c2, "values": values, "radii": [float(t) for t in radii]},
    )


@dataclass(frozen=True)
class KEstimate:
    """Tail attraction estimates per direction set.

    table[i, j] = alpha * n_j^alpha * tailintegral(direction i, n_j) / |D_i|;
    limits are Richardson extrapolations from the last two columns assuming
    an n^-alpha correction.
    """

    directions: tuple
    n_list: tuple
    table: np.ndarray
    limits: np.ndarray
    converged: np.ndarray
    rel_gaps: np.ndarray

    @property
    def k_min(self) -> float:
        return float(np.min(self.limits))

    @property
    def k_max(self) -> float:
        return float(np.max(self.limits))


def _direction_tail_integral(kernel: KernelSpec, direction, n: float,
                             quad: QuadConfig) -> float:
    """Integral of p over {|z| > n, z/|z| in D}."""
    t = kernel.tail
    if kernel.dimension == 1:
        sign = float(direction)

        def f(r):
            return kernel.density(sign * np.asarray(r))

        if t is not None and n >= t.r0:
            return t.c * n ** (-kernel.alpha) / kernel.alpha
        if t is not None:
            edges = split_panels(np.array([n, t.r0]), kernel.breakpoints)
            inner = float(np.sum(panel_integrate(f, edges[:-1], edges[1:], quad.nodes_per_panel)))
            return inner + t.c * t.r0 ** (-kernel.alpha) / kernel.alpha
        return integrate_to_infinity(f, n, quad)

    theta_lo, theta_hi = direction
    arc = theta_hi - theta_lo
    if t is not None and n >= t.r0 and kernel.radial is not None:
        return arc * t.c * n ** (-kernel.alpha) / kernel.alpha
    n_ang = max(quad.n_theta // 4, 8)
    th = theta_lo + (np.arange(n_ang) + 0.5) * (arc / n_ang)
    ct, st = np.cos(th), np.sin(th)
    dens = kernel.density

    def f(r):
        r = np.asarray(r, dtype=float)
        pts = np.stack([r[..., None] * ct, r[..., None] * st], axis=-1)
        return arc * r * np.mean(dens(pts), axis=-1)

    return integrate_to_infinity(f, n, quad)


def _direction_measure(kernel: KernelSpec, direction) -> float:
    if kernel.dimension == 1:
        return 1.0  # counting measure on {-1, +1}
    theta_lo, theta_hi = direction
    return theta_hi - theta_lo


def default_directions(dimension: int, n_sectors: int = 8) -> tuple:
    """{-1,+1} in d=1; a partition of the circle into arcs in d=2."""
    if dimension == 1:
        return (1.0, -1.0)
    edges = np.linspace(0.0, 2.0 * math.pi, n_sectors + 1)
    return tuple((float(a), float(b)) for a, b in zip(edges[:-1], edges[1:]))


def estimate_k(kernel: KernelSpec, n_list=(64.0, 256.0, 1024.0), directions=None,
               quad: QuadConfig | None = None, rel_tol: float = 0.01) -> KEstimate:
    """Angular tail density estimates k_hat(D, n) with extrapolated limits."""
    quad = quad or QuadConfig()
    n_list = tuple(float(n) for n in n_list)
    if len(n_list) < 2:
        raise InvalidParameterError("n_list needs at least two levels")
    if any(b <= a for a, b in zip(n_list[:-1], n_list[1:])):
        raise InvalidParameterError("n_list must be strictly increasing")
    if any(n < kernel.M for n in n_list):
        raise InvalidParameterError("tail radii must satisfy n >= M")
    directions = directions if directions is not None else default_directions(kernel.dimension)
    a = kernel.alpha
    table = np.empty((len(directions), len(n_list)))
    for i, D in enumerate(directions):
        meas = _direction_measure(kernel, D)
        for j, n in enumerate(n_list):
            table[i, j] = a * n**a * _direction_tail_integral(kernel, D, n, quad) / meas
    k1, k2 = table[:, -2], table[:, -1]
    ratio = (n_list[-1] / n_list[-2]) ** a
    limits = k2 + (k2 - k1) / (ratio - 1.0)
    gaps = np.abs(k2 - k1) / np.maximum(np.abs(k2), 1e-300)
    converged = gaps <= rel_tol
    return KEstimate(
        directions=tuple(directions),
        n_list=n_list,
        table=table,
        limits=limits,
        converged=converged,
        rel_gaps=gaps,
    )


def check_h3(kernel: KernelSpec, quad: QuadConfig | None = None,
             rel_tol: float = 0.01) -> CheckResult:
    """Tail attraction verdict: converged k_hat sequences with positive limit."""
    est = estimate_k(kernel, quad=quad, rel_tol=rel_tol)
    positive = est.k_min > 0.0
    passed = bool(np.all(est.converged) and positive)
    return CheckResult(
        name="H3",
        passed=passed,
        details={
            "k_limits": [float(v) for v in est.limits],
            "rel_gaps": [float(v) for v in est.rel_gaps],
            "k_min": est.k_min,
            "k_max": est.k_max,
        },
    )


# ---------------------------------------------------------------------------
# H4: oscillation of unit-cube averages


def _cube_average(kernel: KernelSpec, center, order: int) -> float:
    """Average of p over the unit cube centered at `center`."""
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5
    if kernel.dimension == 1:
        c = float(center)
        edges = split_panels(np.array([c - half, c + half]), kernel.breakpoints)
        vals = panel_integrate(lambda r: kernel.density(r), edges[:-1], edges[1:], order)
        return float(np.sum(vals))
    cx, cy = float(center[0]), float(center[1])
    gx = cx + half * x
    gy = cy + half * x
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)
    vals = kernel.density(pts)
    return float(np.einsum("i,j,ij->", w, w, vals)) * half * half


def _cube_avg_abs_dev(kernel: KernelSpec, center, ref: float, order: int) -> float:
    """Average of |p - ref| over the unit cube centered at `center`."""
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5
    if kernel.dimension == 1:
        c = float(center)
        edges = split_panels(np.array([c - half, c + half]), kernel.breakpoints)
        vals = panel_integrate(
            lambda r: np.abs(kernel.density(r) - ref), edges[:-1], edges[1:], order
        )
        return float(np.sum(vals))
    cx, cy = float(center[0]), float(center[1])
    gx = cx + half * x
    gy = cy + half * x
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)
    vals = np.abs(kernel.density(pts) - ref)
    return float(np.einsum("i,j,ij->", w, w, vals)) * half * half


def _lattice_offsets(dimension: int) -> np.ndarray:
    """Integer offsets v with |v| <= sqrt(d), excluding 0 handled separately."""
    if dimension == 1:
        return np.array([-1.0, 0.0, 1.0])
    vs = [(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)]
    return np.array([v for v in vs if v[0] ** 2 + v[1] ** 2 <= 2.0], dtype=float)


@dataclass(frozen=True)
class PhiEstimate:
    """Sampled oscillation functional phi_hat at the requested radii."""

    r_list: tuple
    values: np.ndarray
    skipped_cubes: int


def oscillation_phi(kernel: KernelSpec, r_list=(16.0, 32.0, 64.0), order: int = 24,
                    degenerate_tol: float = 1e-300) -> PhiEstimate:
    """Sampled sup of relative cube-average deviations at radii >= r.

    For each r, cube centers z sit on the shells |z| = r and |z| = 2r; the
    comparison centers z' run over z plus integer offsets with |v| <= sqrt(d).
    Cubes with vanishing average (outside the support) are skipped and
    counted.
    """
    r_list = tuple(float(r) for r in r_list)
    values = []
    skipped = 0
    offsets = _lattice_offsets(kernel.dimension)
    for r in r_list:
        best = 0.0
        any_cube = False
        for radius in (r, 2.0 * r):
            if kernel.dimension == 1:
                centers = [radius, -radius]
            else:
                theta = (np.arange(8) + 0.29) * (math.pi / 4.0)
                centers = [
                    (radius * math.cos(t), radius * math.sin(t)) for t in theta
                ]
            for z in centers:
                base = _cube_average(kernel, z, order)
                if base <= degenerate_tol:
                    skipped += 1
                    continue
                any_cube = True
                for v in offsets:
                    zp = z + v if kernel.dimension == 1 else (z[0] + v[0], z[1] + v[1])
                    ref = _cube_average(kernel, zp, order)
                    dev = _cube_avg_abs_dev(kernel, z, ref, order) / base
                    best = max(best, dev)
        values.append(best if any_cube else math.nan)
    return PhiEstimate(r_list=r_list, values=np.array(values), skipped_cubes=skipped)


def check_h4(kernel: KernelSpec, r_list=(16.0, 32.0, 64.0), order: int = 24) -> CheckResult:
    """Oscillation decay verdict: phi_hat finite and strictly decreasing."""
    est = oscillation_phi(kernel, r_list=r_list, order=order)
    finite = bool(np.all(np.isfinite(est.values)))
    decreasing = finite and bool(np.all(np.diff(est.values) < 0.0))
    return CheckResult(
        name="H4",
        passed=finite and decreasing,
        details={
            "r_list": list(est.r_list),
            "phi": [float(v) for v in est.values],
            "skipped_cubes": est.skipped_cubes,
        },
    )


# ---------------------------------------------------------------------------
# combined report


@dataclass(frozen=True)
class HypothesisReport:
    """Verdicts for the requested hypotheses on one kernel."""

    kernel_name: str
    results: dict

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def as_dict(self) -> dict:
        return {
            "kernel": self.kernel_name,
            "all_passed": self.all_passed,
            "checks": {
                key: {"passed": r.passed, "details": r.details}
                for key, r in self.results.items()
            },
        }


def verify_hypotheses(kernel: KernelSpec, which=("H1", "H2", "H3", "H4"),
                      quad: QuadConfig | None = None) -> HypothesisReport:
    """Run the requested hypothesis checks and collect the verdicts."""
    quad = quad or QuadConfig()
    results: dict[str, CheckResult] = {}
    for name in which:
        if name == "H1":
            results["H1"] = check_h1(kernel, quad)
        elif name == "H2":
            lower = check_lower_bound(kernel)
            upper = check_annular_bound(kernel, quad=quad)
            results["H2_lower"] = lower
            results["H2_upper"] = upper
        elif name == "H3":
            results["H3"] = check_h3(kernel, quad)
        elif name == "H4":
            results["H4"] = check_h4(kernel)
        else:
            raise InvalidParameterError(f"unknown hypothesis {name!r}")
    return HypothesisReport(kernel_name=kernel.name, results=results)
