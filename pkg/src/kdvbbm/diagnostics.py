"""Numerical checks of the inequalities and scaling laws behind the decay bound.

Two kinds of check live here:

* brute-force sweeps of pointwise inequalities (weight comparisons, the
  cosh-product and cosh-difference bounds); these must show no violation;
* ratio and slope diagnostics for estimates with unspecified constants
  (nonlinear estimate, trilinear estimate, almost conservation, radius decay),
  where the constant is measured and only its finiteness and stability are
  checked.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import (
    ModelParams,
    analytic_datum,
    energy_E_sigma,
    h2_norm,
    operators,
    random_ensemble,
)
from .solver import SolverConfig, Trajectory, evolve, local_timespan
from .spectral import GevreyParams, SpectralField, SpectralGrid, log_cosh, weighted_norm

DEVIATION_FLOOR = 1e-13


class InsufficientDataError(ValueError):
    pass


@dataclass
class RatioReport:
    name: str
    max_ratio: float
    argmax_input: str
    sample_count: int
    parameters: dict = field(default_factory=dict)
    violations: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")

    @property
    def passed(self) -> bool:
        return self.violations == 0 and math.isfinite(self.max_ratio)

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("parameters")
        return row


@dataclass
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.points) < 3:
            raise InsufficientDataError("a fit needs at least 3 points")


def linear_fit(x, y) -> FitReport:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("a fit needs at least 3 points")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return FitReport(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(max(r2, 0.0), 1.0),
        points=list(zip(x.tolist(), y.tolist())),
    )


def _summarize(name, lhs, rhs, labels, parameters) -> RatioReport:
    """Ratio report for LHS <= RHS; where RHS == 0 the LHS must vanish."""
    lhs = np.ravel(lhs)
    rhs = np.ravel(rhs)
    zero = rhs == 0
    ratio = np.zeros_like(lhs)
    np.divide(lhs, rhs, out=ratio, where=~zero)
    violations = int(np.count_nonzero(ratio > 1.0) + np.count_nonzero(zero & (lhs != 0)))
    i = int(np.argmax(ratio))
    return RatioReport(
        name=name,
        max_ratio=float(ratio[i]),
        argmax_input=labels(i),
        sample_count=int(lhs.size),
        parameters=parameters,
        violations=violations,
    )


# -- pointwise inequality sweeps -----------------------------------------


def cosh_product_defect(xis: Sequence[np.ndarray]) -> np.ndarray:
    """|1 - cosh|sum xi_j| * prod sech|xi_j||, evaluated in log space."""
    total = np.sum(xis, axis=0)
    expo = log_cosh(total) - np.sum([log_cosh(x) for x in xis], axis=0)
    return np.abs(np.expm1(expo))


def cosh_product_bound(xis: Sequence[np.ndarray]) -> np.ndarray:
    """2^p * sum over ordered pairs j != k of |xi_j||xi_k|."""
    p = len(xis)
    a = [np.abs(x) for x in xis]
    s = sum(a)
    sq = sum(x * x for x in a)
    return 2.0**p * (s * s - sq)


def verify_cosh_product_bound(p: int, xi_grid) -> RatioReport:
    """Sweep the p-fold product grid of ``xi_grid`` (sigma folded into xi)."""
    if p not in (2, 3):
        raise ValueError("p must be 2 or 3")
    xi_grid = np.asarray(xi_grid, dtype=float)
    if np.max(np.abs(xi_grid)) > 300:
        raise ValueError("|xi_j| must not exceed 300")
    mesh = np.meshgrid(*([xi_grid] * p), indexing="ij")
    lhs = cosh_product_defect(mesh)
    rhs = cosh_product_bound(mesh)

    def label(i):
        idx = np.unravel_index(i, mesh[0].shape)
        return "xi=" + ",".join(f"{m[idx]:.6g}" for m in mesh)

    return _summarize(
        f"cosh_product_p{p}",
        lhs,
        rhs,
        label,
        {"p": p, "points_per_axis": xi_grid.size, "xi_min": float(xi_grid.min()), "xi_max": float(xi_grid.max())},
    )


def verify_cosh_difference_bound(ab_grid) -> RatioReport:
    """|cosh b - cosh a| <= 1/2 |b^2 - a^2| (cosh b + cosh a) on pairs (a, b)."""
    a, b = (np.asarray(v, dtype=float) for v in ab_grid)
    if max(np.max(np.abs(a)), np.max(np.abs(b))) > 300:
        raise ValueError("|a|, |b| must not exceed 300")
    # factored forms keep the a ~ b and a ~ -b regimes accurate
    lhs = 2.0 * np.abs(np.sinh(0.5 * (b + a)) * np.sinh(0.5 * (b - a)))
    rhs = 0.5 * np.abs((b - a) * (b + a)) * (np.cosh(b) + np.cosh(a))
    return _summarize(
        "cosh_difference",
        lhs,
        rhs,
        lambda i: f"a={a.flat[i]:.6g},b={b.flat[i]:.6g}",
        {"pairs": int(a.size)},
    )


def _one_minus_sech(x: np.ndarray) -> np.ndarray:
    small = x < 20
    out = np.empty_like(x)
    s = np.sinh(x[small] / 2)
    out[small] = 2 * s * s / np.cosh(x[small])
    e = np.exp(-x[~small])
    out[~small] = 1.0 - 2 * e / (1 + e * e)
    return out


def verify_weight_bounds(sigma_grid, xi_grid) -> list[RatioReport]:
    """Weight comparisons on the (sigma, xi) product grid.

    * exp/2 <= cosh and cosh <= exp
    * (1 - exp(-sigma|xi|)) / |xi| <= sigma
    * (1 - sech(sigma|xi|)) / |xi|^2 <= sigma^2

    All ratios are written in overflow-free forms of x = sigma|xi|; at
    xi = 0 the left-hand sides take their limit value 0.
    """
    s, xi = np.meshgrid(np.asarray(sigma_grid, float), np.asarray(xi_grid, float), indexing="ij")
    x = s * np.abs(xi)
    e2 = np.exp(-2 * x)
    params = {
        "sigma_min": float(np.min(sigma_grid)),
        "sigma_max": float(np.max(sigma_grid)),
        "xi_min": float(np.min(xi_grid)),
        "xi_max": float(np.max(xi_grid)),
    }

    def label(i):
        return f"sigma={s.flat[i]:.6g},xi={xi.flat[i]:.6g}"

    pos = x > 0
    exp_lhs = np.where(pos, -np.expm1(-x), 0.0)
    exp_rhs = np.where(pos, x, 0.0)
    cosh_lhs = np.where(pos, _one_minus_sech(x), 0.0)
    cosh_rhs = np.where(pos, x * x, 0.0)
    ones = np.ones_like(x)
    return [
        _summarize("half_exp_le_cosh", 1.0 / (1.0 + e2), ones, label, params),
        _summarize("cosh_le_exp", 0.5 * (1.0 + e2), ones, label, params),
        _summarize("exp_weight_sigma", exp_lhs, exp_rhs, label, params),
        _summarize("cosh_weight_sigma2", cosh_lhs, cosh_rhs, label, params),
    ]


def verify_lemmas(
    p2_points: int = 400,
    p3_points: int = 50,
    xi_max: float = 20.0,
    pairs: int = 1_000_000,
    ab_max: float = 100.0,
    sigma_points: int = 200,
    xi_points: int = 2001,
    sigma_max: float = 10.0,
    weight_xi_max: float = 100.0,
    seed: int = 0,
) -> list[RatioReport]:
    rng = np.random.default_rng(seed)
    ab = rng.uniform(-ab_max, ab_max, size=(2, pairs))
    reports = [
        verify_cosh_product_bound(2, np.linspace(-xi_max, xi_max, p2_points)),
        verify_cosh_product_bound(3, np.linspace(-xi_max, xi_max, p3_points)),
        verify_cosh_difference_bound(ab),
    ]
    sigma = np.linspace(sigma_max / sigma_points, sigma_max, sigma_points)
    reports += verify_weight_bounds(sigma, np.linspace(-weight_xi_max, weight_xi_max, xi_points))
    return reports


# -- ensemble ratio diagnostics ------------------------------------------


def _map(fn, items, threads: int = 1):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _loglog_slope(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    keep = y > 0
    if keep.sum() < 3:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def key_lemma_ratio(
    ensemble_seed: int,
    sigma_grid: Sequence[float],
    p: ModelParams,
    grid: SpectralGrid,
    count: int = 200,
    threads: int = 1,
    **ensemble_kw,
) -> list[RatioReport]:
    """Trilinear-estimate ratios over a seeded ensemble.

    Returns reports named ``total`` (|int vN| / (s^2 (1+|v|)|v|^3)), ``I1``,
    ``I2`` (/ s^2 |v|^3) and ``I3`` (/ s^2 |v|^4), norms in H^2. Each report's
    parameters carry the spread (max/min over sigma of the ensemble maximum)
    and, for ``total``, the range of per-field log-log slopes in sigma over
    the full grid and over its lowest decade.
    """
    sigmas = np.asarray(sigma_grid, dtype=float)
    fields = random_ensemble(grid, count, ensemble_seed, **ensemble_kw)
    ops = operators(grid, p)

    def member(v: SpectralField):
        nv = h2_norm(v)
        rows = np.zeros((sigmas.size, 4))
        vals = np.zeros((sigmas.size, 4))
        for j, s in enumerate(sigmas):
            tot, i1, i2, i3 = ops.pairing(v.coefficients, float(s))
            vals[j] = (tot, i1, i2, i3)
            if nv == 0:
                continue
            s2 = s * s
            rows[j] = (
                abs(tot) / (s2 * (1 + nv) * nv**3),
                abs(i1) / (s2 * nv**3),
                abs(i2) / (s2 * nv**3),
                abs(i3) / (s2 * nv**4),
            )
        slope = _loglog_slope(sigmas, np.abs(vals[:, 0]))
        small = sigmas <= 0.1 * sigmas.max()
        asym = _loglog_slope(sigmas[small], np.abs(vals[small, 0]))
        return rows, (slope, asym)

    results = _map(member, fields, threads)
    ratios = np.stack([r for r, _ in results])  # (member, sigma, term)
    slopes = np.array([s[0] for _, s in results])
    asym = np.array([s[1] for _, s in results])
    reports = []
    for t, name in enumerate(("total", "I1", "I2", "I3")):
        per_sigma_max = ratios[:, :, t].max(axis=0)
        m, j = np.unravel_index(int(np.argmax(ratios[:, :, t])), ratios.shape[:2])
        lo = per_sigma_max.min()
        params = {
            "seed": ensemble_seed,
            "count": count,
            "n_modes": grid.n_modes,
            "length": grid.length,
            "sigma_min": float(sigmas.min()),
            "sigma_max": float(sigmas.max()),
            "sigma_spread": float(per_sigma_max.max() / lo) if lo > 0 else float("inf"),
        }
        if t == 0:
            params["slope_min"] = float(np.nanmin(slopes))
            params["slope_max"] = float(np.nanmax(slopes))
            params["slope_argmin_member"] = int(np.nanargmin(slopes))
            params["slope_in_tolerance_fraction"] = float(np.mean(np.abs(slopes - 2) <= 0.2))
            # slopes over the lowest decade only, where higher powers of sigma are negligible
            finite = asym[np.isfinite(asym)]
            params["small_sigma_slope_min"] = float(finite.min()) if finite.size else float("nan")
            params["small_sigma_slope_max"] = float(finite.max()) if finite.size else float("nan")
        reports.append(
            RatioReport(
                name=name,
                max_ratio=float(ratios[m, j, t]),
                argmax_input=f"member={m},sigma={sigmas[j]:.6g}",
                sample_count=int(ratios[:, :, t].size),
                parameters=params,
            )
        )
    return reports


def nonlinear_ratio(eta: SpectralField, sigma: float, p: ModelParams) -> float:
    """|F(eta)|_{H^{s,2}} / ((1 + |eta|_{H^{s,2}}) |eta|^2_{H^{s,2}})."""
    gp = GevreyParams(sigma, 2.0)
    n = weighted_norm(eta, gp)
    if n == 0:
        return 0.0
    f = eta.with_coefficients(operators(eta.grid, p).nonlinear(eta.coefficients))
    return weighted_norm(f, gp) / ((1 + n) * n * n)


def nonlinear_estimate_ratio(
    ensemble_seed: int,
    sigma_grid: Sequence[float],
    p: ModelParams,
    grid: SpectralGrid,
    count: int = 200,
    threads: int = 1,
    **ensemble_kw,
) -> RatioReport:
    """Max nonlinear-estimate ratio over ensemble x sigma, with refinement check.

    ``parameters['refinement_change']`` is the relative change of the maximum
    when the same fields are represented on a grid with twice the modes.
    """
    sigmas = [float(s) for s in sigma_grid]
    fields = random_ensemble(grid, count, ensemble_seed, **ensemble_kw)
    fine = grid.refined(2)

    def member(eta):
        coarse = [nonlinear_ratio(eta, s, p) for s in sigmas]
        padded = refine_field(eta, fine)
        return coarse, [nonlinear_ratio(padded, s, p) for s in sigmas]

    res = _map(member, fields, threads)
    coarse = np.array([c for c, _ in res])
    refined = np.array([f for _, f in res])
    m, j = np.unravel_index(int(np.argmax(coarse)), coarse.shape)
    per_sigma = coarse.max(axis=0)
    return RatioReport(
        name="nonlinear_estimate",
        max_ratio=float(coarse[m, j]),
        argmax_input=f"member={m},sigma={sigmas[j]:.6g}",
        sample_count=int(coarse.size),
        parameters={
            "seed": ensemble_seed,
            "count": count,
            "sigma_spread": float(per_sigma.max() / per_sigma.min()),
            "refinement_change": float(abs(refined.max() - coarse.max()) / coarse.max()),
            "calibration_c_sigma0": float(coarse[:, 0].max()) if sigmas[0] == 0 else float("nan"),
        },
    )


def nonlinear_scaling_sweep(
    fields: Sequence[SpectralField],
    lambdas: Sequence[float],
    sigma: float,
    p: ModelParams,
) -> RatioReport:
    """Nonlinear-estimate ratio of lambda*eta over a range of amplitudes.

    ``parameters['spread']`` is max/min over lambda of the ensemble maximum.
    """
    lambdas = [float(l) for l in lambdas]
    table = np.array([[nonlinear_ratio(f * lam, sigma, p) for lam in lambdas] for f in fields])
    m, j = np.unravel_index(int(np.argmax(table)), table.shape)
    per_lambda = table.max(axis=0)
    return RatioReport(
        name="nonlinear_scaling",
        max_ratio=float(table[m, j]),
        argmax_input=f"member={m},lambda={lambdas[j]:.6g}",
        sample_count=int(table.size),
        parameters={
            "sigma": sigma,
            "lambda_min": min(lambdas),
            "lambda_max": max(lambdas),
            "spread": float(per_lambda.max() / per_lambda.min()),
        },
    )


def refine_field(field: SpectralField, fine: SpectralGrid) -> SpectralField:
    """Same trigonometric polynomial on a grid with more modes (same length)."""
    if fine.length != field.grid.length or fine.n_modes < field.grid.n_modes:
        raise ValueError("refinement must keep the length and not drop modes")
    n, m = field.grid.n_modes, fine.n_modes
    out = np.zeros(m, dtype=complex)
    off = (m - n) // 2
    c = field.coefficients.copy()
    nyq = c[0]
    c[0] = 0.0
    out[off : off + n] = c
    # split the unpaired mode between +-N/2
    out[off] += 0.5 * nyq
    out[off + n] = 0.5 * nyq
    return SpectralField(fine, out)


# -- trajectory diagnostics ----------------------------------------------


def _pairing_series(traj: Trajectory, sigma: float, p: ModelParams) -> np.ndarray:
    from .model import weighted_field

    ops = operators(traj.snapshots[0].grid, p)
    return np.array(
        [ops.pairing(weighted_field(s, sigma).coefficients, sigma)[0] for s in traj.snapshots]
    )


def _energy_series(traj: Trajectory, sigma: float, p: ModelParams) -> np.ndarray:
    return np.array([energy_E_sigma(s, sigma, p).modified_energy for s in traj.snapshots])


def energy_derivative_check(traj: Trajectory, sigma: float, p: ModelParams) -> RatioReport:
    """Compare central differences of E_sigma with the pairing int v N(v).

    Residuals use snapshot spacing dt and 2 dt at the same interior times.
    ``max_ratio`` is residual(2dt) / residual(dt), expected near 4 for a
    second-order difference; ``resolution_insufficient`` is set when it falls
    outside [3, 5] while the residuals are above rounding level. Also reports the time-integrated form
    E(t) - E(0) = int_0^t pairing (composite Simpson, where available).
    """
    t = np.asarray(traj.times)
    if t.size < 5:
        raise InsufficientDataError("need at least 5 snapshots")
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9):
        raise InsufficientDataError("snapshots must be equally spaced")
    h = float(h[0])
    e = _energy_series(traj, sigma, p)
    pair = _pairing_series(traj, sigma, p)
    idx = np.arange(2, t.size - 2)
    fd1 = (e[idx + 1] - e[idx - 1]) / (2 * h)
    fd2 = (e[idx + 2] - e[idx - 2]) / (4 * h)
    r1 = float(np.max(np.abs(fd1 - pair[idx])))
    r2 = float(np.max(np.abs(fd2 - pair[idx])))
    scale = max(1.0, float(np.max(np.abs(pair))))
    # both residuals at rounding level (e.g. sigma = 0): nothing to converge
    at_floor = max(r1, r2) <= 1e-10 * scale
    if r1 > 0:
        factor = r2 / r1
    else:
        factor = 1.0 if r2 == 0 else 1e300

    from scipy.integrate import cumulative_simpson

    integ = cumulative_simpson(pair, x=t, initial=0.0)
    integrated = float(np.max(np.abs((e - e[0]) - integ)))
    return RatioReport(
        name="energy_derivative",
        max_ratio=factor,
        argmax_input=f"sigma={sigma:.6g}",
        sample_count=int(idx.size),
        parameters={
            "dt": h,
            "residual_dt": r1 / scale,
            "residual_2dt": r2 / scale,
            "integrated_residual": integrated,
            "max_pairing": float(np.max(np.abs(pair))),
            "at_roundoff": at_floor,
            "resolution_insufficient": not at_floor and not (3.0 <= factor <= 5.0),
        },
    )


@dataclass
class AlmostConservationResult:
    fit: FitReport
    sigmas: list[float]
    deviations: list[float]
    t_span: float
    span_factors: list[float]
    span_deviations: list[list[float]]  # [sigma][factor]
    constant: float  # max D / (sigma^2 t (1 + E^1/2) E^3/2)
    initial_energies: list[float]

    def span_growth(self) -> list[float]:
        """Worst ratio D(f2 T)/D(f1 T) / (f2/f1) over consecutive span factors."""
        out = []
        f = self.span_factors
        for k in range(len(f) - 1):
            worst = 0.0
            for row in self.span_deviations:
                if row[k] > DEVIATION_FLOOR:
                    worst = max(worst, (row[k + 1] / row[k]) / (f[k + 1] / f[k]))
            out.append(worst)
        return out


def deviation_series(traj: Trajectory, index: int) -> np.ndarray:
    """Running sup |E_sigma(t) - E_sigma(0)| for the ``index``-th observed sigma."""
    e = traj.modified_energy(index)
    return np.maximum.accumulate(np.abs(e - e[0]))


def almost_conservation_experiment(
    eta0: SpectralField,
    sigma_list: Sequence[float],
    t_span: float,
    p: ModelParams,
    dt: float = 1e-3,
    observer_stride: int = 10,
    span_factors: Sequence[float] = (0.25, 0.5, 1.0),
) -> AlmostConservationResult:
    """Deviation of E_sigma over [0, t_span] for each sigma, and its log-log fit.

    One trajectory serves all sigma (the evolution does not depend on the
    weight). Deviations below 1e-13 are left out of the fit.
    """
    sigmas = [float(s) for s in sigma_list]
    cfg = SolverConfig(dt=dt, t_end=t_span, observer_stride=observer_stride)
    traj = evolve(eta0, cfg, p, sigmas)
    times = np.asarray(traj.times)
    devs, span_devs, consts, e0s = [], [], [], []
    for i, s in enumerate(sigmas):
        run = deviation_series(traj, i)
        devs.append(float(run[-1]))
        row = []
        for f in span_factors:
            k = int(np.searchsorted(times, f * t_span * (1 + 1e-12), side="right")) - 1
            row.append(float(run[k]))
        span_devs.append(row)
        e0 = traj.reports[0][i].modified_energy
        e0s.append(e0)
        if s > 0:
            consts.append(run[-1] / (s * s * t_span * (1 + math.sqrt(e0)) * e0**1.5))
    keep = [(s, d) for s, d in zip(sigmas, devs) if s > 0 and d > DEVIATION_FLOOR]
    if len(keep) < 3:
        raise InsufficientDataError("fewer than 3 deviations above the floor")
    fit = linear_fit(np.log([s for s, _ in keep]), np.log([d for _, d in keep]))
    return AlmostConservationResult(
        fit=fit,
        sigmas=sigmas,
        deviations=devs,
        t_span=t_span,
        span_factors=list(span_factors),
        span_deviations=span_devs,
        constant=float(max(consts)) if consts else float("nan"),
        initial_energies=e0s,
    )


def c_hat_from_constant(constant: float, energy_sigma0: float) -> float:
    """Strip-width constant for the continuation argument.

    Chosen so that constant * sigma^2 * T* * (1 + (2E)^1/2) (2E)^3/2 <= E for
    sigma = C / sqrt(T*), E = E_{sigma0}(0).
    """
    e = energy_sigma0
    return math.sqrt(e / (constant * (1 + math.sqrt(2 * e)) * (2 * e) ** 1.5))


# -- radius of analyticity -----------------------------------------------


def estimate_radius(
    field: SpectralField,
    floor: float = 1e-12,
    ceiling: float = 1e-4,
    min_modes: int = 12,
) -> tuple[float, FitReport]:
    """Decay rate of |eta_hat(xi)| over the band floor < |eta_hat| < ceiling.

    Fits log|eta_hat| = a - sigma|xi| - b log<xi> by least squares over both
    signs of xi; the algebraic factor absorbs the <xi>^-s prefactor so that
    sigma is the pure exponential rate. ``fit.slope`` is -sigma and
    ``fit.r_squared`` belongs to this fit. ``fit.extra`` carries ``b`` and a
    tail-shape check: a quadratic term in |xi| is added to the model and
    ``quadratic_share`` is its share of the decay rate at the top of the
    band; ``exponential_tail`` is False once that share exceeds 0.25.
    """
    c = field.coefficients
    xi = np.abs(field.grid.wavenumbers)
    mag = np.abs(c)
    band = (mag > floor) & (mag < ceiling) & (xi > 0)
    if band.sum() < min_modes:
        raise InsufficientDataError(
            f"only {int(band.sum())} modes in ({floor:g}, {ceiling:g}); need {min_modes}"
        )
    x = xi[band]
    y = np.log(mag[band])
    lx = 0.5 * np.log1p(x * x)
    design = np.column_stack([np.ones_like(x), x, lx])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0

    quad = np.column_stack([design, x * x])
    qc, *_ = np.linalg.lstsq(quad, y, rcond=None)
    top = float(x.max())
    q_rate = abs(2 * qc[3] * top)
    share = q_rate / (abs(qc[1]) + q_rate) if q_rate > 0 else 0.0

    sigma = -float(coef[1])
    fit = FitReport(
        slope=float(coef[1]),
        intercept=float(coef[0]),
        r_squared=min(max(r2, 0.0), 1.0),
        points=list(zip(x.tolist(), y.tolist())),
        extra={
            "algebraic_power": -float(coef[2]),
            "quadratic_share": float(share),
            "exponential_tail": bool(share <= 0.25),
            "band_modes": int(band.sum()),
        },
    )
    return sigma, fit


def decay_fit(times: Sequence[float], sigma_estimates: Sequence[float]) -> FitReport:
    """log-log fit of sigma_est against t; ``extra['alpha']`` is the decay exponent.

    ``extra['min_sigma_sqrt_t']`` is the infimum of sigma_est * sqrt(t) over
    the window, positive when the estimates decay no faster than t^-1/2.
    """
    t = np.asarray(times, float)
    s = np.asarray(sigma_estimates, float)
    if t.size < 5:
        raise InsufficientDataError("need at least 5 (t, sigma) pairs")
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    if t.max() / t.min() < 10:
        raise InsufficientDataError("times must span at least one decade")
    with np.errstate(divide="ignore", invalid="ignore"):
        ls = np.log(s)
    ok = np.isfinite(ls)
    prod = s * np.sqrt(t)
    if ok.sum() >= 3:
        fit = linear_fit(np.log(t[ok]), ls[ok])
    else:
        fit = FitReport(float("nan"), float("nan"), 0.0, [(0.0, 0.0)] * 3)
    fit.extra.update(
        alpha=-fit.slope,
        min_sigma_sqrt_t=float(np.min(prod)),
        lower_bound_holds=bool(np.all(prod > 0)),
    )
    return fit


def radius_track(traj: Trajectory, floor: float = 1e-12, ceiling: float = 1e-4):
    """(t, sigma_est) for every snapshot with t > 0; NaN where the band is too thin."""
    rows = []
    for t, snap in zip(traj.times, traj.snapshots):
        if t <= 0:
            continue
        try:
            s, _ = estimate_radius(snap, floor, ceiling)
        except InsufficientDataError:
            s = float("nan")
        rows.append((t, s))
    return rows


# -- calibration ---------------------------------------------------------


@dataclass
class ContractionCheck:
    max_ratio: float
    ratios: list[list[float]]
    t_spans: list[float]
    agreement: list[float]  # H^{sigma,2} distance Picard limit vs IFRK4, NaN if skipped
    c: float

    @property
    def contraction_holds(self) -> bool:
        return self.max_ratio <= 0.5


def _picard_ratios(eta, c, p, sigma, n_nodes, n_iters):
    from .solver import PicardDivergenceError, picard_iterate

    norm = weighted_norm(eta, GevreyParams(sigma, 2.0))
    t_span = local_timespan(norm, c)
    try:
        res = picard_iterate(eta, t_span, n_nodes, n_iters, p, sigma=sigma)
    except PicardDivergenceError:
        return t_span, None
    return t_span, res


def contraction_check(
    fields: Sequence[SpectralField],
    c: float,
    p: ModelParams,
    sigma: float = 0.1,
    n_nodes: int = 129,
    n_iters: int = 60,
    compare_steps: int | None = 1024,
    threads: int = 1,
) -> ContractionCheck:
    """Picard ratios at t_span = local_timespan(|eta0|, c) for each field.

    With ``compare_steps`` set, the Picard limit is compared against IFRK4
    run to t_span in that many steps.
    """
    from .solver import hsigma2_distance

    def one(eta):
        t_span, res = _picard_ratios(eta, c, p, sigma, n_nodes, n_iters)
        if res is None:
            return t_span, [float("inf")], float("nan")
        dist = float("nan")
        if compare_steps:
            cfg = SolverConfig(dt=t_span / compare_steps, t_end=t_span, observer_stride=compare_steps)
            ref = evolve(eta, cfg, p, []).snapshots[-1]
            dist = hsigma2_distance(res.limit, ref, sigma)
        return t_span, res.ratios.tolist(), dist

    out = _map(one, list(fields), threads)
    ratios = [r for _, r, _ in out]
    flat = [x for r in ratios for x in r]
    return ContractionCheck(
        max_ratio=float(max(flat)) if flat else 0.0,
        ratios=ratios,
        t_spans=[t for t, _, _ in out],
        agreement=[d for _, _, d in out],
        c=c,
    )


def calibrate_contraction(
    fields: Sequence[SpectralField],
    p: ModelParams,
    sigma: float = 0.1,
    target: float = 0.45,
    n_nodes: int = 65,
    n_iters: int = 60,
    c_bounds: tuple[float, float] = (1e-4, 10.0),
    rel_tol: float = 1e-3,
    threads: int = 1,
) -> float:
    """Smallest c (largest local time span) whose Picard ratios all stay <= target.

    Bisection in log c. ``target`` sits below 1/2 so that the contraction
    requirement holds with margin under quadrature refinement.
    """
    def ok(c):
        chk = contraction_check(fields, c, p, sigma, n_nodes, n_iters, None, threads)
        return chk.max_ratio <= target

    lo, hi = math.log(c_bounds[0]), math.log(c_bounds[1])
    if not ok(math.exp(hi)):
        raise ValueError("no contraction even at the upper c bound")
    if ok(math.exp(lo)):
        return math.exp(lo)
    while hi - lo > rel_tol:
        mid = 0.5 * (lo + hi)
        if ok(math.exp(mid)):
            hi = mid
        else:
            lo = mid
    return math.exp(hi)


def picard_ensemble(grid: SpectralGrid, seed: int, count: int = 6) -> list[SpectralField]:
    """Seeded smooth ensemble used for contraction calibration and checks."""
    return random_ensemble(grid, count, seed, norm_range=(0.1, 5.0))
