"""Time evolution for the KdV-BBM model.

Production stepping uses classical RK4 on the integrating-factor variable
z = exp(i phi(D) t) eta, which integrates the dispersive part exactly.
A Picard iteration of the Duhamel formula

    eta(t) = exp(-i t phi(D)) eta0 - i int_0^t exp(-i (t-s) phi(D)) F(eta(s)) ds

is provided as an independent check of the stepper and of the contraction
estimate behind the local existence time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .model import EnergyReport, ModelParams, energy_E_sigma, operators
from .spectral import GevreyParams, SpectralField, log_cosh, weighted_norm

log = logging.getLogger(__name__)

Method = Literal["ifrk4", "rk4", "picard"]
BLOWUP_FACTOR = 1e10


class BlowUpError(RuntimeError):
    """Raised when the state stops being finite or grows past the guard.

    ``trajectory`` holds everything recorded before the abort.
    """

    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory


class PicardDivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    method: Method = "ifrk4"
    picard_quadrature_nodes: int = 17
    contraction_constant_c: float | None = None
    observer_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if self.method not in ("ifrk4", "rk4", "picard"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.observer_stride < 1:
            raise ValueError("observer_stride must be >= 1")
        if self.picard_quadrature_nodes < 3:
            raise ValueError("picard_quadrature_nodes must be >= 3")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    snapshots: list[SpectralField] = field(default_factory=list)
    reports: list[list[EnergyReport]] = field(default_factory=list)

    def append(self, t: float, snap: SpectralField, reports: list[EnergyReport]):
        if self.times and not t > self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(t)
        self.snapshots.append(snap)
        self.reports.append(reports)

    def modified_energy(self, index: int = 0) -> np.ndarray:
        """E_sigma(t) series for the ``index``-th observed sigma."""
        return np.array([r[index].modified_energy for r in self.reports])

    def energy(self) -> np.ndarray:
        return np.array([r[0].energy for r in self.reports]) if self.reports else np.array([])


def local_timespan(data_norm: float, c: float) -> float:
    """T = 1 / (2 c (1 + r)^2) with 2r the H^{sigma,2} norm of the data."""
    if data_norm < 0 or not c > 0:
        raise ValueError("need data_norm >= 0 and c > 0")
    r = data_norm / 2.0
    return 1.0 / (2.0 * c * (1.0 + r) ** 2)


def rhs(eta: SpectralField, p: ModelParams) -> SpectralField:
    """d eta / dt = -i (phi(D) eta + F(eta))."""
    return eta.with_coefficients(operators(eta.grid, p).rhs(eta.coefficients))


# -- steppers (array level) ----------------------------------------------


class _IFRK4:
    def __init__(self, ops, dt: float):
        self.ops = ops
        self.dt = dt
        self.e_half = np.exp(-0.5j * dt * ops.phi)
        self.e_full = self.e_half * self.e_half

    def _n(self, c):
        return -1j * self.ops.nonlinear(c)

    def __call__(self, c):
        dt, e1, e2 = self.dt, self.e_half, self.e_full
        k1 = self._n(c)
        k2 = self._n(e1 * (c + 0.5 * dt * k1))
        k3 = self._n(e1 * c + 0.5 * dt * k2)
        k4 = self._n(e2 * c + dt * e1 * k3)
        return e2 * c + (dt / 6.0) * (e2 * k1 + 2.0 * e1 * (k2 + k3) + k4)


class _RK4:
    def __init__(self, ops, dt: float):
        self.ops = ops
        self.dt = dt

    def __call__(self, c):
        f, dt = self.ops.rhs, self.dt
        k1 = f(c)
        k2 = f(c + 0.5 * dt * k1)
        k3 = f(c + 0.5 * dt * k2)
        k4 = f(c + dt * k3)
        return c + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


class _PicardStep:
    def __init__(self, ops, dt: float, n_nodes: int, tol: float = 1e-14, max_iters: int = 60):
        self.ops, self.dt, self.n_nodes = ops, dt, n_nodes
        self.tol, self.max_iters = tol, max_iters

    def __call__(self, c):
        nodes = np.linspace(0.0, self.dt, self.n_nodes)
        it = _picard_sweeps(self.ops, c, nodes, self.max_iters, self.tol, sigma=0.0)
        return it[-1][-1]


def step_ifrk4(state: SpectralField, dt: float, p: ModelParams) -> SpectralField:
    out = _IFRK4(operators(state.grid, p), dt)(state.coefficients)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after IFRK4 step")
    return state.with_coefficients(out)


def step_rk4(state: SpectralField, dt: float, p: ModelParams) -> SpectralField:
    out = _RK4(operators(state.grid, p), dt)(state.coefficients)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after RK4 step")
    return state.with_coefficients(out)


def _make_stepper(ops, config: SolverConfig):
    if config.method == "ifrk4":
        return _IFRK4(ops, config.dt)
    if config.method == "rk4":
        lim = config.dt * np.max(np.abs(ops.phi))
        if lim > 1.0:
            raise ValueError(f"rk4 stability heuristic violated: dt*max|phi| = {lim:.3g} > 1")
        return _RK4(ops, config.dt)
    return _PicardStep(ops, config.dt, config.picard_quadrature_nodes)


# -- Picard / Duhamel ----------------------------------------------------


def _hsigma2_norms(ops, diffs: np.ndarray, sigma: float) -> np.ndarray:
    """H^{sigma,2} norms of each row of ``diffs`` (rows = time nodes)."""
    logw = 2 * log_cosh(sigma * ops.xi) + np.log(ops.h2_weight)
    # scale out the largest weight so squares stay finite
    shift = logw.max()
    w = np.exp(logw - shift)
    sq = np.sum(w * np.square(np.abs(diffs)), axis=-1) * ops.grid.length
    return np.sqrt(sq) * np.exp(0.5 * shift)


def _cumulative_simpson_complex(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    # scipy's routine keeps only the real part of complex input
    re = cumulative_simpson(y.real, x=x, axis=0, initial=0.0)
    im = cumulative_simpson(y.imag, x=x, axis=0, initial=0.0)
    return re + 1j * im


def _picard_sweeps(ops, c0, nodes, n_iters, tol, sigma, ratios_out=None):
    """Run Picard sweeps; returns the list of iterates (each: nodes x modes)."""
    phase = np.exp(-1j * np.outer(nodes, ops.phi))
    free = phase * c0
    iterates = [free]
    prev_diff = None
    scale = max(float(np.max(_hsigma2_norms(ops, free, sigma))), 1e-300)
    bad = 0
    for _ in range(n_iters):
        cur = iterates[-1]
        fvals = np.array([ops.nonlinear(row) for row in cur])
        integrand = np.conj(phase) * fvals
        integral = _cumulative_simpson_complex(integrand, nodes)
        nxt = free - 1j * phase * integral
        iterates.append(nxt)
        diff = float(np.max(_hsigma2_norms(ops, nxt - cur, sigma)))
        if prev_diff is not None and prev_diff > 0:
            ratio = diff / prev_diff
            if ratios_out is not None:
                ratios_out.append(ratio)
            bad = bad + 1 if ratio > 1.0 else 0
            if bad >= 3:
                raise PicardDivergenceError(
                    "Picard ratios exceeded 1 three times in a row; "
                    "shorten t_span or recalibrate c"
                )
        prev_diff = diff
        # differences at rounding level carry no contraction information
        if diff <= tol * scale:
            break
    return iterates


@dataclass
class PicardResult:
    nodes: np.ndarray
    iterates: list[Trajectory]
    ratios: np.ndarray
    increments: np.ndarray

    @property
    def limit(self) -> SpectralField:
        return self.iterates[-1].snapshots[-1]


def picard_iterate(
    eta0: SpectralField,
    t_span: float,
    n_nodes: int,
    n_iters: int,
    p: ModelParams,
    sigma: float = 0.0,
    tol: float = 1e-13,
) -> PicardResult:
    """Picard iterates of the Duhamel map on ``n_nodes`` uniform nodes in [0, t_span].

    The time integral is a cumulative composite Simpson rule. Iteration
    stops after ``n_iters`` sweeps or once successive iterates differ by
    less than ``tol`` relative to the free evolution. ``ratios[k]`` is the
    ratio of consecutive sup-in-time H^{sigma,2} increments.
    """
    if n_nodes < 8:
        raise ValueError("n_nodes must be >= 8")
    ops = operators(eta0.grid, p)
    nodes = np.linspace(0.0, t_span, n_nodes)
    ratios: list[float] = []
    raw = _picard_sweeps(ops, eta0.coefficients, nodes, n_iters, tol, sigma, ratios)
    incs = [
        float(np.max(_hsigma2_norms(ops, b - a, sigma))) for a, b in zip(raw[:-1], raw[1:])
    ]
    trajs = []
    for it in raw:
        tr = Trajectory()
        for t, row in zip(nodes, it):
            tr.times.append(float(t))
            tr.snapshots.append(eta0.with_coefficients(row))
            tr.reports.append([])
        trajs.append(tr)
    return PicardResult(nodes=nodes, iterates=trajs, ratios=np.array(ratios), increments=np.array(incs))


# -- drivers -------------------------------------------------------------


def _reports(snap: SpectralField, t: float, sigmas: Sequence[float], p: ModelParams):
    return [energy_E_sigma(snap, s, p, time=t) for s in sigmas]


def evolve(
    eta0: SpectralField,
    config: SolverConfig,
    p: ModelParams,
    sigma_observe: Sequence[float] = (0.0,),
) -> Trajectory:
    """Step to ``config.t_end`` recording energies every ``observer_stride`` steps.

    The last step is always recorded. Raises :class:`BlowUpError` (carrying
    the partial trajectory) on non-finite state or norm growth by 1e10.
    """
    sigmas = list(sigma_observe) or [0.0]
    ops = operators(eta0.grid, p)
    step = _make_stepper(ops, config)
    traj = Trajectory()
    c = eta0.coefficients.copy()
    traj.append(0.0, eta0, _reports(eta0, 0.0, sigmas, p))
    n = config.n_steps
    norm0 = max(ops.h2_norm(c), 1e-300)
    for i in range(1, n + 1):
        c = step(c)
        record = i % config.observer_stride == 0 or i == n
        if record or i % 64 == 0:
            nrm = ops.h2_norm(c)
            if not np.isfinite(nrm) or nrm > BLOWUP_FACTOR * norm0:
                raise BlowUpError(f"blow-up detected at step {i} (t = {i * config.dt:g})", traj)
        if record:
            t = i * config.dt
            snap = eta0.with_coefficients(c.copy())
            traj.append(t, snap, _reports(snap, t, sigmas, p))
    return traj


@dataclass
class ContinuationReport:
    sigma0: float
    sigma: float
    t_star: float
    c_hat: float
    safety: float
    energy_sigma0_initial: float
    sup_energy_sigma: float
    bound_holds: bool
    times: list[float]
    energies: list[float]

    def summary(self) -> dict:
        return {
            "sigma0": self.sigma0,
            "sigma": self.sigma,
            "t_star": self.t_star,
            "C_hat": self.c_hat,
            "safety": self.safety,
            "E_sigma0_initial": self.energy_sigma0_initial,
            "sup_E_sigma": self.sup_energy_sigma,
            "bound": 2 * self.energy_sigma0_initial,
            "bound_holds": self.bound_holds,
        }


def continuation_sigma(sigma0: float, t_star: float, c_hat: float, safety: float = 0.5) -> float:
    return float(min(sigma0, safety * c_hat / np.sqrt(t_star)))


def continuation_run(
    eta0: SpectralField,
    sigma0: float,
    t_star: float,
    p: ModelParams,
    c_hat: float,
    safety: float = 0.5,
    dt: float = 1e-2,
    observer_stride: int = 10,
) -> ContinuationReport:
    """Cover [0, t_star] with one strip width sigma = min(sigma0, safety*C/sqrt(t_star)).

    A failed 2 E_{sigma0}(0) bound is reported in the result, not raised.
    """
    if not sigma0 > 0:
        raise ValueError("sigma0 must be > 0")
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    sigma = continuation_sigma(sigma0, t_star, c_hat, safety)
    e0 = energy_E_sigma(eta0, sigma0, p).modified_energy
    cfg = SolverConfig(dt=dt, t_end=t_star, observer_stride=observer_stride)
    traj = evolve(eta0, cfg, p, [sigma])
    es = traj.modified_energy(0)
    sup = float(np.max(es))
    return ContinuationReport(
        sigma0=sigma0,
        sigma=sigma,
        t_star=t_star,
        c_hat=c_hat,
        safety=safety,
        energy_sigma0_initial=e0,
        sup_energy_sigma=sup,
        bound_holds=bool(sup <= 2 * e0),
        times=list(traj.times),
        energies=es.tolist(),
    )


def hsigma2_distance(a: SpectralField, b: SpectralField, sigma: float) -> float:
    return weighted_norm(a - b, GevreyParams(sigma, 2.0), "cosh")
