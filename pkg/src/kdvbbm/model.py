"""The fifth-order KdV-BBM model in Fourier-multiplier form.

    eta_t + eta_x - g1 eta_txx + g2 eta_xxx + d1 eta_txxxx + d2 eta_xxxxx
        = -3/4 (eta^2)_x - g (eta^2)_xxx + 7/48 (eta_x^2)_x + 1/8 (eta^3)_x

After division by varphi(xi) = 1 + g1 xi^2 + d1 xi^4 this reads

    i eta_t - phi(D) eta = F(eta)
    F(eta) = tau(D) eta^2 - 7/48 psi(D) eta_x^2 - 1/8 psi(D) eta^3.

Odd symbols (phi, tau, psi, derivatives) vanish on the unpaired Nyquist mode
so that every operator maps real fields to real fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import (
    OVERFLOW_GUARD,
    GevreyParams,
    OverflowGuardError,
    SpectralField,
    SpectralGrid,
    gevrey_weight,
    weighted_norm,
)

CONSERVATIVE_GAMMA = 7.0 / 48.0


@dataclass(frozen=True)
class ModelParams:
    gamma1: float
    delta1: float
    gamma: float = CONSERVATIVE_GAMMA
    gamma2: float = 0.0
    delta2: float = 0.0

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ValueError(f"gamma1 must be > 0, got {self.gamma1!r}")
        if not self.delta1 > 0:
            raise ValueError(f"delta1 must be > 0, got {self.delta1!r}")

    @property
    def conservative_case(self) -> bool:
        return self.gamma == CONSERVATIVE_GAMMA

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "delta1": self.delta1,
            "delta2": self.delta2,
        }


@dataclass(frozen=True)
class EnergyReport:
    time: float
    energy: float
    modified_energy: float
    sigma: float
    h2_norm_vsigma: float


# -- symbols --------------------------------------------------------------


def varphi(xi, p: ModelParams):
    xi2 = np.square(xi)
    return 1.0 + p.gamma1 * xi2 + p.delta1 * xi2 * xi2


def dispersion_phi(xi, p: ModelParams):
    xi2 = np.square(xi)
    return xi * (1.0 - p.gamma2 * xi2 + p.delta2 * xi2 * xi2) / varphi(xi, p)


def symbol_tau(xi, p: ModelParams):
    return xi * (3.0 - 4.0 * p.gamma * np.square(xi)) / (4.0 * varphi(xi, p))


def symbol_psi(xi, p: ModelParams):
    return xi / varphi(xi, p)


class Operators:
    """Symbol arrays of the model on one grid, plus array-level kernels.

    The kernels work on raw coefficient arrays and are what the time
    steppers call; the module-level functions wrap them for
    :class:`SpectralField` values.
    """

    def __init__(self, grid: SpectralGrid, params: ModelParams):
        self.grid = grid
        self.params = params
        xi = grid.wavenumbers
        nyq = grid.nyquist
        self.xi = xi
        self.varphi = varphi(xi, params)
        self.phi = dispersion_phi(xi, params)
        self.tau = symbol_tau(xi, params)
        self.psi = symbol_psi(xi, params)
        self.dx = 1j * xi
        for arr in (self.phi, self.tau, self.psi, self.dx):
            arr[nyq] = 0.0
        # <xi>^4 for the H^2 norm
        self.h2_weight = np.square(1.0 + xi * xi)
        self._m2 = 2 * grid.n_modes
        self._m3 = 4 * grid.n_modes

    # products -------------------------------------------------------------

    def square(self, c: np.ndarray) -> np.ndarray:
        u = self.grid.padded_samples(c, self._m2)
        return self.grid.from_padded_samples(u * u)

    def cube(self, c: np.ndarray) -> np.ndarray:
        u = self.grid.padded_samples(c, self._m3)
        return self.grid.from_padded_samples(u * u * u)

    # model terms ----------------------------------------------------------

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        g = self.grid
        u = g.padded_samples(c, self._m2)
        ux = g.padded_samples(self.dx * c, self._m2)
        quad = g.from_padded_samples(u * u)
        grad = g.from_padded_samples(ux * ux)
        cub = self.cube(c)
        return self.tau * quad - self.psi * (CONSERVATIVE_GAMMA * grad + 0.125 * cub)

    def rhs(self, c: np.ndarray) -> np.ndarray:
        return -1j * (self.phi * c + self.nonlinear(c))

    def energy(self, c: np.ndarray, weight: np.ndarray | None = None) -> float:
        a2 = np.square(np.abs(c))
        if weight is not None:
            a2 = a2 * np.square(weight)
        return 0.5 * self.grid.length * float(np.sum(self.varphi * a2))

    def h2_norm(self, c: np.ndarray) -> float:
        return float(np.sqrt(self.grid.length * np.sum(self.h2_weight * np.square(np.abs(c)))))

    def remainders(self, v: np.ndarray, sigma: float):
        """(N1, N2, N3) coefficient arrays for the weighted field ``v``."""
        if sigma == 0.0:
            z = np.zeros_like(v)
            return z, z.copy(), z.copy()
        cosh_w = _weight(self.grid, "cosh", sigma)
        sech_w = _weight(self.grid, "sech", sigma)
        g = self.grid
        m2 = self._m2
        vx = self.dx * v
        eta = sech_w * v
        etax = self.dx * eta
        u = g.padded_samples(v, m2)
        ux = g.padded_samples(vx, m2)
        w = g.padded_samples(eta, m2)
        wx = g.padded_samples(etax, m2)
        n1 = g.from_padded_samples(u * u) - cosh_w * g.from_padded_samples(w * w)
        n2 = g.from_padded_samples(ux * ux) - cosh_w * g.from_padded_samples(wx * wx)
        n3 = self.cube(v) - cosh_w * self.cube(eta)
        return n1, n2, n3

    def remainder_total(self, n1, n2, n3) -> np.ndarray:
        gam = self.params.gamma
        xi2 = self.xi * self.xi
        return self.dx * ((0.75 - gam * xi2) * n1 - gam * n2 - 0.125 * n3)

    def pairing(self, v: np.ndarray, sigma: float) -> tuple[float, float, float, float]:
        """(total, I1, I2, I3) with each integral evaluated by real-space quadrature."""
        if sigma == 0.0 or not np.any(v):
            return 0.0, 0.0, 0.0, 0.0
        n1, n2, n3 = self.remainders(v, sigma)
        g = self.grid
        gam = self.params.gamma
        xi2 = self.xi * self.xi
        i1 = _quad(g, (0.75 - gam * xi2) * v, self.dx * n1)
        vx = self.dx * v
        i2 = gam * _quad(g, vx, n2)
        i3 = 0.125 * _quad(g, vx, n3)
        return i1 + i2 + i3, i1, i2, i3


def _quad(grid: SpectralGrid, a: np.ndarray, b: np.ndarray) -> float:
    fa = grid.padded_samples(a, grid.n_modes)
    fb = grid.padded_samples(b, grid.n_modes)
    return float(np.dot(fa, fb) * (grid.length / grid.n_modes))


@lru_cache(maxsize=256)
def _cached_weight(grid: SpectralGrid, kind: str, sigma: float) -> np.ndarray:
    w = gevrey_weight(kind, sigma, grid)
    w.setflags(write=False)
    return w


def _weight(grid: SpectralGrid, kind: str, sigma: float) -> np.ndarray:
    return _cached_weight(grid, kind, float(sigma))


@lru_cache(maxsize=64)
def operators(grid: SpectralGrid, params: ModelParams) -> Operators:
    return Operators(grid, params)


# -- field-level API ------------------------------------------------------


def nonlinearity_F(eta: SpectralField, p: ModelParams) -> SpectralField:
    return eta.with_coefficients(operators(eta.grid, p).nonlinear(eta.coefficients))


def weighted_field(eta: SpectralField, sigma: float) -> SpectralField:
    """v_sigma = cosh(sigma |D|) eta."""
    out = eta.coefficients * _weight(eta.grid, "cosh", sigma)
    if not np.all(np.isfinite(out)):
        raise OverflowGuardError(f"cosh({sigma}|D|) eta is not finite")
    return eta.with_coefficients(out)


def unweighted_field(v: SpectralField, sigma: float) -> SpectralField:
    """eta = sech(sigma |D|) v."""
    return v.with_coefficients(v.coefficients * _weight(v.grid, "sech", sigma))


# N1..N3 do not depend on the model coefficients
_ANY_PARAMS = ModelParams(gamma1=1.0, delta1=1.0)


def _rem(v: SpectralField, sigma: float):
    return operators(v.grid, _ANY_PARAMS).remainders(v.coefficients, sigma)


def remainder_N1(v: SpectralField, sigma: float) -> SpectralField:
    """v^2 - cosh(sigma|D|) [sech(sigma|D|) v]^2."""
    return v.with_coefficients(_rem(v, sigma)[0])


def remainder_N2(v: SpectralField, sigma: float) -> SpectralField:
    """(v_x)^2 - cosh(sigma|D|) [sech(sigma|D|) v_x]^2."""
    return v.with_coefficients(_rem(v, sigma)[1])


def remainder_N3(v: SpectralField, sigma: float) -> SpectralField:
    """v^3 - cosh(sigma|D|) [sech(sigma|D|) v]^3."""
    return v.with_coefficients(_rem(v, sigma)[2])


def remainder_N(v: SpectralField, sigma: float, p: ModelParams) -> SpectralField:
    """(3/4 + g d_x^2) d_x N1 - g d_x N2 - 1/8 d_x N3."""
    ops = operators(v.grid, p)
    return v.with_coefficients(ops.remainder_total(*ops.remainders(v.coefficients, sigma)))


def energy_E(eta: SpectralField, p: ModelParams) -> float:
    return operators(eta.grid, p).energy(eta.coefficients)


def h2_bounds(p: ModelParams) -> tuple[float, float]:
    """Constants (lo, hi) with lo*|v|_H2^2 <= 2 E <= hi*|v|_H2^2.

    Uses (1 + xi^2)^2 <= 2 (1 + xi^4) for the lower constant.
    """
    return 0.5 * min(1.0, p.gamma1, p.delta1), max(1.0, p.gamma1, p.delta1)


def energy_E_sigma(
    eta: SpectralField, sigma: float, p: ModelParams, time: float = 0.0
) -> EnergyReport:
    ops = operators(eta.grid, p)
    c = eta.coefficients
    if sigma * eta.grid.xi_max > OVERFLOW_GUARD:
        raise OverflowGuardError(f"sigma*max|xi| exceeds {OVERFLOW_GUARD}")
    w = _weight(eta.grid, "cosh", sigma)
    e = ops.energy(c)
    es = ops.energy(c, w) if sigma > 0 else e
    h2 = ops.h2_norm(w * c)
    lo, hi = h2_bounds(p)
    # relative slack for rounding
    if not (lo * h2 * h2 <= 2 * es * (1 + 1e-12) and 2 * es <= hi * h2 * h2 * (1 + 1e-12)):
        raise ArithmeticError("modified energy outside its H2 equivalence bounds")
    return EnergyReport(time=time, energy=e, modified_energy=es, sigma=sigma, h2_norm_vsigma=h2)


def pairing_vN(v: SpectralField, sigma: float, p: ModelParams):
    """(total, I1, I2, I3) for the integral of v * N(v)."""
    return operators(v.grid, p).pairing(v.coefficients, sigma)


def h2_norm(v: SpectralField) -> float:
    return weighted_norm(v, GevreyParams(0.0, 2.0), "none")


# -- seeded data ----------------------------------------------------------


def random_field(
    grid: SpectralGrid,
    rng: np.random.Generator,
    rho: float,
    h2_norm_target: float | None = None,
    band_fraction: float = 0.5,
) -> SpectralField:
    """Random real field with coefficients r_k exp(-rho|xi_k|) <xi_k>^-2.

    r_k is complex Gaussian; only |k| < band_fraction * N/2 is populated so
    products up to quadratic order are resolved on the grid.
    """
    n = grid.n_modes
    kmax = int(np.ceil(band_fraction * n / 2)) - 1
    xi = grid.wavenumbers
    h = n // 2
    c = np.zeros(n, dtype=complex)
    r = rng.standard_normal(kmax + 1) + 1j * rng.standard_normal(kmax + 1)
    r[0] = r[0].real
    pos = slice(h, h + kmax + 1)
    c[pos] = r * np.exp(-rho * np.abs(xi[pos])) / (1 + xi[pos] ** 2)
    c[h - kmax : h] = np.conj(c[h + kmax : h : -1])
    fld = SpectralField(grid, c)
    if h2_norm_target is not None:
        fld = fld * (h2_norm_target / h2_norm(fld))
    return fld


def random_ensemble(
    grid: SpectralGrid,
    count: int,
    seed: int,
    rho_range: tuple[float, float] = (0.2, 1.0),
    norm_range: tuple[float, float] = (0.1, 10.0),
) -> list[SpectralField]:
    """Seeded ensemble; decay rates uniform in ``rho_range``, H2 norms log-uniform."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        rho = rng.uniform(*rho_range)
        target = float(np.exp(rng.uniform(np.log(norm_range[0]), np.log(norm_range[1]))))
        out.append(random_field(grid, rng, rho, target))
    return out


def _bump(y, width, radius):
    return np.exp(-(y / width) ** 2) * radius**2 / (y * y + radius**2)


def analytic_datum(
    grid: SpectralGrid,
    seed: int = 0,
    amplitude: float = 1.0,
    width: float = 4.0,
    radius: float = 1.0,
    center_spread: float = 2.0,
    skew: float = 1.0,
) -> SpectralField:
    """Seeded skewed Gaussian-Lorentzian bump with a narrower companion.

    The main bump is exp(-y^2/w^2) r^2/(y^2 + r^2) (1 + skew*y/w). Its poles
    at y = +-i*r make the radius of analyticity exactly ``radius``; the
    Gaussian envelope keeps the tails negligible at the box edges. The skew
    gives the datum an odd part, without which the energy flux of the
    weighted energy vanishes at t = 0. The seed draws the centre, +-10%
    amplitude and +-20% skew perturbations, and the offset (3..6) and
    relative height (0.3..0.5) of the companion.
    """
    rng = np.random.default_rng(seed)
    c = rng.uniform(-center_spread, center_spread)
    a = amplitude * (1 + 0.1 * rng.uniform(-1, 1))
    offset = rng.uniform(3.0, 6.0)
    frac = rng.uniform(0.3, 0.5)
    sk = skew * (1 + 0.2 * rng.uniform(-1, 1))
    y = grid.x - c
    main = _bump(y, width, radius) * (1 + sk * y / width)
    samples = a * (main + frac * _bump(y - offset, 0.6 * width, radius))
    fld = SpectralField.from_samples(samples, grid)
    coeffs = fld.coefficients.copy()
    coeffs[grid.nyquist] = 0.0
    return fld.with_coefficients(coeffs)


def boundary_magnitude(field: SpectralField) -> float:
    """max |eta| at the first and last grid points (truncation diagnostic)."""
    s = field.samples()
    return float(max(abs(s[0]), abs(s[-1])))
