"""Periodic spectral discretization.

Grids, transforms, Fourier multipliers, dealiased products and
overflow-safe Gevrey/Sobolev norms on the periodic box [-L/2, L/2).

Coefficients are stored in centered order, k = -N/2, ..., N/2 - 1, with the
convention

    eta_hat(xi_k) = (1/N) * sum_j eta(x_j) * exp(-i xi_k x_j),   x_j = -L/2 + j L/N,

so ``eta_hat(0)`` is the mean of the samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.special import logsumexp

# cosh/exp overflow double precision near 710
OVERFLOW_GUARD = 600.0

WeightKind = Literal["cosh", "sech", "exp", "inv_exp", "none"]


class GridMismatchError(ValueError):
    pass


class OverflowGuardError(ValueError):
    pass


class SymmetryError(ValueError):
    """Coefficients are not the spectrum of a real field."""


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform periodic grid of ``n_modes`` points on a box of length ``length``.

    The wavenumber array is read-only; grids compare equal when ``n_modes`` and
    ``length`` agree.
    """

    n_modes: int
    length: float
    k: np.ndarray = field(init=False, repr=False)
    wavenumbers: np.ndarray = field(init=False, repr=False)
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_modes
        if isinstance(n, bool) or int(n) != n:
            raise ValueError(f"n_modes must be an integer, got {n!r}")
        n = int(n)
        if n < 8 or n % 2:
            raise ValueError(f"n_modes must be even and >= 8, got {n}")
        length = float(self.length)
        if not np.isfinite(length) or length <= 0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "length", length)

        k = np.arange(-n // 2, n // 2)
        xi = (2.0 * np.pi / length) * k
        x = -length / 2 + np.arange(n) * (length / n)
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        for name, arr in (("k", k), ("wavenumbers", xi), ("x", x), ("_sign", sign)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        if not isinstance(other, SpectralGrid):
            return NotImplemented
        return self.n_modes == other.n_modes and self.length == other.length

    def __hash__(self):
        return hash((self.n_modes, self.length))

    @property
    def xi_max(self) -> float:
        return np.pi * self.n_modes / self.length

    @property
    def nyquist(self) -> int:
        """Index of the unpaired k = -N/2 mode in the centered layout."""
        return 0

    def refined(self, factor: int = 2) -> "SpectralGrid":
        return SpectralGrid(self.n_modes * factor, self.length)

    # -- padded real-space evaluation ------------------------------------
    #
    # The unpaired Nyquist coefficient is split evenly between k = +-N/2 so
    # that the trigonometric interpolant stays real; products always return
    # a zero Nyquist mode.

    def padded_samples(self, coeffs: np.ndarray, m: int) -> np.ndarray:
        """Values of the trigonometric interpolant on ``m >= N`` equispaced points."""
        h = self.n_modes // 2
        half = np.zeros(m // 2 + 1, dtype=complex)
        half[:h] = coeffs[h:] * self._sign[h:]
        nyq = 0.5 * coeffs[0].real * self._sign[0]
        if m > self.n_modes:
            half[h] = nyq
        else:
            half[h] = 2 * nyq
        return np.fft.irfft(half, n=m) * m

    def from_padded_samples(self, samples: np.ndarray) -> np.ndarray:
        """Centered coefficients |k| < N/2 of real samples on a padded grid."""
        m = samples.shape[-1]
        h = self.n_modes // 2
        spectrum = np.fft.rfft(samples) / m
        out = np.empty(self.n_modes, dtype=complex)
        out[h:] = spectrum[:h] * self._sign[h:]
        out[h - 1 : 0 : -1] = np.conj(out[h + 1 :])
        out[h] = out[h].real
        out[0] = 0.0
        return out


def make_grid(n_modes: int, length: float) -> SpectralGrid:
    return SpectralGrid(n_modes, length)


@dataclass(frozen=True)
class GevreyParams:
    sigma: float
    s: float = 2.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")


def forward_transform(samples, grid: SpectralGrid) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n_modes,):
        raise GridMismatchError(
            f"expected {grid.n_modes} samples, got shape {samples.shape}"
        )
    return grid._sign * np.fft.fftshift(np.fft.fft(samples)) / grid.n_modes


def hermitian_residue(coeffs: np.ndarray) -> float:
    """Largest violation of c(-k) = conj(c(k)), relative to max |c|."""
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    h = coeffs.size // 2
    pos = coeffs[h + 1 :]
    neg = coeffs[h - 1 : 0 : -1]
    res = max(
        np.max(np.abs(pos - np.conj(neg)), initial=0.0),
        abs(coeffs[h].imag),
        abs(coeffs[0].imag),
    )
    return float(res / scale)


def inverse_transform(coeffs, grid: SpectralGrid, tol: float = 1e-12) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (grid.n_modes,):
        raise GridMismatchError(
            f"expected {grid.n_modes} coefficients, got shape {coeffs.shape}"
        )
    z = np.fft.ifft(np.fft.ifftshift(coeffs * grid._sign)) * grid.n_modes
    scale = np.max(np.abs(z))
    if scale > 0 and np.max(np.abs(z.imag)) > tol * scale:
        raise SymmetryError(
            f"imaginary residue {np.max(np.abs(z.imag)) / scale:.3e} exceeds {tol:g}"
        )
    return z.real.copy()


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A real field on ``grid`` held by its centered Fourier coefficients."""

    grid: SpectralGrid
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (self.grid.n_modes,):
            raise GridMismatchError(
                f"expected {self.grid.n_modes} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_samples(cls, samples, grid: SpectralGrid) -> "SpectralField":
        return cls(grid, forward_transform(samples, grid))

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_modes, dtype=complex))

    def samples(self) -> np.ndarray:
        return inverse_transform(self.coefficients, self.grid)

    def hermitian_residue(self) -> float:
        return hermitian_residue(self.coefficients)

    def with_coefficients(self, coeffs) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coefficients + other.coefficients)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coefficients - other.coefficients)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.grid, self.coefficients * scalar)

    __rmul__ = __mul__


def _check_same_grid(*fields: SpectralField) -> None:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grid mismatch: {g} vs {f.grid}")


def apply_multiplier(
    field: SpectralField,
    m: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    check: bool = True,
    tol: float = 1e-12,
) -> SpectralField:
    """Pointwise Fourier multiplier ``m(xi_k) * eta_hat(xi_k)``.

    ``m`` may be a callable evaluated on the wavenumbers or a precomputed
    array. With ``check`` the result must still describe a real field;
    a multiplier without conjugate symmetry raises :class:`SymmetryError`.
    """
    values = m(field.grid.wavenumbers) if callable(m) else np.asarray(m)
    out = SpectralField(field.grid, values * field.coefficients)
    if check and out.hermitian_residue() > tol:
        raise SymmetryError("multiplier does not preserve real-valuedness")
    return out


def derivative_symbol(grid: SpectralGrid, order: int = 1) -> np.ndarray:
    """(i xi)^order with the unpaired Nyquist mode zeroed for odd orders."""
    sym = (1j * grid.wavenumbers) ** order
    if order % 2:
        sym[grid.nyquist] = 0.0
    return sym


def dealias_product(
    f: SpectralField, g: SpectralField, h: SpectralField | None = None
) -> SpectralField:
    """Alias-free coefficients of ``f*g`` (or ``f*g*h``) truncated to |k| < N/2.

    Quadratic products are evaluated on a 2N grid, cubic ones on a 4N grid.
    """
    fields = (f, g) if h is None else (f, g, h)
    _check_same_grid(*fields)
    grid = f.grid
    m = grid.n_modes * (2 if h is None else 4)
    seen: dict[int, np.ndarray] = {}
    prod = np.ones(m)
    for fld in fields:
        if id(fld) not in seen:
            seen[id(fld)] = grid.padded_samples(fld.coefficients, m)
        prod = prod * seen[id(fld)]
    return SpectralField(grid, grid.from_padded_samples(prod))


def log_cosh(x) -> np.ndarray:
    """log(cosh(x)) without overflow; accurate near zero."""
    a = np.abs(np.asarray(x, dtype=float))
    small = a < 20.0
    out = np.empty_like(a)
    s = np.sinh(a[small] / 2)
    out[small] = np.log1p(2 * s * s)
    big = a[~small]
    out[~small] = big + np.log1p(np.exp(-2 * big)) - np.log(2.0)
    return out


def gevrey_weight(kind: WeightKind, sigma: float, grid: SpectralGrid) -> np.ndarray:
    """Real even weight cosh/sech/exp/inv_exp of sigma*|xi_k| on the grid."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    arg = sigma * np.abs(grid.wavenumbers)
    if kind in ("cosh", "exp") and sigma * grid.xi_max > OVERFLOW_GUARD:
        raise OverflowGuardError(
            f"sigma*max|xi| = {sigma * grid.xi_max:.1f} exceeds {OVERFLOW_GUARD}"
        )
    if kind == "cosh":
        return np.cosh(arg)
    if kind == "sech":
        # 1/cosh underflows gracefully to 0
        return np.exp(-log_cosh(arg))
    if kind == "exp":
        return np.exp(arg)
    if kind == "inv_exp":
        return np.exp(-arg)
    if kind == "none":
        return np.ones_like(arg)
    raise ValueError(f"unknown weight kind {kind!r}")


def log_weight(kind: WeightKind, sigma: float, xi: np.ndarray) -> np.ndarray:
    arg = sigma * np.abs(xi)
    if kind == "cosh":
        return log_cosh(arg)
    if kind == "exp":
        return arg
    if kind == "none":
        return np.zeros_like(arg)
    raise ValueError(f"unsupported norm weight {kind!r}")


def log_weighted_norm(
    field: SpectralField, params: GevreyParams, weight_kind: WeightKind = "cosh"
) -> float:
    """Natural log of :func:`weighted_norm`; -inf for the zero field."""
    c = field.coefficients
    mask = c != 0
    if not mask.any():
        return -np.inf
    xi = field.grid.wavenumbers[mask]
    terms = (
        2 * log_weight(weight_kind, params.sigma, xi)
        + params.s * np.log1p(xi * xi)
        + 2 * np.log(np.abs(c[mask]))
    )
    return 0.5 * (np.log(field.grid.length) + float(logsumexp(terms)))


def weighted_norm(
    field: SpectralField, params: GevreyParams, weight_kind: WeightKind = "cosh"
) -> float:
    """sqrt(L * sum_k W(xi_k)^2 <xi_k>^(2s) |eta_hat_k|^2), W one of cosh/exp/1.

    Accumulated in log space, so weights up to exp(600) do not overflow.
    """
    if weight_kind in ("cosh", "exp") and params.sigma * field.grid.xi_max > OVERFLOW_GUARD:
        raise OverflowGuardError(
            f"sigma*max|xi| = {params.sigma * field.grid.xi_max:.1f} exceeds {OVERFLOW_GUARD}"
        )
    return float(np.exp(log_weighted_norm(field, params, weight_kind)))


def sobolev_norm(field: SpectralField, s: float = 2.0) -> float:
    return weighted_norm(field, GevreyParams(0.0, s), "none")


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """Real-space quadrature (L/N) * sum_j f(x_j) g(x_j)."""
    _check_same_grid(f, g)
    grid = f.grid
    return float(np.dot(f.samples(), g.samples()) * (grid.length / grid.n_modes))
