"""Periodic grids, vector fields on them, and the discrete Fourier calculus.

Fields live on the torus [0, L)^n sampled at G points per axis.  The
transform normalization makes the transform of exp(2 pi i k.x / L) a unit
impulse at frequency k / L, so multiplier formulas read exactly as in the
continuum: differentiation multiplies mode z by 2 pi i z_j.

The frequency set uses the signed representatives k in [-G/2, G/2); the
unmatched Nyquist plane (index -G/2 on any axis) is excluded from every
differentiation and inversion multiplier, and the zero mode is reserved
for the mean, which solvers project away and report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicGrid",
    "GridFunction",
    "SpectralField",
    "dft_forward",
    "dft_inverse",
    "gradient",
    "norm_l2",
    "norm_l2star",
    "conjugate_exponent",
    "spectral_norm_l2",
    "project_mean_zero",
    "random_band_limited",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on the torus [0, L)^n with G points per axis.

    G must be even and at least 4 so the retained frequencies come in
    conjugate pairs below an identifiable Nyquist plane.
    """

    n: int
    G: int
    L: float = 1.0

    def __post_init__(self):
        if not 2 <= self.n <= 4:
            raise ValueError(f"supported dimensions are 2 <= n <= 4, got n={self.n}")
        if self.G < 4 or self.G % 2 != 0:
            raise ValueError(f"G must be even and >= 4, got G={self.G}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"period length must be positive, got L={self.L}")

    @property
    def shape(self) -> tuple:
        return (self.G,) * self.n

    @property
    def h(self) -> float:
        """Mesh width L / G."""
        return self.L / self.G

    @property
    def num_points(self) -> int:
        return self.G**self.n

    def axis_coords(self) -> np.ndarray:
        return self.h * np.arange(self.G)

    def points(self) -> np.ndarray:
        """Coordinates of all grid points, shape (n, G, ..., G)."""
        axes = np.meshgrid(*([self.axis_coords()] * self.n), indexing="ij")
        return np.stack(axes, axis=0)

    def axis_freq_indices(self) -> np.ndarray:
        """Signed integer representatives [0, 1, ..., G/2-1, -G/2, ..., -1]."""
        k = np.arange(self.G)
        k[k >= self.G // 2] -= self.G
        return k

    def frequency_vectors(self) -> np.ndarray:
        """Frequencies z = k / L for all modes, shape (n, G, ..., G)."""
        z1d = self.axis_freq_indices() / self.L
        axes = np.meshgrid(*([z1d] * self.n), indexing="ij")
        return np.stack(axes, axis=0)

    def frequency_norm(self) -> np.ndarray:
        return np.sqrt((self.frequency_vectors() ** 2).sum(axis=0))

    def nyquist_mask(self) -> np.ndarray:
        """True on modes with index -G/2 on at least one axis."""
        hit = np.arange(self.G) == self.G // 2
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.G
            mask |= hit.reshape(shape)
        return mask

    def band_mask(self, kmax: int) -> np.ndarray:
        """True on modes with |k_j| <= kmax on every axis."""
        k = self.axis_freq_indices()
        inside = np.abs(k) <= kmax
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.n):
            shape = [1] * self.n
            shape[axis] = self.G
            mask &= inside.reshape(shape)
        return mask


def _check_values(grid: PeriodicGrid, values: np.ndarray, kind: str) -> np.ndarray:
    if values.ndim != grid.n + 1 or values.shape[1:] != grid.shape:
        raise ValueError(
            f"{kind} values must have shape (C, {', '.join(map(str, grid.shape))}), got {values.shape}"
        )
    return values


@dataclass(frozen=True)
class GridFunction:
    """Real vector field sampled on a grid, values of shape (C, G, ..., G).

    The component index is slowest, then the grid axes in row-major order
    (axis 1 slowest), matching the on-disk field layout.
    """

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        _check_values(self.grid, arr, "field")
        object.__setattr__(self, "values", arr)

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, grid: PeriodicGrid, components: int) -> "GridFunction":
        return cls(grid, np.zeros((components,) + grid.shape))

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            if other.grid != self.grid or other.values.shape != self.values.shape:
                raise ValueError("grid functions are not compatible")
            return GridFunction(self.grid, op(self.values, other.values))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def as_gradient(self, N: int) -> np.ndarray:
        """Reinterpret an N*n-component field as gradients, shape (N, n, ...)."""
        n = self.grid.n
        if self.components != N * n:
            raise ValueError(f"expected {N * n} components, got {self.components}")
        return self.values.reshape(N, n, *self.grid.shape)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of a field, complex, same (C, G, ..., G) layout.

    Axis order follows the transform's native index order; use the grid's
    frequency helpers to interpret positions.
    """

    grid: PeriodicGrid
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex)
        _check_values(self.grid, arr, "coefficient")
        object.__setattr__(self, "coeffs", arr)

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]


def dft_forward(u: GridFunction) -> SpectralField:
    """Forward transform; exp(2 pi i k.x / L) maps to a unit impulse at k / L."""
    axes = tuple(range(1, u.grid.n + 1))
    coeffs = np.fft.fftn(u.values, axes=axes) / u.grid.num_points
    return SpectralField(u.grid, coeffs)


def dft_inverse(U: SpectralField, imag_tol: float = 1e-9) -> GridFunction:
    """Inverse transform back to a real field.

    Raises if the coefficients are not conjugate-symmetric enough for the
    result to be real to within ``imag_tol`` (relative).
    """
    axes = tuple(range(1, U.grid.n + 1))
    vals = np.fft.ifftn(U.coeffs * U.grid.num_points, axes=axes)
    scale = max(1e-300, float(np.abs(vals.real).max()))
    if float(np.abs(vals.imag).max()) > imag_tol * max(1.0, scale):
        raise ValueError("coefficients are not conjugate-symmetric: inverse is not real")
    return GridFunction(U.grid, vals.real.copy())


def _derivative_multipliers(grid: PeriodicGrid) -> np.ndarray:
    """2 pi i z_j per mode with the Nyquist plane zeroed, shape (n, ...)."""
    z = grid.frequency_vectors()
    keep = ~grid.nyquist_mask()
    return 2j * np.pi * z * keep


def gradient(u: GridFunction) -> GridFunction:
    """Spectral gradient of an N-component field, returned with N*n components.

    Component order is (alpha, j) with alpha slowest.  Exact for fields
    band-limited below the Nyquist plane; coefficients on that plane are
    zeroed.
    """
    grid = u.grid
    N = u.components
    U = dft_forward(u)
    mult = _derivative_multipliers(grid)  # (n, ...)
    dcoeffs = U.coeffs[:, None, ...] * mult[None, ...]  # (N, n, ...)
    field = dft_inverse(SpectralField(grid, dcoeffs.reshape(N * grid.n, *grid.shape)))
    return field


def norm_l2(u: GridFunction) -> float:
    """Riemann-sum L2 norm: sqrt(h^n sum over points of |u(x)|^2)."""
    return float(np.sqrt(u.grid.h**u.grid.n * np.sum(u.values**2)))


def conjugate_exponent(n: int) -> float:
    """The Sobolev-conjugate exponent 2n / (n - 2); defined for n >= 3."""
    if n < 3:
        raise ValueError(f"conjugate exponent requires n >= 3, got n={n}")
    return 2.0 * n / (n - 2.0)


def norm_l2star(u: GridFunction) -> float:
    """Riemann-sum L^{2*} norm of the pointwise Euclidean magnitude."""
    p = conjugate_exponent(u.grid.n)
    mags = np.sqrt((u.values**2).sum(axis=0))
    return float((u.grid.h**u.grid.n * np.sum(mags**p)) ** (1.0 / p))


def spectral_norm_l2(U: SpectralField) -> float:
    """L2 norm computed from coefficients: sqrt(L^n sum |u_hat|^2)."""
    return float(np.sqrt(U.grid.L**U.grid.n * np.sum(np.abs(U.coeffs) ** 2)))


def project_mean_zero(u: GridFunction):
    """Remove the per-component mean; returns (projected, dropped_mean)."""
    axes = tuple(range(1, u.grid.n + 1))
    mean = u.values.mean(axis=axes)
    return GridFunction(u.grid, u.values - mean.reshape((-1,) + (1,) * u.grid.n)), mean


def random_band_limited(
    grid: PeriodicGrid,
    components: int,
    rng: np.random.Generator,
    kmax: int | None = None,
) -> GridFunction:
    """Random real mean-zero field supported on modes with |k_j| <= kmax.

    Built by low-pass filtering white noise, so the result is exactly
    band-limited below the Nyquist plane and has exactly zero mean.
    """
    if kmax is None:
        kmax = max(1, grid.G // 4)
    if kmax >= grid.G // 2:
        raise ValueError(f"kmax must stay below the Nyquist index G/2, got {kmax}")
    white = rng.normal(size=(components,) + grid.shape)
    axes = tuple(range(1, grid.n + 1))
    spec = np.fft.fftn(white, axes=axes)
    mask = grid.band_mask(kmax)
    mask = mask & ~grid.nyquist_mask()
    spec *= mask
    spec[(slice(None),) + (0,) * grid.n] = 0.0
    vals = np.fft.ifftn(spec, axes=axes).real
    return GridFunction(grid, vals)
