"""Slow, independent cross-checks: dense matrix solves and brute-force minima.

The dense path assembles the discrete operator u -> A:Du as an explicit
matrix through dense transform matrices built from exponentials, never
touching the FFT solver, then solves the linear system directly.  The
brute-force ellipticity estimate samples the sphere densely with no
refinement.  Both exist to disagree loudly if the fast paths drift.
"""

from __future__ import annotations

import numpy as np

from .ellipticity import NonEllipticError
from .grid import GridFunction, PeriodicGrid, project_mean_zero
from .sampling import unit_sphere_points
from .tensor import ConstantTensor, direction_matrix

__all__ = ["DENSE_SIZE_CAP", "assemble_dense", "solve_dense", "brute_nu"]

DENSE_SIZE_CAP = 4096


def _check_cap(A: ConstantTensor, grid: PeriodicGrid) -> int:
    size = A.N * grid.num_points
    if size > DENSE_SIZE_CAP:
        raise ValueError(
            f"dense assembly of size {size} exceeds the cap {DENSE_SIZE_CAP}; use the spectral path"
        )
    if A.n != grid.n:
        raise ValueError(f"tensor has n={A.n} but grid has n={grid.n}")
    return size


def _dense_derivative_matrices(grid: PeriodicGrid) -> np.ndarray:
    """Dense matrices of the spectral derivatives, shape (n, G^n, G^n).

    Built by sandwiching diagonal frequency multipliers between explicit
    transform matrices (forward W[k, x] = exp(-2 pi i k x / G) / G and its
    inverse), with whole modes on any Nyquist plane zeroed to match the
    retained-frequency convention.
    """
    G, n, L = grid.G, grid.n, grid.L
    j = np.arange(G)
    W1 = np.exp(-2j * np.pi * np.outer(j, j) / G) / G
    Winv1 = np.exp(2j * np.pi * np.outer(j, j) / G)
    W = W1
    Winv = Winv1
    for _ in range(n - 1):
        W = np.kron(W, W1)
        Winv = np.kron(Winv, Winv1)
    zvecs = grid.frequency_vectors().reshape(n, -1)  # (n, G^n), row-major modes
    keep = (~grid.nyquist_mask()).ravel()
    mats = np.empty((n, G**n, G**n))
    for axis in range(n):
        mult = 2j * np.pi * zvecs[axis] * keep
        D = Winv @ (mult[:, None] * W)
        if np.abs(D.imag).max() > 1e-10 * max(1.0, np.abs(D.real).max()):
            raise AssertionError("derivative matrix should be real after symmetrization")
        mats[axis] = D.real
    return mats


def assemble_dense(A: ConstantTensor, grid: PeriodicGrid) -> np.ndarray:
    """The operator u -> A:Du as a dense (N G^n, N G^n) matrix.

    Fields are flattened component-slowest, grid axes row-major, matching
    GridFunction.values.ravel().  The kernel consists of the N constant
    modes together with all Nyquist-plane modes.
    """
    size = _check_cap(A, grid)
    D = _dense_derivative_matrices(grid)  # (n, G^n, G^n)
    P = grid.num_points
    M = np.zeros((size, size))
    for a in range(A.N):
        for b in range(A.N):
            block = np.einsum("j,jxy->xy", A.entries[a, b], D)
            M[a * P : (a + 1) * P, b * P : (b + 1) * P] = block
    return M


def solve_dense(A: ConstantTensor, f: GridFunction):
    """Direct dense solve of A:Du = f - mean(f) on a small grid.

    The N constant modes are pinned by replacing one equation per
    component with a zero-mean constraint; the remaining (Nyquist)
    rank deficiency is closed by the minimum-norm least-squares solve,
    which leaves those modes at exactly zero.  Raises NonEllipticError
    when a residual survives on a retained mode.
    """
    grid = f.grid
    _check_cap(A, grid)
    f0, _ = project_mean_zero(f)
    M = assemble_dense(A, grid)
    P = grid.num_points
    rhs = f0.values.ravel().copy()
    for a in range(A.N):
        row = a * P
        M[row, :] = 0.0
        M[row, a * P : (a + 1) * P] = 1.0 / P
        rhs[row] = 0.0
    sol, _, _, _ = np.linalg.lstsq(M, rhs, rcond=None)
    resid = M @ sol - rhs
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    if float(np.linalg.norm(resid)) > 1e-8 * scale:
        worst = int(np.argmax(np.abs(resid)))
        comp, flat = divmod(worst, P)
        idx = np.unravel_index(flat, grid.shape)
        raise NonEllipticError(
            f"dense system is singular beyond the known kernel; residual peaks at "
            f"component {comp}, grid point {idx}"
        )
    return GridFunction(grid, sol.reshape((A.N,) + grid.shape))


def brute_nu(A: ConstantTensor, samples: int = 100_000) -> float:
    """Refinement-free min of sigma_min(A a) over a dense sphere sample.

    Deliberately slow and simple; the answer can exceed the true nu(A)
    only by the sampling gap of the point set.
    """
    if samples < 1000:
        raise ValueError(f"brute-force sampling needs at least 1000 points, got {samples}")
    dirs = unit_sphere_points(A.n, samples)
    best = np.inf
    for start in range(0, len(dirs), 32768):
        chunk = dirs[start : start + 32768]
        sig = np.linalg.svd(direction_matrix(A, chunk), compute_uv=False)[..., -1]
        best = min(best, float(sig.min()))
    return best
