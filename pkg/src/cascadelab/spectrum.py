"""Radial bound states of the confining trap.

The trap is spherically symmetric and the package works in its s-wave
(zero angular momentum) sector.  With the substitution psi(r) = r*chi(r)
the radial problem for -Laplacian + V reduces to a one-dimensional
Dirichlet problem

    -psi'' + V(r) psi = E psi  on (0, r_max),  psi(0) = psi(r_max) = 0,

discretized with second-order central differences on the uniform grid.
Eigenvalues get a two-grid Richardson correction by default, which removes
the leading O(h^2) discretization bias while keeping the plain symmetric
tridiagonal solve as the work horse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ValidationError
from .grids import RadialGrid

FOUR_PI = 4.0 * np.pi

#: Modes must have decayed to this fraction of their peak at the wall,
#: otherwise the box is too small (or the potential is not confining).
DECAY_TOL = 1e-8

#: Default tolerance below which two gap differences count as colliding.
GAP_TOL = 1e-8


@dataclass(frozen=True)
class Potential:
    """Radial confining potential sampled on a grid.

    ``kind`` is one of ``harmonic`` (c2*r^2), ``anharmonic``
    (length-rescaled r^2 + beta*r^4) or ``custom`` (tabulated values).
    The anharmonic trap with scale L is V(r) = (1/L^2) * Vt(r/L) with
    Vt(x) = x^2 + beta*x^4, i.e. energies shrink by L^2 and modes widen
    by L relative to the natural-unit trap.
    """

    kind: str
    grid: RadialGrid
    values: np.ndarray
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "anharmonic", "custom"):
            raise ValidationError(f"unknown potential kind {self.kind!r}")
        if len(self.values) != self.grid.n_points:
            raise ValidationError("potential values do not match the grid")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("potential contains non-finite values")
        self.validate_confining()

    @staticmethod
    def harmonic(grid: RadialGrid, scale: float = 1.0) -> "Potential":
        return Potential.anharmonic(grid, beta=0.0, scale=scale)

    @staticmethod
    def anharmonic(grid: RadialGrid, beta: float, scale: float = 1.0) -> "Potential":
        if beta < 0:
            raise ValidationError(f"quartic strength must be non-negative, got {beta}")
        if scale <= 0:
            raise ValidationError(f"trap scale must be positive, got {scale}")
        x = grid.nodes / scale
        values = (x**2 + beta * x**4) / scale**2
        kind = "harmonic" if beta == 0.0 else "anharmonic"
        return Potential(kind, grid, values, beta=beta, scale=scale)

    @staticmethod
    def tabulated(grid: RadialGrid, values: np.ndarray) -> "Potential":
        return Potential("custom", grid, np.asarray(values, dtype=float))

    def validate_confining(self):
        """Linear-coercivity proxy: V must grow towards the wall.

        Reports the empirical slope c in V(r) >= c*r - C0 measured between
        the midpoint and the wall; a confining trap has c > 0.
        """
        v = self.values
        r = self.grid.nodes
        mid = self.grid.n_points // 2
        slope = (v[-1] - v[mid]) / (r[-1] - r[mid])
        if slope <= 0:
            raise ValidationError(
                f"potential is not coercive on the grid (outer slope {slope:.3e} <= 0)"
            )
        object.__setattr__(self, "_coercivity_slope", slope)
        object.__setattr__(self, "_lower_bound", float(max(0.0, -np.min(v))))

    @property
    def coercivity_slope(self) -> float:
        return self._coercivity_slope

    @property
    def lower_bound_constant(self) -> float:
        """C0 in the bound V(r) >= -C0."""
        return self._lower_bound

    def on_grid(self, grid: RadialGrid) -> np.ndarray:
        """Resample analytic kinds on another grid (used for Richardson)."""
        if self.kind == "custom":
            # tabulated potentials can only be coarsened onto nested grids
            stride = self.grid.n_points // grid.n_points
            if stride * grid.n_points != self.grid.n_points:
                raise ValidationError("custom potential cannot be resampled to this grid")
            return self.values[stride - 1 :: stride]
        x = grid.nodes / self.scale
        return (x**2 + self.beta * x**4) / self.scale**2


@dataclass(frozen=True)
class EigenBasis:
    """The K lowest s-wave eigenpairs of -Laplacian + V.

    ``modes[k]`` samples chi_k on the grid; the normalization is the
    three-dimensional one, 4*pi * integral chi_j chi_k r^2 dr = delta_jk,
    so inner products of radial functions f, g read 4*pi*int f g r^2 dr.
    """

    energies: np.ndarray
    modes: np.ndarray  # shape (K, n_points)
    grid: RadialGrid
    potential: Potential = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.energies)

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """3D inner product of two radial profiles."""
        return FOUR_PI * self.grid.integrate(f * g * self.grid.nodes**2)

    def orthonormality_defect(self) -> float:
        """max_{j,k} |<chi_j, chi_k> - delta_jk| over the computed modes."""
        r2w = self.grid.nodes**2 * self.grid.weights
        gram = FOUR_PI * (self.modes * r2w) @ self.modes.T
        return float(np.max(np.abs(gram - np.eye(self.size))))

    def gaps(self) -> np.ndarray:
        """Matrix of energy differences E_k - E_k'."""
        return self.energies[:, None] - self.energies[None, :]


@dataclass(frozen=True)
class ResonanceReport:
    """Spectral-genericity diagnostics over all index quadruples.

    A quadruple (k,k';j,j') collides when its gap difference
    |(E_k - E_k') - (E_j - E_j')| falls below the tolerance.  Quadruples
    that are resonant by construction are excluded: the diagonal family
    (k,k';k,k') and the zero-gap family with k = k' and j = j', whose gap
    difference vanishes identically for any spectrum.
    """

    gap_tol: float
    collisions: list[tuple[int, int, int, int]]
    min_offdiagonal_gap: float

    @property
    def is_generic(self) -> bool:
        return len(self.collisions) == 0


def _tridiagonal_eigenpairs(potential_values, spacing, n_interior, count):
    inv_h2 = 1.0 / spacing**2
    diag = 2.0 * inv_h2 + potential_values[:n_interior]
    off = np.full(n_interior - 1, -inv_h2)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    return vals, vecs


def solve_radial_eigenpairs(
    potential: Potential,
    grid: RadialGrid,
    count: int,
    richardson: bool = True,
    decay_tol: float = DECAY_TOL,
) -> EigenBasis:
    """Compute the lowest ``count`` s-wave eigenpairs of -Laplacian + V.

    The Dirichlet problem for psi = r*chi lives on the interior nodes;
    psi(r_max) = 0 pins the last grid node.  With ``richardson`` the
    eigenvalues are corrected with a second solve on the 2h grid,
    E = (4*E_h - E_2h)/3, which cancels the O(h^2) finite-difference bias.
    Eigenvectors always come from the fine grid.

    Raises a dimension error when the grid cannot resolve ``count`` modes
    and a domain-truncation error when the highest mode has not decayed
    at the wall (non-confining potential or r_max too small).
    """
    if count < 1:
        raise ValidationError(f"mode count must be positive, got {count}")
    if count >= grid.n_points / 4:
        raise ValidationError(
            f"mode count {count} too large for a grid of {grid.n_points} points"
        )
    if potential.grid is not grid and len(potential.values) != grid.n_points:
        raise ValidationError("potential was sampled on a different grid")

    n_interior = grid.n_points - 1
    energies, vectors = _tridiagonal_eigenpairs(
        potential.values, grid.spacing, n_interior, count
    )

    if richardson:
        if grid.n_points % 2 != 0:
            raise ValidationError("Richardson eigenvalue correction requires even n_points")
        coarse = grid.coarsened()
        coarse_vals, _ = _tridiagonal_eigenpairs(
            potential.on_grid(coarse), coarse.spacing, coarse.n_points - 1, count
        )
        energies = (4.0 * energies - coarse_vals) / 3.0

    if np.any(np.diff(energies) <= 0):
        raise ValidationError(
            "computed spectrum is not strictly increasing: " + np.array2string(energies)
        )

    # psi on the full grid: interior eigenvector plus the pinned wall node
    psi = np.zeros((count, grid.n_points))
    psi[:, :n_interior] = vectors.T

    # undecayed tails mean the Dirichlet box truncates a genuine mode
    tail = np.max(np.abs(psi[:, -max(2, grid.n_points // 100) :]), axis=1)
    peak = np.max(np.abs(psi), axis=1)
    worst = float(np.max(tail / peak))
    if worst > decay_tol:
        raise ValidationError(
            f"eigenfunctions not decayed at r_max (tail fraction {worst:.2e} > {decay_tol:.0e}); "
            "increase r_max or use a confining potential"
        )

    # discrete trapezoid normalization: 4*pi*h*sum(psi^2) = 1 keeps the
    # basis orthonormal to machine precision in the package inner product
    psi /= np.sqrt(FOUR_PI * grid.spacing * np.sum(psi**2, axis=1))[:, None]

    # phase convention: first non-negligible sample positive
    for k in range(count):
        threshold = 1e-12 * np.max(np.abs(psi[k]))
        nz = int(np.argmax(np.abs(psi[k]) > threshold))
        if psi[k, nz] < 0:
            psi[k] = -psi[k]

    modes = psi / grid.nodes
    return EigenBasis(energies=energies, modes=modes, grid=grid, potential=potential)


def check_gap_independence(basis: EigenBasis, gap_tol: float = GAP_TOL) -> ResonanceReport:
    """Enumerate all K^4 quadruples and report near-coincident gap differences.

    Returns the collision list and the minimum |gap difference| over
    quadruples that are not resonant by construction.  With a single mode
    there is nothing to compare and the minimum is +inf.
    """
    k = basis.size
    gaps = basis.gaps()
    delta = gaps[:, :, None, None] - gaps[None, None, :, :]

    idx = np.arange(k)
    diagonal = (idx[:, None, None, None] == idx[None, None, :, None]) & (
        idx[None, :, None, None] == idx[None, None, None, :]
    )
    trivially_zero = (idx[:, None, None, None] == idx[None, :, None, None]) & (
        idx[None, None, :, None] == idx[None, None, None, :]
    )
    excluded = diagonal | trivially_zero

    magnitudes = np.abs(delta)
    informative = ~excluded
    if not np.any(informative):
        return ResonanceReport(gap_tol, [], float("inf"))

    colliding = informative & (magnitudes < gap_tol)
    collisions = [tuple(int(i) for i in q) for q in np.argwhere(colliding)]
    min_gap = float(np.min(magnitudes[informative]))
    return ResonanceReport(gap_tol, collisions, min_gap)


def mode_product(basis: EigenBasis, k: int, kp: int) -> np.ndarray:
    """Pointwise product chi_k * chi_k' on the radial grid."""
    if not (0 <= k < basis.size and 0 <= kp < basis.size):
        raise ValidationError(
            f"mode indices ({k}, {kp}) out of range for a basis of size {basis.size}"
        )
    return basis.modes[k] * basis.modes[kp]
