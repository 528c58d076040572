"""Build simulation assets from a configuration.

One place turns a SimulationConfig into grids, basis, kernels, and
coefficient sets, so the CLI, the invariant suite, and the tests all run
through identical construction paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import (
    CoefficientSet,
    CoeffOptions,
    assemble_limit_matrix,
    two_mode_coefficients,
)
from .config import SimulationConfig
from .dynamics import SolverOptions, diagnostics, integrate_limit
from .errors import ConfigError, ValidationError
from .grids import MomentumGrid, RadialGrid
from .kernels import InteractionKernel, gaussian_kernel
from .spectrum import EigenBasis, Potential, solve_radial_eigenpairs


@dataclass
class Assets:
    """Everything derivable from a config, built lazily and cached."""

    config: SimulationConfig

    def __post_init__(self):
        self._cache: dict = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def grid(self) -> RadialGrid:
        t = self.config.trap
        return self._get("grid", lambda: RadialGrid(t.r_max, t.n_points))

    @property
    def potential(self) -> Potential:
        return self._get("potential", lambda: build_potential(self.config, self.grid))

    @property
    def basis(self) -> EigenBasis:
        return self._get(
            "basis",
            lambda: solve_radial_eigenpairs(self.potential, self.grid, self.config.trap.modes),
        )

    @property
    def momenta(self) -> MomentumGrid:
        def build():
            max_gap = float(self.basis.energies[-1] - self.basis.energies[0])
            return MomentumGrid(self.config.rho_max_value(max_gap), self.config.momentum.n_rho)

        return self._get("momenta", build)

    @property
    def coupling(self) -> InteractionKernel:
        k = self.config.kernels
        return self._get(
            "coupling",
            lambda: gaussian_kernel(
                "coupling", self.grid, self.momenta, k.coupling_amplitude, k.coupling_width
            ),
        )

    @property
    def pair(self) -> InteractionKernel:
        k = self.config.kernels
        return self._get(
            "pair",
            lambda: gaussian_kernel(
                "pair", self.grid, self.momenta, k.pair_amplitude, k.pair_width
            ),
        )

    @property
    def coeff_options(self) -> CoeffOptions:
        c = self.config.conventions
        return CoeffOptions(
            pi_convention=c.fgr_pi_factor,
            include_degenerate=c.include_degenerate,
            lamb_mode=c.lamb_mode,
            eps_policy=c.eps_policy,
        )

    @property
    def coeffs(self) -> CoefficientSet:
        def build():
            preset = self.config.coefficient_preset()
            if preset is not None:
                return two_mode_coefficients(preset, size=self.config.trap.modes)
            return assemble_limit_matrix(self.basis, self.coupling, self.pair, self.coeff_options)

        return self._get("coeffs", build)

    @property
    def energies(self) -> np.ndarray:
        if self.config.coefficient_preset() is not None:
            # synthetic coefficients carry mock unit-spaced levels
            return np.arange(self.config.trap.modes, dtype=float)
        return self.basis.energies

    @property
    def solver_options(self) -> SolverOptions:
        d = self.config.dynamics
        return SolverOptions(rtol=d.rtol, atol=d.atol, n_samples=d.samples)


def build_potential(config: SimulationConfig, grid: RadialGrid) -> Potential:
    t = config.trap
    if t.kind == "custom":
        if not t.file:
            raise ConfigError("custom trap requires trap.file")
        values = _read_tabulated(t.file, grid)
        return Potential.tabulated(grid, values)
    beta = 0.0 if t.kind == "harmonic" else t.beta
    return Potential.anharmonic(grid, beta=beta, scale=t.scale)


def _read_tabulated(path: str, grid: RadialGrid) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", comments="#")
    except OSError as exc:
        raise ConfigError(f"cannot read trap file {path}: {exc}")
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValidationError("trap file must have two columns: r, V(r)")
    r, v = data[:, 0], data[:, 1]
    if len(r) != grid.n_points or not np.allclose(r, grid.nodes, rtol=0, atol=1e-12):
        raise ValidationError("trap file radii do not match the configured grid")
    return v


def evolve(config: SimulationConfig, assets: Assets | None = None):
    """Integrate the limit cascade for the configured run.

    Returns (trajectory, diagnostics series, assets).
    """
    assets = assets or Assets(config)
    state = config.initial_state()
    traj = integrate_limit(
        assets.coeffs, state, config.dynamics.t_end, assets.solver_options
    )
    series = diagnostics(traj, assets.energies, assets.coeffs)
    return traj, series, assets
