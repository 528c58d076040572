import numpy as np
import pytest

from cascadelab.errors import ValidationError
from cascadelab.grids import MomentumGrid, RadialGrid
from cascadelab.kernels import (
    fourier_radial,
    gaussian_kernel,
    radial_convolution,
)


@pytest.fixture(scope="module")
def grid():
    return RadialGrid(12.0, 2000)


@pytest.fixture(scope="module")
def momenta():
    return MomentumGrid(8.0, 4096)


def test_gaussian_self_transform(grid, momenta):
    profile = np.exp(-grid.nodes**2 / 2.0)
    hat = fourier_radial(profile, grid, momenta)
    exact = (2.0 * np.pi) ** 1.5 * np.exp(-momenta.nodes**2 / 2.0)
    window = momenta.nodes <= 4.0
    rel = np.abs(hat[window] - exact[window]) / exact[window]
    assert np.max(rel) < 1e-8


def test_zero_frequency_is_volume_integral(grid):
    profile = np.exp(-grid.nodes**2 / 2.0)
    hat0 = fourier_radial(profile, grid, np.array([0.0]))[0]
    direct = 4.0 * np.pi * grid.integrate(profile * grid.nodes**2)
    assert hat0 == pytest.approx(direct, rel=1e-14)


def test_unit_ball_transform():
    # node at r = 1 exactly; half weight at the jump keeps trapezoid clean
    grid = RadialGrid(12.0, 2400)
    momenta = MomentumGrid(8.0, 2048)
    ball = (grid.nodes < 1.0).astype(float)
    ball[np.isclose(grid.nodes, 1.0)] = 0.5
    hat = fourier_radial(ball, grid, momenta)
    rho = momenta.nodes
    exact = 4.0 * np.pi * (np.sin(rho) - rho * np.cos(rho)) / rho**3
    assert np.max(np.abs(hat - exact)) < 1e-4 * (4.0 * np.pi / 3.0)


def test_non_finite_profile_rejected(grid, momenta):
    profile = np.exp(-grid.nodes)
    profile[10] = np.nan
    with pytest.raises(ValidationError):
        fourier_radial(profile, grid, momenta)


def test_gaussian_kernel_closed_form_transform(grid, momenta):
    kernel = gaussian_kernel("coupling", grid, momenta, amplitude=2.5, width=0.8)
    exact = 2.5 * (2.0 * np.pi * 0.8**2) ** 1.5 * np.exp(-(0.8 * momenta.nodes) ** 2 / 2.0)
    assert np.max(np.abs(kernel.transform - exact)) < 1e-10 * exact[0]
    norms = kernel.norms()
    # grid norms see the first node at r = h, not the origin
    assert norms["linf"] == pytest.approx(2.5, rel=1e-4)
    assert norms["l1"] == pytest.approx(2.5 * (2 * np.pi * 0.64) ** 1.5, rel=1e-10)
    assert np.isfinite(norms["weighted_l2"])


def test_kernel_must_decay(momenta):
    grid = RadialGrid(2.0, 64)
    with pytest.raises(ValidationError, match="decayed"):
        gaussian_kernel("coupling", grid, momenta, amplitude=1.0, width=5.0)


def test_transform_at_matches_grid_nodes(grid, momenta):
    kernel = gaussian_kernel("pair", grid, momenta, amplitude=1.0, width=1.0)
    sample = kernel.transform_at(momenta.nodes[100:103])
    # fresh quadrature sums in a different BLAS order than the cached batch
    assert np.allclose(sample, kernel.transform[100:103], rtol=1e-13, atol=0)


def test_radial_convolution_gaussian_closed_form():
    grid = RadialGrid(24.0, 2400)
    s1, s2 = 1.0, 0.7
    f = np.exp(-grid.nodes**2 / (2 * s1**2))
    g = np.exp(-grid.nodes**2 / (2 * s2**2))
    s12 = np.hypot(s1, s2)
    exact = (2 * np.pi) ** 1.5 * (s1 * s2 / s12) ** 3 * np.exp(-grid.nodes**2 / (2 * s12**2))
    conv = radial_convolution(f, g, grid)
    assert np.max(np.abs(conv - exact)) < 1e-9 * exact.max()


def test_radial_convolution_commutes():
    grid = RadialGrid(16.0, 800)
    f = np.exp(-grid.nodes**2)
    g = grid.nodes**2 * np.exp(-grid.nodes**2 / 2.0)
    fg = radial_convolution(f, g, grid)
    gf = radial_convolution(g, f, grid)
    assert np.max(np.abs(fg - gf)) < 1e-10 * np.max(np.abs(fg))
