import numpy as np
import pytest

from ksflow.grids import (
    FieldError,
    RadialField,
    RadialGrid,
    CartesianGrid3,
    Trajectory,
    gaussian_field,
    gaussian_field3,
    integrate_radial,
    radial_laplacian,
    read_checkpoint,
    weighted_lp_norm,
    write_checkpoint,
)

GRID = RadialGrid(4096, 12.0)


def mc_quadrature_oracle(fn, s, n=500_000, seed=7, box=6.0):
    """3D Monte-Carlo quadrature of fn(|v|) |v|^s over [-box, box]^3.

    Returns (estimate, standard error).
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-box, box, size=(n, 3))
    r = np.linalg.norm(pts, axis=1)
    vol = (2.0 * box) ** 3
    vals = vol * fn(r) * r**s
    return float(np.mean(vals)), float(np.std(vals) / np.sqrt(n))


class TestIntegrateRadial:
    def test_gaussian_mass_against_mc_oracle(self):
        f = gaussian_field(GRID, sigma=1.0, mass=1.0)
        prof = lambda r: (2 * np.pi) ** -1.5 * np.exp(-0.5 * r**2)
        oracle, stderr = mc_quadrature_oracle(prof, 0.0)
        got = integrate_radial(f, 0.0)
        assert abs(got - 1.0) <= 1e-6
        assert abs(got - oracle) <= 3.0 * stderr

    def test_refinement_shrinks_quadrature_error(self):
        # exp(-r) has a genuine midpoint-rule error at the origin boundary
        errs = []
        for n in (64, 256, 1024):
            grid = RadialGrid(n, 40.0)
            f = RadialField(grid, np.exp(-grid.centers))
            errs.append(abs(integrate_radial(f, 0.0) - 8.0 * np.pi))
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] <= 1e-6 * 8 * np.pi

    def test_zero_field(self):
        f = RadialField(GRID, np.zeros(GRID.n_cells))
        for s in (0.0, 2.0, 4.0):
            assert integrate_radial(f, s) == 0.0

    def test_unit_ball_indicator(self):
        # r_max chosen so the ball boundary falls exactly on a cell face
        grid = RadialGrid(4800, 12.0)
        vals = (grid.centers <= 1.0).astype(float)
        f = RadialField(grid, vals)
        assert abs(integrate_radial(f, 0.0) - 4.0 * np.pi / 3.0) <= 1e-4

    def test_second_moment_of_wide_gaussian(self):
        # E_2 = 3 sigma^2 mass, cross-checked by 1D quadrature oracle
        sigma, mass = 2.0, 3.0
        grid = RadialGrid(4096, 12.0 * sigma)
        f = gaussian_field(grid, sigma=sigma, mass=mass)
        r = np.linspace(0, grid.r_max, 200_001)
        prof = mass * (2 * np.pi * sigma**2) ** -1.5 * np.exp(-0.5 * (r / sigma) ** 2)
        oracle = 4 * np.pi * np.trapezoid(r**4 * prof, r)
        got = integrate_radial(f, 2.0)
        assert abs(got - 36.0) <= 36.0 * 1e-6
        assert abs(got - oracle) <= 36.0 * 1e-6

    def test_linearity(self):
        rng = np.random.default_rng(3)
        a = RadialField(GRID, rng.uniform(0, 1, GRID.n_cells))
        b = RadialField(GRID, rng.uniform(0, 1, GRID.n_cells))
        lhs = integrate_radial(RadialField(GRID, 2.0 * a.values + b.values), 2.0)
        rhs = 2.0 * integrate_radial(a, 2.0) + integrate_radial(b, 2.0)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    def test_dilation_scaling_of_normalized_moments(self):
        # profile held fixed, grid dilated: E_s/E_0 scales as lambda^s
        lam = 1.7
        f = gaussian_field(GRID, sigma=1.0, mass=1.0)
        dil = RadialField(RadialGrid(GRID.n_cells, lam * GRID.r_max), f.values)
        base = integrate_radial(f, 2.0) / integrate_radial(f, 0.0)
        scaled = integrate_radial(dil, 2.0) / integrate_radial(dil, 0.0)
        assert abs(scaled - lam**2 * base) <= 1e-8 * scaled

    def test_rejects_nonfinite(self):
        vals = np.zeros(GRID.n_cells)
        vals[5] = np.nan
        with pytest.raises(FieldError):
            RadialField(GRID, vals)


class TestWeightedLpNorm:
    def test_gaussian_l1(self):
        f = gaussian_field(GRID, sigma=1.0, mass=1.0)
        assert abs(weighted_lp_norm(f, 1.0, 0.0) - 1.0) <= 1e-6

    def test_zero_field(self):
        f = RadialField(GRID, np.zeros(GRID.n_cells))
        assert weighted_lp_norm(f, 2.0, 1.0) == 0.0
        assert weighted_lp_norm(f, np.inf, 1.0) == 0.0

    def test_gaussian_sup(self):
        # analytic peak of the normalized Gaussian, (2 pi)^{-3/2}; the grid max
        # sits at the first cell center, half a cell away from the true peak
        f = gaussian_field(GRID, sigma=1.0, mass=1.0)
        peak = (2 * np.pi) ** -1.5
        assert abs(weighted_lp_norm(f, np.inf, 0.0) - peak) <= 5e-6 * peak

    def test_l1_linf_support_bound(self):
        vals = (GRID.centers <= 1.0).astype(float) * 0.7
        f = RadialField(GRID, vals)
        l1 = weighted_lp_norm(f, 1.0, 0.0)
        linf = weighted_lp_norm(f, np.inf, 0.0)
        assert l1 <= linf * (4 * np.pi / 3) * 1.001

    def test_rejects_p_below_one(self):
        f = gaussian_field(GRID, sigma=1.0)
        with pytest.raises(FieldError):
            weighted_lp_norm(f, 0.5, 0.0)


class TestRadialLaplacian:
    def test_gaussian_against_analytic(self):
        # d/dr-oracle: Laplacian of exp(-r^2/2) is (r^2 - 3) exp(-r^2/2)
        errs = []
        for n in (512, 1024):
            grid = RadialGrid(n, 10.0)
            r = grid.centers
            f = RadialField(grid, np.exp(-0.5 * r**2))
            exact = (r**2 - 3.0) * np.exp(-0.5 * r**2)
            err = np.max(np.abs(radial_laplacian(f).values[:-2] - exact[:-2]))
            errs.append(err)
        assert errs[0] <= 5e-4
        assert errs[1] <= errs[0] / 3.0  # ~O(dr^2)

    def test_constants_annihilated_exactly(self):
        grid = RadialGrid(64, 5.0)
        f = RadialField(grid, np.full(64, 3.25))
        assert np.max(np.abs(radial_laplacian(f).values)) <= 1e-12

    def test_quadratic_exact_at_interior_nodes(self):
        grid = RadialGrid(64, 5.0)
        f = RadialField(grid, grid.centers**2)
        assert np.max(np.abs(radial_laplacian(f).values[:-1] - 6.0)) <= 1e-9

    def test_small_grid_rejected(self):
        with pytest.raises(FieldError):
            RadialGrid(3, 1.0)


class TestGaussianField:
    def test_unit_mass(self):
        f = gaussian_field(GRID, sigma=1.0, mass=1.0)
        assert abs(integrate_radial(f, 0.0) - 1.0) <= 1e-6

    def test_zero_mass(self):
        f = gaussian_field(GRID, sigma=1.0, mass=0.0)
        assert np.all(f.values == 0.0)

    def test_amplitude_mode_pins_peak(self):
        f = gaussian_field(GRID, sigma=1.0, amplitude=50.0)
        assert abs(f.values[0] - 50.0) <= 50.0 * 1e-4

    def test_bad_sigma(self):
        with pytest.raises(FieldError):
            gaussian_field(GRID, sigma=0.0)


class TestTrajectory:
    def test_times_strictly_increasing(self):
        traj = Trajectory()
        f = gaussian_field(RadialGrid(8, 1.0), sigma=1.0)
        traj.append(0.0, f, {"t": 0.0, "mass": 1.0})
        with pytest.raises(FieldError):
            traj.append(0.0, f, {"t": 0.0, "mass": 1.0})

    def test_column_extraction(self):
        traj = Trajectory()
        f = gaussian_field(RadialGrid(8, 1.0), sigma=1.0)
        for k in range(3):
            traj.append(0.1 * k, f, {"t": 0.1 * k, "mass": 1.0})
        assert np.allclose(traj.column("t"), [0.0, 0.1, 0.2])
        with pytest.raises(KeyError):
            traj.column("nope")


class TestCheckpoints:
    def test_radial_roundtrip_bit_for_bit(self, tmp_path):
        f = gaussian_field(RadialGrid(64, 6.0), sigma=1.0, mass=1.0)
        p = tmp_path / "f.ckpt"
        write_checkpoint(p, f, gamma=-3.0, time=0.125)
        g, gamma, t = read_checkpoint(p)
        assert gamma == -3.0 and t == 0.125
        assert np.array_equal(g.values, f.values)
        assert g.grid == f.grid

    def test_cartesian_roundtrip(self, tmp_path):
        f = gaussian_field3(CartesianGrid3(8, 4.0), sigma=1.0)
        p = tmp_path / "f3.ckpt"
        write_checkpoint(p, f, gamma=-2.5, time=0.5)
        g, gamma, t = read_checkpoint(p)
        assert np.array_equal(g.values, f.values)
        assert g.grid.half_width == 4.0

    def test_corrupt_header_rejected(self, tmp_path):
        p = tmp_path / "bad.ckpt"
        p.write_bytes(b"not a checkpoint")
        with pytest.raises(FieldError):
            read_checkpoint(p)
