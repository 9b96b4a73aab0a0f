"""Interaction potentials and the nonlocal coefficients of the isotropic
Landau (Krieger-Strain) flow.

The diffusion coefficient is a[f] = f * alpha(|.|)|.|^2 (a[f] = f * |.|^{2+gamma}
for the power law) and the reaction coefficient is

    h[f] = (3+gamma) f * |.|^gamma     for gamma in (-3, -2],
    h[f] = 4 pi f                      for gamma = -3,

so that Delta a[f] = (2+gamma) h[f].  Radial convolutions use the exact 1D
reduction

    (f * |.|^mu)(r) = (2 pi / (r (mu+2))) int_0^inf s f(s)
                      [ (r+s)^{mu+2} - |r-s|^{mu+2} ] ds,

with the singular factor integrated in closed form on every cell pair, so the
integrable |r-s|^{mu+2} singularity (mu in (-3,-2)) costs no accuracy.  The
reduction is a fixed linear map of the cell values; the matrix is cached per
(grid, mu) and a coefficient evaluation is one matvec.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import CartesianField3, RadialField, RadialGrid, integrate_radial


class KernelError(ValueError):
    """Raised for inadmissible exponents or potentials."""


# ---------------------------------------------------------------------------
# Interaction potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """alpha(r) = r^gamma with gamma in [-3, 1]."""

    gamma: float

    def __post_init__(self):
        if not (-3.0 <= self.gamma <= 1.0):
            raise KernelError(f"power-law gamma must lie in [-3, 1], got {self.gamma}")

    def alpha(self, r):
        return np.asarray(r, dtype=float) ** self.gamma

    def alpha_prime(self, r):
        if self.gamma == 0.0:
            return np.zeros_like(np.asarray(r, dtype=float))
        return self.gamma * np.asarray(r, dtype=float) ** (self.gamma - 1.0)

    def alpha_second(self, r):
        g = self.gamma
        if g in (0.0, 1.0):
            return np.zeros_like(np.asarray(r, dtype=float))
        return g * (g - 1.0) * np.asarray(r, dtype=float) ** (g - 2.0)


@dataclass(frozen=True)
class SoftenedPowerLaw:
    """alpha(r) = (r^2 + eps^2)^{gamma/2}.

    Smooth at the origin; its log-derivative Gamma(r) = gamma r^2/(r^2+eps^2)
    sweeps (gamma, 0], so for gamma in [-3, 0] it stays inside the monotone
    window.  Used for the eps -> 0 regularization of borderline gamma = -3
    functionals.
    """

    gamma: float
    eps: float

    def __post_init__(self):
        if not (self.eps > 0):
            raise KernelError(f"softening eps must be positive, got {self.eps}")

    def alpha(self, r):
        r = np.asarray(r, dtype=float)
        return (r**2 + self.eps**2) ** (0.5 * self.gamma)

    def alpha_prime(self, r):
        r = np.asarray(r, dtype=float)
        return self.gamma * r * (r**2 + self.eps**2) ** (0.5 * self.gamma - 1.0)

    def alpha_second(self, r):
        r = np.asarray(r, dtype=float)
        q = r**2 + self.eps**2
        g = self.gamma
        return g * q ** (0.5 * g - 2.0) * (q + (g - 2.0) * r**2)


class Tabulated:
    """Interaction potential given by positive samples alpha(r_k), alpha'(r_k).

    Evaluation is by monotone linear interpolation; alpha'' falls back to a
    central difference of the sampled derivative unless given.
    """

    def __init__(self, r, alpha, alpha_prime, alpha_second=None):
        r = np.asarray(r, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        alpha_prime = np.asarray(alpha_prime, dtype=float)
        if r.ndim != 1 or len(r) < 2 or np.any(np.diff(r) <= 0):
            raise KernelError("tabulated radii must be strictly increasing")
        if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
            raise KernelError("tabulated alpha samples must be strictly positive")
        self.r = r
        self._alpha = alpha
        self._alpha_prime = alpha_prime
        if alpha_second is None:
            alpha_second = np.gradient(alpha_prime, r)
        self._alpha_second = np.asarray(alpha_second, dtype=float)

    def _interp(self, table, r):
        return np.interp(np.asarray(r, dtype=float), self.r, table)

    def alpha(self, r):
        return self._interp(self._alpha, r)

    def alpha_prime(self, r):
        return self._interp(self._alpha_prime, r)

    def alpha_second(self, r):
        return self._interp(self._alpha_second, r)


@dataclass(frozen=True)
class RatioWindow:
    """Admissible window for the log-derivative Gamma = r alpha'/alpha."""

    lo: float = 2.0 - 3.0 * np.sqrt(3.0)
    hi: float = -2.0 + 2.0 * np.sqrt(2.0)

    def contains(self, value) -> bool:
        return bool(np.all((self.lo <= np.asarray(value)) & (np.asarray(value) <= self.hi)))


RATIO_WINDOW = RatioWindow()


def gamma_ratio(pot, r):
    """Log-derivative Gamma(r) = r alpha'(r) / alpha(r); constant gamma for power laws."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise KernelError("gamma_ratio requires r > 0")
    if isinstance(pot, PowerLaw):
        return np.full_like(r, pot.gamma) if r.ndim else pot.gamma
    a = pot.alpha(r)
    if np.any(a <= 0):
        raise KernelError("alpha must be positive for the ratio Gamma")
    out = r * pot.alpha_prime(r) / a
    return out if r.ndim else float(out)


# ---------------------------------------------------------------------------
# Radial convolution with |.|^mu
# ---------------------------------------------------------------------------

_matrix_cache: dict = {}
_MATRIX_CACHE_MAX = 12


def _power_kernel_matrix(grid: RadialGrid, mu: float) -> np.ndarray:
    """Matrix W with (f * |.|^mu)(r_i) = sum_j W[i, j] f_j.

    Entries integrate s [ (r+s)^{nu} - |r-s|^{nu} ] (nu = mu + 2) in closed
    form over each source cell, splitting the diagonal cell at s = r.
    """
    nu = mu + 2.0
    r = grid.centers[:, None]            # (n, 1) targets
    lo = grid.faces[:-1][None, :]        # (1, n) source cell bounds
    hi = grid.faces[1:][None, :]

    # int s (r+s)^nu ds, antiderivative (r+s)^{nu+2}/(nu+2) - r (r+s)^{nu+1}/(nu+1)
    def near_part(s):
        t = r + s
        return t ** (nu + 2.0) / (nu + 2.0) - r * t ** (nu + 1.0) / (nu + 1.0)

    # int s |r-s|^nu ds: antiderivatives on either side of s = r
    def below(s):  # s <= r
        t = r - s
        return t ** (nu + 2.0) / (nu + 2.0) - r * t ** (nu + 1.0) / (nu + 1.0)

    def above(s):  # s >= r
        t = s - r
        return t ** (nu + 2.0) / (nu + 2.0) + r * t ** (nu + 1.0) / (nu + 1.0)

    a_part = near_part(hi) - near_part(lo)
    lo_b = np.minimum(lo, r)
    hi_b = np.minimum(hi, r)
    lo_a = np.maximum(lo, r)
    hi_a = np.maximum(hi, r)
    b_part = (below(hi_b) - below(lo_b)) + (above(hi_a) - above(lo_a))
    return (2.0 * np.pi / (r * nu)) * (a_part - b_part)


def kernel_matrix(grid: RadialGrid, mu: float) -> np.ndarray:
    """Cached convolution matrix for the kernel |.|^mu on the given grid."""
    key = (grid.n_cells, grid.r_max, mu)
    W = _matrix_cache.get(key)
    if W is None:
        if abs(mu + 2.0) < 1e-9:
            # the closed form divides by mu+2; take the symmetric numerical
            # limit mu -> -2, which cancels the O(eps) term of the expansion
            eps = 1e-3
            W = 0.5 * (
                _power_kernel_matrix(grid, -2.0 + eps)
                + _power_kernel_matrix(grid, -2.0 - eps)
            )
        else:
            W = _power_kernel_matrix(grid, mu)
        if len(_matrix_cache) >= _MATRIX_CACHE_MAX:
            _matrix_cache.pop(next(iter(_matrix_cache)))
        _matrix_cache[key] = W
    return W


def radial_convolve(f: RadialField, mu: float) -> RadialField:
    """3D convolution (f * |.|^mu)(r) for radial f, mu in (-3, 2].

    mu = 0 returns the constant mass; mu = -2 is the numerical mu -> -2 limit
    of the closed form.
    """
    if mu <= -3.0:
        raise KernelError(f"kernel exponent mu = {mu} is not integrable (need mu > -3)")
    if mu > 2.0:
        raise KernelError(f"kernel exponent mu = {mu} outside supported range (-3, 2]")
    if mu == 0.0:
        mass = integrate_radial(f, 0.0)
        return RadialField(f.grid, np.full(f.grid.n_cells, mass), signed=f.signed)
    out = kernel_matrix(f.grid, mu) @ f.values
    if not f.signed:
        out = np.maximum(out, 0.0)
    return RadialField(f.grid, out, signed=f.signed)


def _tabulated_convolve(f: RadialField, pot) -> RadialField:
    """f * [alpha(|.|)|.|^2] for a tabulated potential.

    Uses the same 1D reduction with the kernel primitive P(t) = int_0^t
    u^3 alpha(u) du accumulated by trapezoid on a refined table; the cell-pair
    integral int s [P(r+s) - P(|r-s|)] ds is then a smooth integrand handled
    by per-cell Gauss-Legendre.
    """
    grid = f.grid
    t = np.linspace(0.0, 2.0 * grid.r_max, 8 * grid.n_cells + 1)
    integrand = t**3 * pot.alpha(np.maximum(t, 1e-300))
    integrand[0] = 0.0
    P_table = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))])

    def P(x):
        return np.interp(x, t, P_table)

    nodes, weights = np.polynomial.legendre.leggauss(6)
    lo = grid.faces[:-1]
    dr = grid.dr
    out = np.empty(grid.n_cells)
    r = grid.centers
    for i, ri in enumerate(r):
        s = lo[None, :] + 0.5 * dr * (nodes[:, None] + 1.0)   # (6, n)
        vals = s * (P(ri + s) - P(np.abs(ri - s)))
        cell = 0.5 * dr * np.sum(weights[:, None] * vals, axis=0)
        out[i] = (2.0 * np.pi / ri) * np.dot(cell, f.values)
    if not f.signed:
        out = np.maximum(out, 0.0)
    return RadialField(grid, out, signed=f.signed)


def coeff_a(f: RadialField, pot) -> RadialField:
    """Diffusion coefficient a[f] = f * alpha(|.|)|.|^2 (>= 0 everywhere).

    Power law: a[f] = f * |.|^{2+gamma}; gamma = -2 gives the constant mass and
    the flow degenerates to the heat equation.
    """
    if isinstance(pot, PowerLaw):
        return radial_convolve(f, 2.0 + pot.gamma)
    return _tabulated_convolve(f, pot)


def coeff_h(f: RadialField, pot) -> RadialField:
    """Reaction coefficient h[f]: 4 pi f at gamma = -3, else (3+gamma) f * |.|^gamma."""
    if not isinstance(pot, PowerLaw):
        raise KernelError("h[f] is defined for power-law potentials only")
    gamma = pot.gamma
    if not (-3.0 <= gamma <= -2.0):
        raise KernelError(f"h[f] requires gamma in [-3, -2], got {gamma}")
    if gamma == -3.0:
        return RadialField(f.grid, 4.0 * np.pi * f.values, signed=f.signed)
    conv = radial_convolve(f, gamma)
    return RadialField(f.grid, (3.0 + gamma) * conv.values, signed=f.signed)


# ---------------------------------------------------------------------------
# FFT convolution on the 3D box
# ---------------------------------------------------------------------------

def _cube_cell_integral(mu: float, h: float, n_sphere: int = 512) -> float:
    """Exact integral of |z|^mu over the cube [-h/2, h/2]^3.

    In spherical coordinates the cube integral is
    int_{S^2} R(w)^{3+mu}/(3+mu) dw with R(w) = (h/2)/max_i |w_i|; the sphere
    integral is evaluated by a product Gauss x trapezoid rule (the integrand is
    bounded and piecewise smooth).
    """
    if mu + 3.0 <= 0:
        raise KernelError("cell integral requires mu > -3")
    cos_nodes, cos_w = np.polynomial.legendre.leggauss(n_sphere // 2)
    phi = (np.arange(n_sphere) + 0.5) * (2.0 * np.pi / n_sphere)
    st = np.sqrt(1.0 - cos_nodes**2)[:, None]
    wx = st * np.cos(phi)[None, :]
    wy = st * np.sin(phi)[None, :]
    wz = np.broadcast_to(cos_nodes[:, None], wx.shape)
    m = np.maximum(np.maximum(np.abs(wx), np.abs(wy)), np.abs(wz))
    R = (0.5 * h) / m
    vals = R ** (3.0 + mu) / (3.0 + mu)
    return float(np.sum(cos_w[:, None] * vals) * (2.0 * np.pi / n_sphere))


_cube_cache: dict = {}


def cartesian_convolve(f3: CartesianField3, mu: float) -> CartesianField3:
    """FFT convolution of a 3D field with |z|^mu on the box.

    Zero-padded to twice the lattice per axis, so every displacement between
    two box points is represented and the kernel is never wrapped.  The origin
    cell carries the exact cell-averaged kernel integral, preserving
    second-order accuracy despite the singularity.
    """
    if not (-3.0 < mu <= 0.0):
        raise KernelError(f"cartesian kernel exponent mu = {mu} outside (-3, 0]")
    grid = f3.grid
    n, h = grid.n, grid.h
    if mu == 0.0:
        return CartesianField3(grid, np.full((n,) * 3, f3.mass()), signed=f3.signed)
    m = 2 * n
    d = np.concatenate([np.arange(0, n + 1), np.arange(-n + 1, 0)]) * h
    DX, DY, DZ = np.meshgrid(d, d, d, indexing="ij")
    rho = np.sqrt(DX**2 + DY**2 + DZ**2)
    kernel = np.zeros_like(rho)
    nz = rho > 0
    kernel[nz] = rho[nz] ** mu
    key = (mu, h)
    if key not in _cube_cache:
        _cube_cache[key] = _cube_cell_integral(mu, h) / h**3
    kernel[0, 0, 0] = _cube_cache[key]

    src = np.zeros((m,) * 3)
    src[:n, :n, :n] = f3.values
    axes = (0, 1, 2)
    conv = np.fft.irfftn(
        np.fft.rfftn(src, axes=axes) * np.fft.rfftn(kernel, axes=axes),
        s=(m,) * 3,
        axes=axes,
    )
    out = conv[:n, :n, :n] * h**3
    if not f3.signed:
        out = np.maximum(out, 0.0)
    return CartesianField3(grid, out, signed=f3.signed)


def interior_mass_fraction(f3: CartesianField3) -> float:
    """Fraction of the mass inside the central half-box; an aliasing guard.

    Values below 0.99 indicate the box truncates the data too aggressively for
    convolution tails to be trusted.
    """
    grid = f3.grid
    q = grid.n // 4
    total = f3.values.sum()
    if total == 0:
        return 1.0
    inner = f3.values[q:-q, q:-q, q:-q].sum()
    return float(inner / total)
