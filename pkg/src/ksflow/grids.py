"""Grids, field containers, quadrature and differential operators.

Radial fields live on a uniform cell-centered grid r_i = (i + 1/2) dr on
(0, r_max]; the origin is deliberately not a node, so 1/r factors are always
finite.  3D fields live on a cell-centered cubic lattice of the box [-L, L]^3.
All operations are pure functions of immutable snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: values below this threshold are treated as vacuum by the entropy and
#: Fisher functionals (x log x -> 0 convention).
VACUUM_THRESHOLD = 1e-30

_CHECKPOINT_MAGIC = "ksflow-checkpoint"
_CHECKPOINT_VERSION = 1


class FieldError(ValueError):
    """Raised for invalid grids, non-finite data or contract violations."""


@dataclass(frozen=True)
class RadialGrid:
    """Uniform cell-centered radial grid with n_cells cells on (0, r_max]."""

    n_cells: int
    r_max: float

    def __post_init__(self):
        if self.n_cells < 4:
            raise FieldError(f"n_cells must be >= 4, got {self.n_cells}")
        if not (self.r_max > 0):
            raise FieldError(f"r_max must be positive, got {self.r_max}")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dr

    @property
    def faces(self) -> np.ndarray:
        """Face radii r_{i+1/2} = i*dr, length n_cells + 1 (first face at 0)."""
        return np.arange(self.n_cells + 1) * self.dr

    @property
    def cell_volumes(self) -> np.ndarray:
        """Exact shell volumes (4*pi/3) (r_{i+1/2}^3 - r_{i-1/2}^3)."""
        f = self.faces
        return (4.0 * np.pi / 3.0) * (f[1:] ** 3 - f[:-1] ** 3)

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and self.n_cells == other.n_cells
            and self.r_max == other.r_max
        )

    def __hash__(self):
        return hash((self.n_cells, self.r_max))


class RadialField:
    """Density samples f(r_i) on a RadialGrid.

    Nonnegative by default; signed auxiliary fields (Laplacians, RHS
    evaluations) share the container with ``signed=True``.
    """

    def __init__(self, grid: RadialGrid, values, signed: bool = False):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n_cells,):
            raise FieldError(
                f"values shape {values.shape} does not match grid ({grid.n_cells},)"
            )
        if not np.all(np.isfinite(values)):
            raise FieldError("field values must be finite")
        if not signed and np.any(values < 0):
            raise FieldError(
                "negative values in a nonnegative field (pass signed=True for "
                "auxiliary fields)"
            )
        self.grid = grid
        self.values = values
        self.values.setflags(write=False)
        self.signed = signed

    def copy(self, values=None, signed=None) -> "RadialField":
        return RadialField(
            self.grid,
            self.values.copy() if values is None else values,
            self.signed if signed is None else signed,
        )

    def __repr__(self):
        return (
            f"RadialField(n={self.grid.n_cells}, r_max={self.grid.r_max}, "
            f"max={self.values.max():.6g}, signed={self.signed})"
        )


def gaussian_field(grid: RadialGrid, sigma: float, mass: float = 1.0,
                   amplitude: float | None = None) -> RadialField:
    """Isotropic Gaussian profile on the grid.

    With ``mass`` given, f(r) = mass (2 pi sigma^2)^{-3/2} exp(-r^2/(2 sigma^2))
    so the total integral is ``mass``.  With ``amplitude`` given instead, the
    peak height is pinned: f(r) = amplitude * exp(-r^2/(2 sigma^2)).
    """
    if not (sigma > 0):
        raise FieldError(f"sigma must be positive, got {sigma}")
    r = grid.centers
    profile = np.exp(-0.5 * (r / sigma) ** 2)
    if amplitude is not None:
        return RadialField(grid, amplitude * profile)
    if mass < 0:
        raise FieldError(f"mass must be nonnegative, got {mass}")
    peak = mass * (2.0 * np.pi * sigma**2) ** -1.5
    return RadialField(grid, peak * profile)


def integrate_radial(f: RadialField, s: float = 0.0) -> float:
    """Moment E_s(f) = integral of f(v) |v|^s over R^3 = 4 pi int r^{2+s} f dr.

    Composite midpoint rule on the cell centers; s = 0 is the mass.
    """
    r = f.grid.centers
    return 4.0 * np.pi * f.grid.dr * float(np.sum(r ** (2.0 + s) * f.values))


def weighted_lp_norm(f: RadialField, p: float, m: float = 0.0) -> float:
    """Weighted Lebesgue norm || <v>^m f ||_{L^p} with <v> = sqrt(1 + |v|^2).

    p = inf returns the grid supremum of <r>^m |f|.  Radial reduction:
    ||g||_p = (4 pi int r^2 |g(r)|^p dr)^{1/p}.
    """
    if p != np.inf and p < 1:
        raise FieldError(f"p must be >= 1 or inf, got {p}")
    r = f.grid.centers
    w = (1.0 + r**2) ** (0.5 * m)
    g = w * np.abs(f.values)
    if p == np.inf:
        return float(g.max())
    return float(
        (4.0 * np.pi * f.grid.dr * np.sum(r**2 * g**p)) ** (1.0 / p)
    )


def radial_laplacian(f: RadialField) -> RadialField:
    """Discrete Laplacian of a radial function, (1/r) (r f)''.

    Second-order central differences on u = r f with the even-symmetry ghost
    value at the origin (u_{-1} = -u_0, i.e. f'(0) = 0).  The outermost cell
    uses quadratic extrapolation of u, exact for polynomials of degree <= 2.
    """
    grid = f.grid
    n = grid.n_cells
    r = grid.centers
    dr = grid.dr
    u = r * f.values
    d2u = np.empty(n)
    d2u[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    # origin: mirrored cell gives u_{-1} = r_{-1} f_0 = -u_0
    d2u[0] = u[1] - 3.0 * u[0]
    # outer: u_n extrapolated as 3u_{n-1} - 3u_{n-2} + u_{n-3}
    u_n = 3.0 * u[-1] - 3.0 * u[-2] + u[-3]
    d2u[-1] = u_n - 2.0 * u[-1] + u[-2]
    return RadialField(grid, d2u / (dr**2 * r), signed=True)


# ---------------------------------------------------------------------------
# 3D Cartesian fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CartesianGrid3:
    """Cell-centered cubic lattice of [-L, L]^3 with n points per axis."""

    n: int
    half_width: float

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise FieldError(f"n must be even and >= 4, got {self.n}")
        if not (self.half_width > 0):
            raise FieldError(f"half_width must be positive, got {self.half_width}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n) + 0.5) * self.h

    def mesh(self):
        x = self.axis
        return np.meshgrid(x, x, x, indexing="ij")

    def __hash__(self):
        return hash((self.n, self.half_width))


class CartesianField3:
    """Density samples on a CartesianGrid3 lattice."""

    def __init__(self, grid: CartesianGrid3, values, signed: bool = False):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n,) * 3:
            raise FieldError(f"values shape {values.shape} does not match grid")
        if not np.all(np.isfinite(values)):
            raise FieldError("field values must be finite")
        if not signed and np.any(values < 0):
            raise FieldError("negative values in a nonnegative 3D field")
        self.grid = grid
        self.values = values
        self.signed = signed

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.h**3)


def gaussian_field3(grid: CartesianGrid3, sigma: float, mass: float = 1.0,
                    center=(0.0, 0.0, 0.0)) -> CartesianField3:
    X, Y, Z = grid.mesh()
    c = np.asarray(center, dtype=float)
    r2 = (X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2
    peak = mass * (2.0 * np.pi * sigma**2) ** -1.5
    return CartesianField3(grid, peak * np.exp(-0.5 * r2 / sigma**2))


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Time-stamped snapshots plus one diagnostics row per output time."""

    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def append(self, t: float, f, row: dict | None = None):
        if self.times and t <= self.times[-1]:
            raise FieldError(
                f"output times must be strictly increasing ({t} after {self.times[-1]})"
            )
        self.times.append(t)
        self.fields.append(f)
        if row is not None:
            self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        if self.rows and name not in self.rows[0]:
            raise KeyError(f"no diagnostics column named {name!r}")
        return np.array([row[name] for row in self.rows])

    def __len__(self):
        return len(self.times)


# ---------------------------------------------------------------------------
# Versioned checkpoints: text header + byte-order-declared binary block
# ---------------------------------------------------------------------------

def write_checkpoint(path, f, gamma: float = float("nan"), time: float = 0.0):
    """Serialize a field with a text header followed by raw little-endian doubles."""
    if isinstance(f, RadialField):
        header = [
            f"{_CHECKPOINT_MAGIC} {_CHECKPOINT_VERSION}",
            "kind radial",
            f"n_cells {f.grid.n_cells}",
            f"r_max {f.grid.r_max!r}",
            f"signed {int(f.signed)}",
        ]
        payload = f.values
    elif isinstance(f, CartesianField3):
        header = [
            f"{_CHECKPOINT_MAGIC} {_CHECKPOINT_VERSION}",
            "kind cartesian",
            f"n {f.grid.n}",
            f"half_width {f.grid.half_width!r}",
            f"signed {int(f.signed)}",
        ]
        payload = f.values.ravel()
    else:
        raise FieldError(f"cannot checkpoint object of type {type(f).__name__}")
    header += [
        f"gamma {gamma!r}",
        f"time {time!r}",
        "byte_order little",
        "dtype float64",
        f"count {payload.size}",
        "end-header",
    ]
    blob = payload.astype("<f8").tobytes()
    data = ("\n".join(header) + "\n").encode("ascii") + blob
    with open(path, "wb") as fh:
        fh.write(data)


def read_checkpoint(path):
    """Read a checkpoint written by write_checkpoint.

    Returns (field, gamma, time).
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    end = raw.find(b"end-header\n")
    if end < 0:
        raise FieldError(f"{path}: not a ksflow checkpoint (missing end-header)")
    head = raw[:end].decode("ascii").splitlines()
    blob = raw[end + len(b"end-header\n"):]
    magic = head[0].split()
    if magic[0] != _CHECKPOINT_MAGIC:
        raise FieldError(f"{path}: bad magic {magic[0]!r}")
    if int(magic[1]) != _CHECKPOINT_VERSION:
        raise FieldError(f"{path}: unsupported checkpoint version {magic[1]}")
    meta = dict(line.split(None, 1) for line in head[1:])
    if meta.get("byte_order") != "little" or meta.get("dtype") != "float64":
        raise FieldError(f"{path}: unsupported binary encoding")
    count = int(meta["count"])
    values = np.frombuffer(blob, dtype="<f8", count=count).astype(float)
    signed = bool(int(meta.get("signed", "0")))
    gamma = float(meta["gamma"])
    time = float(meta["time"])
    if meta["kind"] == "radial":
        grid = RadialGrid(int(meta["n_cells"]), float(meta["r_max"]))
        return RadialField(grid, values, signed=signed), gamma, time
    if meta["kind"] == "cartesian":
        grid = CartesianGrid3(int(meta["n"]), float(meta["half_width"]))
        return (
            CartesianField3(grid, values.reshape((grid.n,) * 3), signed=signed),
            gamma,
            time,
        )
    raise FieldError(f"{path}: unknown field kind {meta['kind']!r}")
