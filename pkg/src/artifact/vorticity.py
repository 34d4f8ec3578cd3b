"""Reynolds-number identification from velocity/vorticity snapshots.

The vorticity transport equation for incompressible 2-D flow,

    w_t + u w_x + v w_y = (1/Re) (w_xx + w_yy),

is linear in the single unknown 1/Re. Sampling it at sensor nodes over
interior snapshots yields a one-column regression: the Laplacian of the
vorticity is the regressor and the advective derivative is the target.

Formulations
------------
- temporal derivative: central difference across snapshots (first and last
  snapshot dropped)
- spatial derivatives: second-order central stencils at strictly interior
  nodes
- solve: scalar normal equation sum(a b) / (sum(a a) + lambda), identical to
  the general solver on the stacked one-column system

Snapshot files are raw little-endian float64, row-major with x fastest, so
a file holds ny rows of nx values; in memory fields are (nx, ny) with x
first. The manifest is plain key=value text next to the field files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingField,
    NonPhysical,
    ParseError,
    RegionTooSmall,
    ShapeMismatch,
)
from .regression import StackedSystem, solve_single_column

MANIFEST_KEYS = ("nx", "ny", "dx", "dy", "dt", "n_snapshots")
FILE_PATTERNS = {"u": "u_%04d.bin", "v": "v_%04d.bin", "w": "w_%04d.bin"}


@dataclass(frozen=True)
class SnapshotStack:
    """Gridded (u, v, w) fields over n_snapshots times."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    dx: float
    dy: float
    dt: float
    cylinder_center: tuple | None = None
    diameter: float | None = None
    curl_rms: float | None = None

    def __post_init__(self):
        for name in ("u", "v", "w"):
            field_array = np.asarray(getattr(self, name), dtype=float)
            if field_array.ndim != 3:
                raise ShapeMismatch(f"{name} must be (n_snapshots, nx, ny)")
            object.__setattr__(self, name, field_array)
        if not (self.u.shape == self.v.shape == self.w.shape):
            raise ShapeMismatch("u, v, w shapes differ")
        if self.n_snapshots < 3:
            raise ShapeMismatch("need at least 3 snapshots for temporal stencils")
        if min(self.dx, self.dy, self.dt) <= 0:
            raise ValueError("dx, dy, dt must be positive")

    @property
    def n_snapshots(self) -> int:
        return self.w.shape[0]

    @property
    def nx(self) -> int:
        return self.w.shape[1]

    @property
    def ny(self) -> int:
        return self.w.shape[2]

    def node_xy(self, i: int, j: int) -> tuple:
        return i * self.dx, j * self.dy


@dataclass(frozen=True)
class SensorSet:
    """Unique strictly interior grid indices drawn inside a wake region."""

    positions: tuple
    region: tuple
    seed: int


@dataclass(frozen=True)
class ReynoldsEstimate:
    """Seed-averaged estimate for one sensor count.

    `re` is the mean of per-seed Reynolds numbers (the published statistic);
    `inverse_re` is the mean of the per-seed regression unknowns. The two are
    exact reciprocals only for a single repeat.
    """

    sensor_count: int
    re: float
    inverse_re: float
    per_seed: tuple
    ridge_lambda: float


def shedding_time_step(strouhal: float, periods: int, snapshots: int) -> float:
    """Snapshot interval covering `periods` shedding periods of 1/strouhal."""
    return periods * (1.0 / strouhal) / snapshots


def manufactured_diffusion_stack(
    nu: float, nx: int, ny: int, n_snapshots: int, dt: float
) -> SnapshotStack:
    """Analytic decaying field w = exp(-2 nu t) sin x sin y on [0, pi]^2.

    Solves the transport equation exactly with u = v = 0 and 1/Re = nu, so
    it serves as a ground-truth oracle.
    """
    if min(nu, dt) <= 0 or min(nx, ny) < 3 or n_snapshots < 3:
        raise ValueError("need positive nu, dt, grid >= 3, snapshots >= 3")
    x = np.linspace(0.0, np.pi, nx)
    y = np.linspace(0.0, np.pi, ny)
    plane = np.outer(np.sin(x), np.sin(y))
    times = dt * np.arange(n_snapshots)
    w = np.exp(-2.0 * nu * times)[:, None, None] * plane[None, :, :]
    zeros = np.zeros_like(w)
    return SnapshotStack(
        u=zeros, v=zeros.copy(), w=w, dx=x[1] - x[0], dy=y[1] - y[0], dt=dt
    )


def advected_diffusion_stack(
    nu: float, cx: float, cy: float, nx: int, ny: int, n_snapshots: int, dt: float
) -> SnapshotStack:
    """Manufactured field advected by a uniform velocity (cx, cy).

    w = exp(-2 nu t) sin(x - cx t) sin(y - cy t) with u = cx, v = cy solves
    the transport equation with the same 1/Re = nu; used to exercise the
    advective terms of the assembly.
    """
    x = np.linspace(0.0, np.pi, nx)
    y = np.linspace(0.0, np.pi, ny)
    times = dt * np.arange(n_snapshots)
    w = np.empty((n_snapshots, nx, ny))
    for n, t in enumerate(times):
        w[n] = np.exp(-2.0 * nu * t) * np.outer(
            np.sin(x - cx * t), np.sin(y - cy * t)
        )
    u = np.full_like(w, cx)
    v = np.full_like(w, cy)
    return SnapshotStack(u=u, v=v, w=w, dx=x[1] - x[0], dy=y[1] - y[0], dt=dt)


def default_wake_region(stack: SnapshotStack) -> tuple:
    """Axis-aligned wake box (x_lo, x_hi, y_lo, y_hi).

    From one diameter downstream of the cylinder's trailing edge to one
    diameter before the outflow boundary, within two diameters of the
    centerline.
    """
    if stack.cylinder_center is None or stack.diameter is None:
        raise ShapeMismatch("stack has no cylinder metadata for a wake region")
    cx, cy = stack.cylinder_center
    d = stack.diameter
    x_max = (stack.nx - 1) * stack.dx
    return (cx + 0.5 * d + d, x_max - d, cy - 2.0 * d, cy + 2.0 * d)


def _admissible_nodes(stack: SnapshotStack, region) -> np.ndarray:
    x_lo, x_hi, y_lo, y_hi = region
    i = np.arange(1, stack.nx - 1)
    j = np.arange(1, stack.ny - 1)
    x = i * stack.dx
    y = j * stack.dy
    inside_x = (x >= x_lo) & (x <= x_hi)
    inside_y = (y >= y_lo) & (y <= y_hi)
    ii, jj = np.meshgrid(i[inside_x], j[inside_y], indexing="ij")
    nodes = np.column_stack([ii.ravel(), jj.ravel()])
    if stack.cylinder_center is not None and stack.diameter is not None:
        cx, cy = stack.cylinder_center
        radius = 0.5 * stack.diameter
        dist2 = (nodes[:, 0] * stack.dx - cx) ** 2 + (nodes[:, 1] * stack.dy - cy) ** 2
        nodes = nodes[dist2 > radius**2]
    return nodes


def sample_sensors(
    stack: SnapshotStack, region, count: int, seed: int = 0
) -> SensorSet:
    """Uniform draw of `count` admissible nodes without replacement."""
    nodes = _admissible_nodes(stack, region)
    if count > len(nodes):
        raise RegionTooSmall(
            f"requested {count} sensors but region admits {len(nodes)} nodes"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(nodes), size=count, replace=False)
    positions = tuple(tuple(int(v) for v in nodes[k]) for k in sorted(chosen))
    return SensorSet(positions=positions, region=tuple(region), seed=seed)


def _interior_fields(stack: SnapshotStack):
    """Regressor (Laplacian) and target (advective derivative) arrays.

    Both are shaped (n_snapshots - 2, nx - 2, ny - 2): interior snapshots
    crossed with interior nodes. Index [n, i, j] corresponds to snapshot
    n + 1 and node (i + 1, j + 1).
    """
    w = stack.w
    wt = (w[2:] - w[:-2]) / (2.0 * stack.dt)
    core = w[1:-1]
    laplacian = (
        (core[:, 2:, 1:-1] - 2.0 * core[:, 1:-1, 1:-1] + core[:, :-2, 1:-1])
        / stack.dx**2
        + (core[:, 1:-1, 2:] - 2.0 * core[:, 1:-1, 1:-1] + core[:, 1:-1, :-2])
        / stack.dy**2
    )
    wx = (core[:, 2:, 1:-1] - core[:, :-2, 1:-1]) / (2.0 * stack.dx)
    wy = (core[:, 1:-1, 2:] - core[:, 1:-1, :-2]) / (2.0 * stack.dy)
    u_core = stack.u[1:-1, 1:-1, 1:-1]
    v_core = stack.v[1:-1, 1:-1, 1:-1]
    target = wt[:, 1:-1, 1:-1] + u_core * wx + v_core * wy
    return laplacian, target


def assemble_vorticity_system(stack: SnapshotStack, sensors: SensorSet) -> StackedSystem:
    """One-column system over every (sensor, interior snapshot) pair.

    Rows are ordered sensor-major, snapshots ascending within each sensor;
    row count is len(sensors) * (n_snapshots - 2).
    """
    laplacian, target = _interior_fields(stack)
    columns = []
    rhs = []
    for i, j in sensors.positions:
        if not (1 <= i <= stack.nx - 2 and 1 <= j <= stack.ny - 2):
            raise ShapeMismatch(f"sensor ({i}, {j}) is not strictly interior")
        columns.append(laplacian[:, i - 1, j - 1])
        rhs.append(target[:, i - 1, j - 1])
    return StackedSystem(np.concatenate(columns)[:, None], np.concatenate(rhs))


def estimate_inverse_re(
    stack: SnapshotStack, sensors: SensorSet | None = None, ridge_lambda: float = 0.0
) -> float:
    """Estimated 1/Re from a sensor set, or from every interior node."""
    if sensors is not None:
        return solve_single_column(
            assemble_vorticity_system(stack, sensors), ridge_lambda
        )
    laplacian, target = _interior_fields(stack)
    return solve_single_column(
        StackedSystem(laplacian.reshape(-1, 1), target.ravel()), ridge_lambda
    )


def estimate_reynolds(
    stack: SnapshotStack,
    region,
    sensor_counts,
    repeats: int = 20,
    ridge_lambda: float = 0.0,
    seed: int = 0,
) -> list:
    """Seed-averaged Reynolds estimates per sensor count.

    Repeat r for count c draws sensors with SeedSequence((seed, c, r)), so
    the full pipeline is reproducible from one integer. Per-seed Reynolds
    numbers are averaged directly; NonPhysical is raised when any per-seed
    inverse estimate (or their mean) is not positive.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    results = []
    for count in sensor_counts:
        inverses = []
        for repeat in range(repeats):
            sequence = np.random.SeedSequence((seed, int(count), repeat))
            draw_seed = int(sequence.generate_state(1)[0])
            sensors = sample_sensors(stack, region, int(count), seed=draw_seed)
            inverses.append(estimate_inverse_re(stack, sensors, ridge_lambda))
        inverses = np.array(inverses)
        if np.any(inverses <= 0) or inverses.mean() <= 0:
            raise NonPhysical(
                f"non-positive inverse Reynolds estimate at sensor count {count}"
            )
        per_seed = tuple(1.0 / inv for inv in inverses)
        results.append(
            ReynoldsEstimate(
                sensor_count=int(count),
                re=float(np.mean(per_seed)),
                inverse_re=float(inverses.mean()),
                per_seed=per_seed,
                ridge_lambda=ridge_lambda,
            )
        )
    return results


def curl_consistency_rms(stack: SnapshotStack) -> float:
    """RMS of w - (dv/dx - du/dy) over interior nodes and all snapshots."""
    v = stack.v
    u = stack.u
    dvdx = (v[:, 2:, 1:-1] - v[:, :-2, 1:-1]) / (2.0 * stack.dx)
    dudy = (u[:, 1:-1, 2:] - u[:, 1:-1, :-2]) / (2.0 * stack.dy)
    residual = stack.w[:, 1:-1, 1:-1] - (dvdx - dudy)
    return float(np.sqrt(np.mean(residual**2)))


def write_snapshot_stack(stack: SnapshotStack, directory) -> str:
    """Write manifest plus per-snapshot field files; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    manifest_path = os.path.join(directory, "manifest.txt")
    lines = [
        f"nx={stack.nx}",
        f"ny={stack.ny}",
        f"dx={float(stack.dx)!r}",
        f"dy={float(stack.dy)!r}",
        f"dt={float(stack.dt)!r}",
        f"n_snapshots={stack.n_snapshots}",
    ]
    if stack.cylinder_center is not None:
        lines.append(f"cylinder_x={float(stack.cylinder_center[0])!r}")
        lines.append(f"cylinder_y={float(stack.cylinder_center[1])!r}")
    if stack.diameter is not None:
        lines.append(f"diameter={float(stack.diameter)!r}")
    with open(manifest_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    for name, pattern in FILE_PATTERNS.items():
        fields = getattr(stack, name)
        for n in range(stack.n_snapshots):
            # files are row-major with x fastest: transpose to (ny, nx)
            fields[n].T.astype("<f8").tofile(os.path.join(directory, pattern % n))
    return manifest_path


def load_snapshot_stack(manifest_path) -> SnapshotStack:
    """Load a stack from a manifest; computes the curl diagnostic RMS."""
    values = {}
    try:
        with open(manifest_path, encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ParseError(
                        f"{manifest_path}:{line_number}: expected key=value"
                    )
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ParseError(f"cannot read manifest: {exc}") from None
    for key in MANIFEST_KEYS:
        if key not in values:
            raise ParseError(f"{manifest_path}: missing key {key}")
    try:
        nx, ny = int(values["nx"]), int(values["ny"])
        n_snapshots = int(values["n_snapshots"])
        dx, dy, dt = float(values["dx"]), float(values["dy"]), float(values["dt"])
    except ValueError as exc:
        raise ParseError(f"{manifest_path}: {exc}") from None
    directory = os.path.dirname(os.path.abspath(manifest_path))
    fields = {}
    for name, pattern in FILE_PATTERNS.items():
        snapshots = np.empty((n_snapshots, nx, ny))
        for n in range(n_snapshots):
            path = os.path.join(directory, pattern % n)
            if not os.path.exists(path):
                raise MissingField(f"missing field file {path}")
            flat = np.fromfile(path, dtype="<f8")
            if flat.size != nx * ny:
                raise DimensionMismatch(
                    f"{path}: {flat.size} values, manifest says {nx}x{ny}={nx * ny}"
                )
            snapshots[n] = flat.reshape(ny, nx).T
        fields[name] = snapshots
    center = None
    if "cylinder_x" in values and "cylinder_y" in values:
        center = (float(values["cylinder_x"]), float(values["cylinder_y"]))
    diameter = float(values["diameter"]) if "diameter" in values else None
    stack = SnapshotStack(
        u=fields["u"],
        v=fields["v"],
        w=fields["w"],
        dx=dx,
        dy=dy,
        dt=dt,
        cylinder_center=center,
        diameter=diameter,
    )
    object.__setattr__(stack, "curl_rms", curl_consistency_rms(stack))
    return stack


def snapshots_from_flat_columns(flat, nx: int, ny: int) -> np.ndarray:
    """Convert a column-per-snapshot flat export to (n_snapshots, nx, ny).

    Accepts an array or a text file path of shape (nx * ny, n_snapshots);
    each column is reshaped row-major to (nx, ny).
    """
    if isinstance(flat, (str, os.PathLike)):
        flat = np.loadtxt(flat)
    flat = np.atleast_2d(np.asarray(flat, dtype=float))
    if flat.shape[0] != nx * ny:
        raise DimensionMismatch(
            f"flat export has {flat.shape[0]} rows, expected nx*ny={nx * ny}"
        )
    return np.stack([flat[:, k].reshape(nx, ny) for k in range(flat.shape[1])])
