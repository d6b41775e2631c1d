"""Numerical transform fields on grids and region norms over square unions.

Fields live on rectangular grids; a grid point (i, j) represents the cell of
size dx*dy centered at it, which is the resolution of every region norm here
(midpoint rule with exact sub-cell coverage weights at square boundaries).
Overlapping squares are integrated over their set union, counted once;
pairwise intersections get their own norms in the graph module.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .signal_model import GaussianMixtureSignal, gabor_closed_form

__all__ = [
    "GABOR",
    "SPECTROGRAM",
    "Grid2D",
    "SampledSignal",
    "SpectrogramField",
    "Square",
    "Region",
    "quadrature_gabor",
    "mixture_field",
    "spectrogram",
    "coverage_fractions",
    "region_norm",
    "rect_union_norm",
    "region_inner_product",
    "resample_to_square",
    "union_area",
    "write_field_csv",
    "read_field_csv",
]

GABOR = "gabor"
SPECTROGRAM = "spectrogram"

# window exp(-pi u^2) drops below 1e-16 at |u| = sqrt(16 ln 10 / pi)
_WINDOW_HALFWIDTH = math.sqrt(16.0 * math.log(10.0) / math.pi)
_MIXTURE_DT = 0.02


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular grid; values arrays are indexed [ix, iy]."""

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("grid spacings must be positive")
        if not (self.nx >= 1 and self.ny >= 1):
            raise ValueError("grid must have at least one point per axis")

    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def cell_bounds(self) -> tuple[float, float, float, float]:
        """Bounding box of the cells represented by the grid points."""
        return (
            self.x0 - 0.5 * self.dx,
            self.x0 + (self.nx - 0.5) * self.dx,
            self.y0 - 0.5 * self.dy,
            self.y0 + (self.ny - 0.5) * self.dy,
        )

    @staticmethod
    def from_bounds(xmin: float, xmax: float, ymin: float, ymax: float,
                    step: float) -> "Grid2D":
        if not (xmax > xmin and ymax > ymin):
            raise ValueError("empty grid bounds")
        if not step > 0:
            raise ValueError("grid step must be positive")
        nx = int(round((xmax - xmin) / step)) + 1
        ny = int(round((ymax - ymin) / step)) + 1
        return Grid2D(xmin, ymin, step, step, nx, ny)


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled time signal on t0 + dt * arange(len(samples)).

    dt should resolve the analysis window (dt <= 0.1 recommended, not
    enforced); coarser sampling degrades the transform silently.
    """

    samples: tuple[complex, ...]
    t0: float
    dt: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(complex(s) for s in self.samples))
        if len(self.samples) == 0:
            raise ValueError("sampled signal must be nonempty")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not all(math.isfinite(s.real) and math.isfinite(s.imag) for s in self.samples):
            raise ValueError("samples must be finite")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))


@dataclass(frozen=True)
class SpectrogramField:
    """Complex transform field or nonnegative spectrogram on a grid."""

    grid: Grid2D
    values: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in (GABOR, SPECTROGRAM):
            raise ValueError(f"unknown field kind {self.kind!r}")
        vals = np.asarray(self.values)
        if vals.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"values shape {vals.shape} does not match grid ({self.grid.nx}, {self.grid.ny})"
            )
        if self.kind == SPECTROGRAM:
            vals = np.asarray(vals, dtype=float)
            if vals.size and vals.min() < -1e-9:
                raise ValueError("spectrogram values must be nonnegative")
            vals = np.maximum(vals, 0.0)
        else:
            vals = np.asarray(vals, dtype=complex)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Square:
    cx: float
    cy: float
    side: float
    rotation: float = 0.0

    def __post_init__(self) -> None:
        if not self.side > 0:
            raise ValueError("square side must be positive")

    def corners(self) -> np.ndarray:
        h = 0.5 * self.side
        local = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.cx, self.cy])

    def rect(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) for axis-aligned squares."""
        if not self._axis_aligned():
            raise ValueError("square is not axis-aligned")
        h = 0.5 * self.side
        return (self.cx - h, self.cx + h, self.cy - h, self.cy + h)

    def _axis_aligned(self, tol: float = 1e-12) -> bool:
        return abs(math.sin(2.0 * self.rotation)) < tol


@dataclass(frozen=True)
class Region:
    """Finite union of squares."""

    squares: tuple[Square, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "squares", tuple(self.squares))
        if len(self.squares) == 0:
            raise ValueError("region must contain at least one square")


def _mixture_t_grid(sig: GaussianMixtureSignal, grid: Grid2D) -> np.ndarray:
    shifts = [a.shift for a in sig.atoms]
    lo = min(min(shifts), grid.x0) - _WINDOW_HALFWIDTH
    hi = max(max(shifts), grid.x0 + (grid.nx - 1) * grid.dx) + _WINDOW_HALFWIDTH
    n = int(math.ceil((hi - lo) / _MIXTURE_DT)) + 1
    return lo + (hi - lo) * np.arange(n) / (n - 1)


def quadrature_gabor(sig, grid: Grid2D) -> SpectrogramField:
    """Transform field by trapezoidal quadrature in t.

    Accepts a GaussianMixtureSignal (sampled internally at dt=0.02 over the
    joint support) or a SampledSignal (integrated on its own sample grid).
    The Gaussian window truncates the integrand below 1e-16 on its own.
    """
    if isinstance(sig, GaussianMixtureSignal):
        t = _mixture_t_grid(sig, grid)
        ft = sig.evaluate(t)
        dt = t[1] - t[0] if len(t) > 1 else 1.0
    elif isinstance(sig, SampledSignal):
        t = sig.times()
        ft = np.asarray(sig.samples, dtype=complex)
        dt = sig.dt
    else:
        raise TypeError(f"unsupported signal type {type(sig).__name__}")

    w = np.full(len(t), dt)
    if len(t) > 1:
        w[0] *= 0.5
        w[-1] *= 0.5

    xs = grid.xs()
    ys = grid.ys()
    # windowed integrand rows (nx, nt), then one matmul against exp(-2 pi i t y)
    windowed = ft[None, :] * np.exp(-np.pi * (t[None, :] - xs[:, None]) ** 2) * w[None, :]
    kernel = np.exp(-2j * np.pi * np.outer(t, ys))
    values = windowed @ kernel
    return SpectrogramField(grid, values, GABOR)


def mixture_field(sig: GaussianMixtureSignal, grid: Grid2D) -> SpectrogramField:
    """Closed-form transform field (fast path for mixtures)."""
    X, Y = grid.mesh()
    return SpectrogramField(grid, gabor_closed_form(sig, X, Y), GABOR)


def spectrogram(fld: SpectrogramField) -> SpectrogramField:
    """Pointwise squared modulus of a transform field."""
    if fld.kind != GABOR:
        raise ValueError("spectrogram() expects a transform field")
    return SpectrogramField(fld.grid, np.abs(fld.values) ** 2, SPECTROGRAM)


def _interval_overlap(centers: np.ndarray, h: float, lo: float, hi: float) -> np.ndarray:
    """Per-cell overlap fraction of cells [c-h/2, c+h/2] with [lo, hi]."""
    left = np.maximum(centers - 0.5 * h, lo)
    right = np.minimum(centers + 0.5 * h, hi)
    return np.clip(right - left, 0.0, None) / h


def _rects_of_region(region: Region) -> tuple[list[tuple[float, float, float, float]], list[Square]]:
    rects = []
    rotated = []
    for sq in region.squares:
        if sq._axis_aligned():
            rects.append(sq.rect())
        else:
            rotated.append(sq)
    return rects, rotated


def _union_fractions_rects(grid: Grid2D,
                           rects: list[tuple[float, float, float, float]]) -> np.ndarray:
    """Exact coverage fractions of the union of axis-aligned rectangles.

    Inclusion-exclusion over rectangle subsets; subtrees with empty running
    intersection are pruned, so disjoint-ish covers stay cheap.  Each term is
    separable, hence an outer product of 1-D overlap fractions.
    """
    xs, ys = grid.xs(), grid.ys()
    frac = np.zeros((grid.nx, grid.ny))

    def recurse(start: int, current: tuple[float, float, float, float], depth: int) -> None:
        nonlocal frac
        for i in range(start, len(rects)):
            x0 = max(current[0], rects[i][0])
            x1 = min(current[1], rects[i][1])
            y0 = max(current[2], rects[i][2])
            y1 = min(current[3], rects[i][3])
            if x1 <= x0 or y1 <= y0:
                continue
            sign = 1.0 if depth % 2 == 0 else -1.0
            fx = _interval_overlap(xs, grid.dx, x0, x1)
            fy = _interval_overlap(ys, grid.dy, y0, y1)
            frac += sign * np.outer(fx, fy)
            recurse(i + 1, (x0, x1, y0, y1), depth + 1)

    recurse(0, (-math.inf, math.inf, -math.inf, math.inf), 0)
    return np.clip(frac, 0.0, 1.0)


def _point_in_square(sq: Square, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    c, s = math.cos(sq.rotation), math.sin(sq.rotation)
    u = c * (x - sq.cx) + s * (y - sq.cy)
    v = -s * (x - sq.cx) + c * (y - sq.cy)
    h = 0.5 * sq.side
    return (np.abs(u) <= h) & (np.abs(v) <= h)


def coverage_fractions(grid: Grid2D, region: Region) -> np.ndarray:
    """Fraction of each grid cell covered by the region union (in [0, 1]).

    Axis-aligned squares are resolved exactly; rotated squares by 8x8
    sub-sampling of cells near their boundary.
    """
    rects, rotated = _rects_of_region(region)
    frac = _union_fractions_rects(grid, rects) if rects else np.zeros((grid.nx, grid.ny))
    if rotated:
        xs, ys = grid.xs(), grid.ys()
        m = 8
        offs = (np.arange(m) + 0.5) / m - 0.5
        X, Y = grid.mesh()
        sub = np.zeros((grid.nx, grid.ny))
        for ox in offs:
            for oy in offs:
                pts_x = X + ox * grid.dx
                pts_y = Y + oy * grid.dy
                inside = np.zeros((grid.nx, grid.ny), dtype=bool)
                for sq in rotated:
                    inside |= _point_in_square(sq, pts_x, pts_y)
                sub += inside
        frac = np.maximum(frac, sub / (m * m))
    return frac


def _check_region_in_grid(grid: Grid2D, region: Region) -> None:
    gx0, gx1, gy0, gy1 = grid.cell_bounds()
    tol = 1e-9 * max(grid.dx, grid.dy)
    for sq in region.squares:
        corners = sq.corners()
        if (corners[:, 0].min() < gx0 - tol or corners[:, 0].max() > gx1 + tol
                or corners[:, 1].min() < gy0 - tol or corners[:, 1].max() > gy1 + tol):
            raise ValueError(
                f"square centered ({sq.cx}, {sq.cy}) exceeds the field domain"
            )


def _masked_norm(fld: SpectrogramField, frac: np.ndarray, p) -> float:
    mags = np.abs(fld.values)
    if p == math.inf or p == "inf":
        covered = frac > 1e-12
        return float(mags[covered].max()) if covered.any() else 0.0
    cell = fld.grid.dx * fld.grid.dy
    if p == 1:
        return float(np.sum(mags * frac) * cell)
    if p == 2:
        return float(math.sqrt(np.sum(mags * mags * frac) * cell))
    raise ValueError(f"unsupported norm order {p!r}")


def region_norm(fld: SpectrogramField, region: Region, p) -> float:
    """L^p norm of the field over the union of the region's squares.

    Composite midpoint rule with exact sub-cell coverage weights for p in
    {1, 2}; p=inf returns the max of |values| over covered grid points.
    """
    _check_region_in_grid(fld.grid, region)
    return _masked_norm(fld, coverage_fractions(fld.grid, region), p)


def rect_union_norm(fld: SpectrogramField,
                    rects: list[tuple[float, float, float, float]], p) -> float:
    """L^p norm over a union of axis-aligned rectangles (xmin, xmax, ymin, ymax).

    Same midpoint-with-coverage rule as region_norm; used for pairwise square
    intersections, which are rectangles rather than squares.
    """
    return _masked_norm(fld, _union_fractions_rects(fld.grid, list(rects)), p)


def region_inner_product(fld_a: SpectrogramField, fld_b: SpectrogramField,
                         region: Region) -> complex:
    """<a, b> over the region union; fields must share a grid."""
    if fld_a.grid != fld_b.grid:
        raise ValueError("fields must share a grid")
    _check_region_in_grid(fld_a.grid, region)
    frac = coverage_fractions(fld_a.grid, region)
    cell = fld_a.grid.dx * fld_a.grid.dy
    return complex(np.sum(fld_a.values * np.conj(fld_b.values) * frac) * cell)


def _bilinear(fld: SpectrogramField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    g = fld.grid
    fx = (x - g.x0) / g.dx
    fy = (y - g.y0) / g.dy
    eps = 1e-9
    if fx.min() < -eps or fx.max() > g.nx - 1 + eps or fy.min() < -eps or fy.max() > g.ny - 1 + eps:
        raise ValueError("resample target leaves the field domain")
    fx = np.clip(fx, 0.0, g.nx - 1.0)
    fy = np.clip(fy, 0.0, g.ny - 1.0)
    i0 = np.minimum(fx.astype(int), g.nx - 2) if g.nx > 1 else np.zeros_like(fx, dtype=int)
    j0 = np.minimum(fy.astype(int), g.ny - 2) if g.ny > 1 else np.zeros_like(fy, dtype=int)
    tx = fx - i0
    ty = fy - j0
    v = fld.values
    i1 = np.minimum(i0 + 1, g.nx - 1)
    j1 = np.minimum(j0 + 1, g.ny - 1)
    return ((1 - tx) * (1 - ty) * v[i0, j0] + tx * (1 - ty) * v[i1, j0]
            + (1 - tx) * ty * v[i0, j1] + tx * ty * v[i1, j1])


def resample_to_square(fld: SpectrogramField, square: Square,
                       step: float | None = None) -> SpectrogramField:
    """Bilinear resample onto the square's local axis-aligned frame.

    The output grid lives in local coordinates centered at the square, which
    reduces general squares to the centered axis-aligned base case; only
    moduli are consumed downstream so the dropped unimodular factors of the
    rotated/translated signal never need to be materialized.
    """
    h = step if step is not None else min(fld.grid.dx, fld.grid.dy)
    n = int(round(square.side / h)) + 1
    local = -0.5 * square.side + square.side * np.arange(n) / (n - 1)
    U, V = np.meshgrid(local, local, indexing="ij")
    c, s = math.cos(square.rotation), math.sin(square.rotation)
    X = square.cx + c * U - s * V
    Y = square.cy + s * U + c * V
    vals = _bilinear(fld, X, Y)
    out_grid = Grid2D(local[0], local[0], local[1] - local[0], local[1] - local[0], n, n)
    return SpectrogramField(out_grid, vals, fld.kind)


def union_area(rects: list[tuple[float, float, float, float]]) -> float:
    """Exact area of a union of axis-aligned rectangles (strip sweep)."""
    rects = [r for r in rects if r[1] > r[0] and r[3] > r[2]]
    if not rects:
        return 0.0
    xs = sorted({r[0] for r in rects} | {r[1] for r in rects})
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        if x1 <= x0:
            continue
        spans = sorted((r[2], r[3]) for r in rects if r[0] <= x0 and r[1] >= x1)
        covered = 0.0
        cur_lo, cur_hi = None, None
        for lo, hi in spans:
            if cur_lo is None:
                cur_lo, cur_hi = lo, hi
            elif lo > cur_hi:
                covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_lo is not None:
            covered += cur_hi - cur_lo
        total += covered * (x1 - x0)
    return total


def write_field_csv(fld: SpectrogramField, path) -> None:
    """CSV export: header x,y,re,im for transform fields, x,y,s for spectrograms."""
    xs, ys = fld.grid.xs(), fld.grid.ys()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if fld.kind == GABOR:
            writer.writerow(["x", "y", "re", "im"])
            for i in range(fld.grid.nx):
                for j in range(fld.grid.ny):
                    v = fld.values[i, j]
                    writer.writerow([repr(float(xs[i])), repr(float(ys[j])),
                                     repr(float(v.real)), repr(float(v.imag))])
        else:
            writer.writerow(["x", "y", "s"])
            for i in range(fld.grid.nx):
                for j in range(fld.grid.ny):
                    writer.writerow([repr(float(xs[i])), repr(float(ys[j])),
                                     repr(float(fld.values[i, j]))])


def _uniform_axis(values: np.ndarray, name: str) -> tuple[float, float, int]:
    uniq = np.unique(values)
    if len(uniq) == 1:
        return float(uniq[0]), 1.0, 1
    steps = np.diff(uniq)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=1e-12):
        raise ValueError(f"{name} coordinates are not uniformly spaced")
    return float(uniq[0]), float(steps[0]), len(uniq)


def read_field_csv(path) -> SpectrogramField:
    """Inverse of write_field_csv; reconstructs the grid from coordinates."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    if header[:2] != ["x", "y"] or len(header) not in (3, 4):
        raise ValueError(f"unrecognized field CSV header {header!r}")
    data = np.asarray(rows)
    x0, dx, nx = _uniform_axis(data[:, 0], "x")
    y0, dy, ny = _uniform_axis(data[:, 1], "y")
    if len(rows) != nx * ny:
        raise ValueError("field CSV does not cover a full grid")
    grid = Grid2D(x0, y0, dx, dy, nx, ny)
    ix = np.rint((data[:, 0] - x0) / dx).astype(int)
    iy = np.rint((data[:, 1] - y0) / dy).astype(int)
    if header == ["x", "y", "re", "im"]:
        vals = np.zeros((nx, ny), dtype=complex)
        vals[ix, iy] = data[:, 2] + 1j * data[:, 3]
        return SpectrogramField(grid, vals, GABOR)
    if header == ["x", "y", "s"]:
        vals = np.zeros((nx, ny))
        vals[ix, iy] = data[:, 2]
        return SpectrogramField(grid, vals, SPECTROGRAM)
    raise ValueError(f"unrecognized field CSV header {header!r}")
