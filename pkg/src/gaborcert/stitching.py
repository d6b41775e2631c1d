"""Per-square phase alignment, global synchronization, and end-to-end
retrieval of the transform field from a spectrogram on a square cover.

The pipeline recovers each square's field up to one unimodular constant from
a local jet of the squared modulus, estimates relative constants on pairwise
overlaps, propagates them over a spanning tree of the overlap graph, and
fixes the remaining global constant by averaging.  Covers whose overlap graph
is disconnected are retrieved per component and flagged: the relative phase
between components is not recoverable from the spectrogram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gabor_engine import (
    GABOR,
    SPECTROGRAM,
    Region,
    Square,
    SpectrogramField,
    coverage_fractions,
    region_inner_product,
    region_norm,
)
from .signal_model import GaussianMixtureSignal
from .stability_graph import SquareCover, WeightedGraph, build_graph
from .tensor_phase import LocalJet, jet_from_field, jet_from_mixture, local_phase_from_modulus

__all__ = [
    "LocalAlignment",
    "GlobalAlignment",
    "RetrievalResult",
    "NoInformationError",
    "DegenerateSquareError",
    "local_align",
    "synchronize",
    "min_phase_distance",
    "retrieve_phase",
]


class NoInformationError(ValueError):
    """All local multipliers vanish; nothing to synchronize."""


class DegenerateSquareError(ValueError):
    """Squares whose spectrogram mass is below threshold, listed by index."""

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(f"spectrogram below threshold on squares {self.indices}")


@dataclass(frozen=True)
class LocalAlignment:
    square_index: int
    z: complex
    residual: float


@dataclass(frozen=True)
class GlobalAlignment:
    c0: complex
    tau: complex
    per_square: tuple[LocalAlignment, ...]


@dataclass(frozen=True)
class RetrievalResult:
    field: SpectrogramField
    components: tuple[tuple[int, ...], ...]
    warnings: tuple[str, ...]
    alignment: GlobalAlignment
    jet_centers: tuple[complex, ...]


def local_align(fld_f: SpectrogramField, fld_g: SpectrogramField,
                square: Square) -> LocalAlignment:
    """Least-squares multiplier z = <G, F>_Q / ||F||^2_Q and its residual."""
    region = Region((square,))
    nf = region_norm(fld_f, region, 2)
    if nf <= 0:
        raise ValueError("reference field has no energy on the square")
    num = region_inner_product(fld_g, fld_f, region)
    z = num / (nf * nf)
    frac = coverage_fractions(fld_f.grid, region)
    cell = fld_f.grid.dx * fld_f.grid.dy
    resid = math.sqrt(float(np.sum(np.abs(fld_g.values - z * fld_f.values) ** 2 * frac) * cell))
    return LocalAlignment(-1, complex(z), resid)


def synchronize(alignments, graph: WeightedGraph) -> GlobalAlignment:
    """Collapse per-square multipliers to one unimodular constant.

    c0 is the plain average of the multipliers; when it is numerically zero
    the direction is chosen by weighted majority over a dense unimodular
    grid (ties resolved toward the smallest angle).
    """
    alignments = tuple(alignments)
    if len(alignments) != graph.n:
        raise ValueError("alignments must be indexed by the graph vertices")
    z = np.array([al.z for al in alignments], dtype=complex)
    if np.abs(z).max(initial=0.0) < 1e-12:
        raise NoInformationError("all local multipliers are numerically zero")
    c0 = complex(z.mean())
    if abs(c0) > 1e-12:
        tau = c0 / abs(c0)
    else:
        thetas = 2.0 * math.pi * np.arange(3600) / 3600.0
        taus = np.exp(1j * thetas)
        scores = np.real(np.conj(taus)[:, None] * z[None, :]) @ graph.w
        tau = complex(taus[int(np.argmax(scores))])
    return GlobalAlignment(c0, tau, alignments)


def min_phase_distance(fld_f: SpectrogramField, fld_g: SpectrogramField,
                       region: Region) -> tuple[complex, float]:
    """Exact minimizer over unimodular tau of ||G - tau F||_{L2(region)}.

    tau = <G, F> / |<G, F>| when the inner product is nonzero; for orthogonal
    fields every tau is optimal and the distance is (||F||^2 + ||G||^2)^(1/2).
    """
    ip = region_inner_product(fld_g, fld_f, region)
    if abs(ip) > 0.0:
        tau = ip / abs(ip)
        # norm of the explicit difference field: no cancellation floor
        diff = SpectrogramField(fld_f.grid, fld_g.values - tau * fld_f.values, GABOR)
        return complex(tau), region_norm(diff, region, 2)
    nf = region_norm(fld_f, region, 2)
    ng = region_norm(fld_g, region, 2)
    return 1.0 + 0.0j, math.sqrt(nf * nf + ng * ng)


def _local_field(jet: LocalJet, grid, frac: np.ndarray) -> np.ndarray:
    """Evaluate the jet's local recovery on the covered cells of the grid."""
    out = np.zeros((grid.nx, grid.ny), dtype=complex)
    idx = np.argwhere(frac > 1e-12)
    if len(idx) == 0:
        return out
    xs, ys = grid.xs(), grid.ys()
    px = xs[idx[:, 0]]
    py = ys[idx[:, 1]]
    w_pts = px - 1j * py
    vals = local_phase_from_modulus(jet, w_pts)
    gauss = np.exp(-1j * np.pi * px * py - 0.5 * np.pi * (px * px + py * py))
    out[idx[:, 0], idx[:, 1]] = vals * gauss
    return out


def retrieve_phase(spec: SpectrogramField, cover: SquareCover,
                   jet_source: str = "analytic", order: int = 14,
                   signal: GaussianMixtureSignal | None = None,
                   threshold: float = 1e-10) -> RetrievalResult:
    """Reconstruct a transform field on the cover from spectrogram data.

    Per square, a jet of |F|^2 is built at the point of maximal spectrogram
    (analytic jets require the generating mixture; finite-difference jets
    work from the samples, orders <= 4).  Local fields are aligned pairwise
    on overlaps and synchronized; the output is defined up to one unimodular
    constant per connected component of the overlap graph.
    """
    if spec.kind != SPECTROGRAM:
        raise ValueError("retrieve_phase expects a spectrogram field")
    if jet_source not in ("analytic", "finite_difference"):
        raise ValueError(f"unknown jet source {jet_source!r}")
    if jet_source == "analytic" and signal is None:
        raise ValueError("analytic jets require the generating mixture")

    grid = spec.grid
    n = len(cover)
    squares = cover.squares()
    fracs = [coverage_fractions(grid, Region((sq,))) for sq in squares]

    # jet centers: per-square argmax of the spectrogram over covered cells
    centers_xy: list[tuple[float, float]] = []
    degenerate = []
    xs, ys = grid.xs(), grid.ys()
    for i, frac in enumerate(fracs):
        masked = np.where(frac > 1e-12, spec.values, -1.0)
        flat = int(np.argmax(masked))
        ix, iy = np.unravel_index(flat, masked.shape)
        if masked[ix, iy] <= threshold:
            degenerate.append(i)
        centers_xy.append((float(xs[ix]), float(ys[iy])))
    if degenerate:
        raise DegenerateSquareError(degenerate)

    jets = []
    for i in range(n):
        x0, y0 = centers_xy[i]
        if jet_source == "analytic":
            jets.append(jet_from_mixture(signal, complex(x0, -y0), order))
        else:
            jets.append(jet_from_field(spec, (x0, y0), min(order, 4)))

    locals_ = [_local_field(jets[i], grid, fracs[i]) for i in range(n)]
    graph = build_graph(spec, cover)

    # relative multipliers on overlaps, then spanning-tree propagation
    cell = grid.dx * grid.dy
    edges: dict[tuple[int, int], complex] = {}
    for i in range(n):
        for j in range(i + 1, n):
            if graph.sigma[i, j] <= 0:
                continue
            inter = np.minimum(fracs[i], fracs[j])
            den = float(np.sum(np.abs(locals_[j]) ** 2 * inter) * cell)
            if den <= 0:
                continue
            num = complex(np.sum(locals_[i] * np.conj(locals_[j]) * inter) * cell)
            if abs(num) == 0.0:
                continue
            edges[(i, j)] = num / abs(num)  # estimate of phase(i) - phase(j)

    adj: list[list[int]] = [[] for _ in range(n)]
    for (i, j) in edges:
        adj[i].append(j)
        adj[j].append(i)

    multipliers = np.zeros(n, dtype=complex)
    visited = [False] * n
    components: list[tuple[int, ...]] = []
    order_by_mass = np.argsort(-graph.w)
    for root in order_by_mass:
        root = int(root)
        if visited[root]:
            continue
        comp = [root]
        visited[root] = True
        multipliers[root] = 1.0
        queue = [root]
        while queue:
            u = queue.pop()
            for v in adj[u]:
                if visited[v]:
                    continue
                visited[v] = True
                # edges[(i, j)] estimates exp(i (phase_i - phase_j)); align v to u
                rel = edges[(u, v)] if (u, v) in edges else np.conj(edges[(v, u)])
                multipliers[v] = multipliers[u] * rel
                comp.append(v)
                queue.append(v)
        components.append(tuple(sorted(comp)))

    warnings = []
    if len(components) > 1:
        warnings.append(
            f"multi-component cover: {len(components)} components; relative phase "
            "between components is not recoverable"
        )

    # stitch: coverage-weighted average of aligned local fields
    weight_sum = np.zeros((grid.nx, grid.ny))
    acc = np.zeros((grid.nx, grid.ny), dtype=complex)
    for i in range(n):
        acc += multipliers[i] * locals_[i] * fracs[i]
        weight_sum += fracs[i]
    out_vals = np.divide(acc, weight_sum, out=np.zeros_like(acc), where=weight_sum > 1e-12)

    alignments = [LocalAlignment(i, complex(multipliers[i]), 0.0) for i in range(n)]
    alignment = synchronize(alignments, graph)
    out_vals = out_vals * np.conj(alignment.tau)

    field = SpectrogramField(grid, out_vals, GABOR)
    return RetrievalResult(field, tuple(components), tuple(warnings), alignment,
                           tuple(complex(x, -y) for x, y in centers_xy))
