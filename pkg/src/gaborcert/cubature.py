"""Gauss-Legendre product rules, holomorphic-extension error bounds, and the
sampling planner.

Geometry convention: everything is parametrized by the HALF-WIDTH s of the
square Q_s = [-s, s]^2 (side length 2s); the error bounds are applied with
that same s.  The CLI accepts side lengths and converts.

The error bound for squared spectrogram differences,
``3 (sqrt(8 pi) s + 2)^(N+3) N^(-(N-1)/2) e^(N/2) kappa``
with kappa the summed squared signal norms, decays super-exponentially in N;
the planner inverts it to find the smallest rule degree meeting a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussRule1D",
    "ProductRule2D",
    "SamplingPlan",
    "gauss_rule",
    "product_rule",
    "apply_rule",
    "cubature_error",
    "chawla_bound",
    "spectro_error_bound",
    "plan_sampling",
    "tensor_product_integral",
    "discrete_weighted_norm",
    "legendre_eval",
    "legendre_lower_bound_check",
]

_LOG_HUGE = math.log(1e300)


@dataclass(frozen=True)
class GaussRule1D:
    """N-point Gauss-Legendre rule on [-s, s]; weights sum to 2s."""

    n: int
    s: float
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class ProductRule2D:
    """Tensor rule on the square of half-width s centered at `center`."""

    base: GaussRule1D
    center: tuple[float, float]
    points: np.ndarray   # (N^2, 2)
    weights: np.ndarray  # (N^2,)


@dataclass(frozen=True)
class SamplingPlan:
    n: int
    rule: ProductRule2D
    epsilon: float
    predicted_error: float
    kappa: float


def _legendre_and_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p_next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
        p_prev, p = p, p_next
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def gauss_rule(n: int, s: float) -> GaussRule1D:
    """Nodes/weights by Newton iteration on P_N with Chebyshev initial guesses.

    Residual tolerance 1e-15; nodes are symmetrized so that odd integrands
    cancel exactly.
    """
    if n < 1:
        raise ValueError(f"rule size must be >= 1, got {n}")
    if not s > 0:
        raise ValueError(f"half-width must be positive, got {s}")
    if n == 1:
        return GaussRule1D(1, s, np.zeros(1), np.array([2.0 * s]))
    k = np.arange(n)
    x = np.cos(math.pi * (k + 0.75) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.abs(dx).max() < 1e-15:
            break
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])  # enforce symmetry about 0
    _, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return GaussRule1D(n, s, s * x, s * w)


def product_rule(n: int, s: float, center: tuple[float, float] = (0.0, 0.0)) -> ProductRule2D:
    """Tensor product of the 1-D rule; weights sum to (2s)^2."""
    base = gauss_rule(n, s)
    gx = base.nodes[:, None] + center[0]
    gy = base.nodes[None, :] + center[1]
    pts = np.stack([np.broadcast_to(gx, (n, n)).ravel(),
                    np.broadcast_to(gy, (n, n)).ravel()], axis=1)
    wts = np.outer(base.weights, base.weights).ravel()
    return ProductRule2D(base, (float(center[0]), float(center[1])), pts, wts)


def apply_rule(phi, rule: ProductRule2D) -> float:
    """sum_lambda phi(lambda) w_lambda; phi must accept array arguments."""
    vals = np.asarray(phi(rule.points[:, 0], rule.points[:, 1]), dtype=float)
    return float(np.dot(vals, rule.weights))


def cubature_error(phi, exact: float, rule: ProductRule2D) -> float:
    """Signed integration error: exact integral minus the rule's value."""
    return float(exact) - apply_rule(phi, rule)


def chawla_bound(n: int, s: float, a: float, b: float, sup_phi: float) -> float:
    """Error bound for integrands with a holomorphic extension.

    ``(8 s (a+b) / pi) (min(a-s, b)/s)^(-N) (2(a+b)/min(a-s,b)
    + log((a+s)/(a-s))/2) * sup_phi`` for the rule of degree N on Q_s; the
    caller supplies sup_phi over the slab E_{s,a,b}.  Decays in N only when
    min(a-s, b) > s; the planner rejects other geometry.
    """
    if not 0 < s < a:
        raise ValueError("need 0 < s < a")
    if not b > 0:
        raise ValueError("need b > 0")
    if sup_phi < 0:
        raise ValueError("sup_phi must be nonnegative")
    if sup_phi == 0.0:
        return 0.0
    m = min(a - s, b)
    log_val = (math.log(8.0 * s * (a + b) / math.pi)
               - n * math.log(m / s)
               + math.log(2.0 * (a + b) / m + 0.5 * math.log((a + s) / (a - s)))
               + math.log(sup_phi))
    if log_val > _LOG_HUGE:
        return math.inf
    return math.exp(log_val)


def spectro_error_bound(n: int, s: float, kappa: float) -> float:
    """Bound on |E^(N,s)((Sf - Sg)^2)| for L2 signals with kappa = ||f||^2 + ||g||^2.

    Log-space evaluation of 3 (sqrt(8 pi) s + 2)^(N+3) N^(-(N-1)/2) e^(N/2) kappa,
    which is the holomorphic-extension bound with the slab parameters fixed at
    b = sqrt(N / (8 pi)), a = s + b; values above 1e300 are reported as inf.
    """
    if n < 1:
        raise ValueError("rule degree must be >= 1")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if kappa == 0.0:
        return 0.0
    log_val = (math.log(3.0) + (n + 3) * math.log(math.sqrt(8.0 * math.pi) * s + 2.0)
               - 0.5 * (n - 1) * math.log(n) + 0.5 * n + math.log(kappa))
    if log_val > _LOG_HUGE:
        return math.inf
    return math.exp(log_val)


def plan_sampling(epsilon: float, s: float, kappa: float,
                  center: tuple[float, float] = (0.0, 0.0)) -> SamplingPlan:
    """Smallest N whose predicted error is at most epsilon^4, plus the rule.

    Doubling then bisection on the (eventually decreasing) bound; the
    returned N is minimal: the bound at N-1 exceeds the target.
    """
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    target = epsilon ** 4
    n = 1
    if spectro_error_bound(n, s, kappa) > target:
        hi = 2
        while spectro_error_bound(hi, s, kappa) > target:
            hi *= 2
            if hi > 10**7:
                raise RuntimeError("planner failed to find a feasible degree")
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if spectro_error_bound(mid, s, kappa) <= target:
                hi = mid
            else:
                lo = mid
        n = hi
    while n > 1 and spectro_error_bound(n - 1, s, kappa) <= target:
        n -= 1
    rule = product_rule(n, s, center)
    return SamplingPlan(n, rule, epsilon, spectro_error_bound(n, s, kappa), kappa)


def tensor_product_integral(phi, n: int, s: float,
                            center: tuple[float, float] = (0.0, 0.0)) -> float:
    """Reference integral of phi over the square via a degree-n product rule.

    With n in the hundreds this is exact to machine precision for entire
    integrands and serves as the reference for measured cubature errors.
    """
    return apply_rule(phi, product_rule(n, s, center))


def discrete_weighted_norm(values, rule: ProductRule2D) -> float:
    """Weighted l2 norm (sum values^2 w)^(1/2) over the rule's nodes."""
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(rule.weights),):
        raise ValueError(
            f"expected {len(rule.weights)} node values, got shape {vals.shape}"
        )
    return float(math.sqrt(np.dot(vals * vals, rule.weights)))


def legendre_eval(n: int, z) -> np.ndarray | complex:
    """P_N(z) by the three-term recurrence; accepts complex arrays."""
    z = np.asarray(z, dtype=complex)
    if n == 0:
        out = np.ones_like(z)
    elif n == 1:
        out = z.copy()
    else:
        p_prev = np.ones_like(z)
        p = z.copy()
        for k in range(1, n):
            p_next = ((2 * k + 1) * z * p - k * p_prev) / (k + 1)
            p_prev, p = p, p_next
        out = p
    if out.shape == ():
        return complex(out)
    return out


def legendre_lower_bound_check(n: int, a: float, b: float,
                               samples: int = 2000) -> bool:
    """Check |P_N| >= min(a-1, b)^N on the rectangle boundary and on [a, a+10].

    Sampled verification (property-test support for the holomorphic error
    bound's validity region); requires a > 1.
    """
    if not a > 1:
        raise ValueError("need a > 1")
    if not b > 0:
        raise ValueError("need b > 0")
    per_side = samples // 4
    t = np.linspace(-1.0, 1.0, per_side)
    boundary = np.concatenate([
        a * t + 1j * b,
        a * t - 1j * b,
        a + 1j * b * t,
        -a + 1j * b * t,
    ])
    ray = np.linspace(a, a + 10.0, samples - len(boundary))
    pts = np.concatenate([boundary, ray.astype(complex)])
    vals = np.abs(legendre_eval(n, pts))
    floor = min(a - 1.0, b) ** n
    return bool(np.all(vals >= floor * (1.0 - 1e-12)))
