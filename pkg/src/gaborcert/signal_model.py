"""Closed-form Gaussian-mixture test signals and their transforms.

An atom is ``A * exp(-pi (t - shift)^2) * exp(2 pi i modulation t)``.  Finite
mixtures of such atoms admit exact formulas for the Gaussian-window
time-frequency transform used throughout this package, for L2 inner products
(Gaussian Gram matrix), and for the entire extension of the transform to
complex arguments.  That makes mixtures the reference signals behind every
numerical oracle in the test suite.

Conventions, fixed project-wide:

* transform:  ``G f(x, y) = int f(t) exp(-pi (t-x)^2) exp(-2 pi i t y) dt``
* atom transform (exact):
  ``G atom(x, y) = A 2^{-1/2} exp(-pi/2 [(x-shift)^2 + (y-mod)^2])
                   * exp(-i pi (x+shift) (y-mod))``
* entire-function side: ``F(w) = sum_j c_j exp(beta_j w)`` with
  ``beta_j = pi (shift_j + i mod_j)`` and
  ``c_j = A_j 2^{-1/2} exp(pi/2 (shift_j + i mod_j)^2 - pi shift_j^2)``,
  linked to the transform by ``G f(x, y) = F(x - i y) exp(-i pi x y - pi |z|^2 / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianAtom",
    "GaussianMixtureSignal",
    "EntireExtensionParams",
    "make_sharpness_pair",
    "gabor_closed_form",
    "entire_extension",
    "entire_extension_values",
    "l2_norm",
    "inner_product",
    "fock_coefficients",
    "fock_value",
    "fock_derivatives",
    "fock_sup_norm",
]

_INV_SQRT2 = 2.0 ** -0.5


def _require_finite(name: str, value) -> None:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GaussianAtom:
    """One shifted, modulated Gaussian ``A e^{-pi(t-shift)^2} e^{2 pi i mod t}``."""

    amplitude: complex
    shift: float = 0.0
    modulation: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "shift", float(self.shift))
        object.__setattr__(self, "modulation", float(self.modulation))
        _require_finite("amplitude", self.amplitude)
        _require_finite("shift", self.shift)
        _require_finite("modulation", self.modulation)


@dataclass(frozen=True)
class GaussianMixtureSignal:
    """Ordered, nonempty list of Gaussian atoms."""

    atoms: tuple[GaussianAtom, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(self.atoms) == 0:
            raise ValueError("mixture must contain at least one atom")
        for a in self.atoms:
            if not isinstance(a, GaussianAtom):
                raise TypeError("mixture atoms must be GaussianAtom instances")

    def evaluate(self, t):
        """Time-domain samples f(t); t may be a scalar or ndarray."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for a in self.atoms:
            out += a.amplitude * np.exp(-np.pi * (t - a.shift) ** 2) \
                * np.exp(2j * np.pi * a.modulation * t)
        return out

    def scale(self, c: complex) -> "GaussianMixtureSignal":
        """Mixture with every amplitude multiplied by c."""
        return GaussianMixtureSignal(
            tuple(GaussianAtom(a.amplitude * c, a.shift, a.modulation) for a in self.atoms)
        )


@dataclass(frozen=True)
class EntireExtensionParams:
    """Complex arguments (z, zeta) of the extended transform."""

    z: complex
    zeta: complex

    def __post_init__(self) -> None:
        _require_finite("z", complex(self.z))
        _require_finite("zeta", complex(self.zeta))


def make_sharpness_pair(a: float) -> tuple[GaussianMixtureSignal, GaussianMixtureSignal]:
    """Even/odd pair of Gaussians at +-a built on ``phi = 2^{-1/2} e^{-pi t^2}``.

    Returns ``(phi(.+a) + phi(.-a), phi(.+a) - phi(.-a))``.  The phase-distance
    to spectrogram-distance ratio of this pair degrades exponentially in a,
    which is the worst case probed by the sharpness experiment.
    """
    a = float(a)
    if not a > 0:
        raise ValueError(f"sharpness parameter must be positive, got {a}")
    f = GaussianMixtureSignal((
        GaussianAtom(_INV_SQRT2, -a, 0.0),
        GaussianAtom(_INV_SQRT2, +a, 0.0),
    ))
    g = GaussianMixtureSignal((
        GaussianAtom(_INV_SQRT2, -a, 0.0),
        GaussianAtom(-_INV_SQRT2, +a, 0.0),
    ))
    return f, g


def gabor_closed_form(sig: GaussianMixtureSignal, x, y):
    """Exact transform values; x, y broadcastable scalars or arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for a in sig.atoms:
        dx = x - a.shift
        dy = y - a.modulation
        out += a.amplitude * _INV_SQRT2 \
            * np.exp(-0.5 * np.pi * (dx * dx + dy * dy)) \
            * np.exp(-1j * np.pi * (x + a.shift) * dy)
    if out.shape == ():
        return complex(out)
    return out


def entire_extension_values(sig: GaussianMixtureSignal, z, zeta):
    """Extended transform at complex (z, zeta); broadcastable arrays allowed.

    Restricting to real (z, zeta) reproduces ``gabor_closed_form``.
    """
    z = np.asarray(z, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    out = np.zeros(np.broadcast(z, zeta).shape, dtype=complex)
    for a in sig.atoms:
        dz = z - a.shift
        dz2 = zeta - a.modulation
        out += a.amplitude * _INV_SQRT2 \
            * np.exp(-0.5 * np.pi * (dz * dz + dz2 * dz2)) \
            * np.exp(-1j * np.pi * (z + a.shift) * dz2)
    if out.shape == ():
        return complex(out)
    return out


def entire_extension(sig: GaussianMixtureSignal, p: EntireExtensionParams) -> complex:
    """Extended transform at a single complex point pair."""
    return complex(entire_extension_values(sig, complex(p.z), complex(p.zeta)))


def inner_product(sig1: GaussianMixtureSignal, sig2: GaussianMixtureSignal) -> complex:
    """Exact L2(R) inner product <f1, f2> via the Gaussian Gram matrix.

    For atoms (A1, t1, n1), (A2, t2, n2):
    ``<a1, a2> = A1 conj(A2) 2^{-1/2} exp(-pi/2 [(t1-t2)^2 + (n1-n2)^2])
                 * exp(i pi (t1+t2)(n1-n2))``.
    """
    total = 0.0 + 0.0j
    for a1 in sig1.atoms:
        for a2 in sig2.atoms:
            dt = a1.shift - a2.shift
            dn = a1.modulation - a2.modulation
            total += a1.amplitude * np.conj(a2.amplitude) * _INV_SQRT2 \
                * math.exp(-0.5 * math.pi * (dt * dt + dn * dn)) \
                * np.exp(1j * math.pi * (a1.shift + a2.shift) * dn)
    return complex(total)


def l2_norm(sig: GaussianMixtureSignal) -> float:
    """Exact L2(R) norm of the mixture."""
    sq = inner_product(sig, sig).real
    return math.sqrt(max(sq, 0.0))


def fock_coefficients(sig: GaussianMixtureSignal) -> tuple[np.ndarray, np.ndarray]:
    """Exponential-sum form of the entire-function side: F(w) = sum c_j e^{beta_j w}."""
    c = np.empty(len(sig.atoms), dtype=complex)
    beta = np.empty(len(sig.atoms), dtype=complex)
    for j, a in enumerate(sig.atoms):
        mu = a.shift + 1j * a.modulation
        beta[j] = np.pi * mu
        c[j] = a.amplitude * _INV_SQRT2 * np.exp(0.5 * np.pi * mu * mu - np.pi * a.shift ** 2)
    return c, beta


def fock_value(sig: GaussianMixtureSignal, w) -> complex | np.ndarray:
    """F(w) for the entire-function side of the mixture."""
    c, beta = fock_coefficients(sig)
    w = np.asarray(w, dtype=complex)
    out = np.tensordot(c, np.exp(np.multiply.outer(beta, w)), axes=(0, 0))
    if out.shape == ():
        return complex(out)
    return out


def fock_derivatives(sig: GaussianMixtureSignal, w: complex, order: int) -> np.ndarray:
    """Derivatives F^{(k)}(w), k = 0..order, of the entire-function side."""
    if order < 0:
        raise ValueError("order must be >= 0")
    c, beta = fock_coefficients(sig)
    base = c * np.exp(beta * complex(w))
    out = np.empty(order + 1, dtype=complex)
    for k in range(order + 1):
        out[k] = np.sum(base)
        base = base * beta
    return out


def fock_sup_norm(sig: GaussianMixtureSignal, step: float = 0.02, pad: float = 3.0) -> float:
    """sup over the plane of |G f| (equivalently the Gaussian-weighted sup of F).

    |G f(x, y)| peaks near the atom centers (shift, modulation); the search box
    is the bounding box of the centers padded by `pad`.
    """
    shifts = [a.shift for a in sig.atoms]
    mods = [a.modulation for a in sig.atoms]
    xs = np.arange(min(shifts) - pad, max(shifts) + pad + step, step)
    ys = np.arange(min(mods) - pad, max(mods) + pad + step, step)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return float(np.max(np.abs(gabor_closed_form(sig, X, Y))))
