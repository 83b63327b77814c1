"""Phase-space and coordinate-space discretization.

Uniform, origin-symmetric rectangular grids with trapezoidal quadrature
and central finite-difference derivative kernels of accuracy order 4.
Fields are treated as identically zero outside the grid, which is the
correct extension for the Gaussian-enveloped states this package works
with.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.ndimage import correlate1d

from .errors import RejectionError

#: Highest derivative order served by :func:`partial_derivative`.  Chosen to
#: cover the momentum derivatives of the quantum-correction series up to
#: truncation order 3 (derivative order 2*nu).
MAX_DERIVATIVE_ORDER = 6

#: Design accuracy of the interior stencils.
STENCIL_ACCURACY = 4


def _validate_axis_extent(name: str, lo: float, hi: float, n: int) -> None:
    if n < 16:
        raise RejectionError(f"{name}: need at least 16 nodes, got {n}")
    if not hi > lo:
        raise RejectionError(f"{name}: empty extent [{lo}, {hi}]")
    if abs(lo + hi) > 1e-12 * max(abs(lo), abs(hi)):
        raise RejectionError(
            f"{name}: grid must be symmetric about the origin, got [{lo}, {hi}]"
        )


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform node-centered discretization of the dimensionless (x, k) plane."""

    x_min: float
    x_max: float
    k_min: float
    k_max: float
    n_x: int
    n_k: int

    def __post_init__(self) -> None:
        _validate_axis_extent("x axis", self.x_min, self.x_max, self.n_x)
        _validate_axis_extent("k axis", self.k_min, self.k_max, self.n_k)

    @classmethod
    def centered(cls, x_max: float, k_max: float, n_x: int, n_k: int) -> "PhaseSpaceGrid":
        return cls(-x_max, x_max, -k_max, k_max, n_x, n_k)

    @property
    def h_x(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def h_k(self) -> float:
        return (self.k_max - self.k_min) / (self.n_k - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_k)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate matrices X, K of shape (n_x, n_k)."""
        return np.meshgrid(self.x, self.k, indexing="ij")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_k)


@dataclass(frozen=True)
class CoordinateGrid:
    """Uniform symmetric grid for wavefunction samples; node count is a power of two."""

    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 16 or self.n & (self.n - 1):
            raise RejectionError(f"coordinate grid: node count must be a power of two >= 16, got {self.n}")
        if not self.x_max > 0:
            raise RejectionError(f"coordinate grid: x_max must be positive, got {self.x_max}")

    @property
    def h(self) -> float:
        return 2.0 * self.x_max / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n)


@dataclass(frozen=True)
class DimensionlessMap:
    """Scales (m, omega, hbar) mapping dimensional (q, p, t) to dimensionless (x, k, tau).

    x = sqrt(m*omega/hbar) q,  k = p / sqrt(m*omega*hbar),  tau = omega t.
    The identity map corresponds to m = omega = hbar = 1.
    """

    m: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if min(self.m, self.omega, self.hbar) <= 0:
            raise RejectionError("dimensionless map: m, omega, hbar must all be positive")

    def x_from_q(self, q: float) -> float:
        return float(np.sqrt(self.m * self.omega / self.hbar) * q)

    def q_from_x(self, x: float) -> float:
        return float(x / np.sqrt(self.m * self.omega / self.hbar))

    def k_from_p(self, p: float) -> float:
        return float(p / np.sqrt(self.m * self.omega * self.hbar))

    def p_from_k(self, k: float) -> float:
        return float(k * np.sqrt(self.m * self.omega * self.hbar))

    def tau_from_t(self, t: float) -> float:
        return float(self.omega * t)

    def t_from_tau(self, tau: float) -> float:
        return float(tau / self.omega)

    @property
    def energy_scale(self) -> float:
        """hbar*omega, the divisor turning a dimensional energy into its dimensionless image."""
        return self.hbar * self.omega


def _quadrature_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def integrate_volume(grid: PhaseSpaceGrid, values: np.ndarray, mask: np.ndarray | None = None) -> float:
    """2-D trapezoidal quadrature of a scalar field over the grid.

    Parameters
    ----------
    grid : PhaseSpaceGrid
    values : ndarray, shape (n_x, n_k)
        Field samples; must be finite at every node.
    mask : ndarray of bool, optional
        Node selector; nodes outside the mask contribute zero.

    Returns
    -------
    float
    """
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise RejectionError(f"field shape {values.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise RejectionError(
            f"non-finite field value at node (i_x={bad[0]}, i_k={bad[1]}), "
            f"(x={grid.x[bad[0]]:.6g}, k={grid.k[bad[1]]:.6g})"
        )
    wx = _quadrature_weights(grid.n_x, grid.h_x)
    wk = _quadrature_weights(grid.n_k, grid.h_k)
    integrand = values * wx[:, None] * wk[None, :]
    if mask is not None:
        integrand = np.where(mask, integrand, 0.0)
    return float(np.sum(integrand))


@lru_cache(maxsize=None)
def stencil_weights(order: int, accuracy: int = STENCIL_ACCURACY) -> np.ndarray:
    """Central finite-difference weights for d^order/dx^order at unit spacing.

    Uses Fornberg's recursion on a symmetric node set; the returned array has
    odd length ``2*m + 1`` with ``2*m + 1 >= order + accuracy`` (order and
    accuracy parities matched so the central stencil attains the design
    accuracy).
    """
    if order < 1:
        raise RejectionError(f"derivative order must be >= 1, got {order}")
    half = (order + accuracy - 1) // 2
    x = np.arange(-half, half + 1, dtype=float)
    n = x.size
    # Fornberg weight recursion (B. Fornberg, Math. Comp. 51, 1988), expansion point 0.
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0]
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[i, m] = c1 * (m * c[i - 1, m - 1] - c5 * c[i - 1, m]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[j, m] = (c4 * c[j, m] - m * c[j, m - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    w = c[:, order].copy()
    w.flags.writeable = False
    return w


def partial_derivative(grid: PhaseSpaceGrid, values: np.ndarray, axis: str, order: int = 1) -> np.ndarray:
    """Central finite difference of a scalar field along one phase-space axis.

    Interior accuracy is order 4; the field is taken to be identically zero
    beyond the grid boundary, so rows near the edge apply the same stencil to
    the zero extension.

    Parameters
    ----------
    axis : {"x", "k"}
    order : int
        Derivative order, 1 .. MAX_DERIVATIVE_ORDER.
    """
    if axis not in ("x", "k"):
        raise RejectionError(f"axis must be 'x' or 'k', got {axis!r}")
    if order > MAX_DERIVATIVE_ORDER:
        raise RejectionError(
            f"derivative order {order} beyond supported maximum {MAX_DERIVATIVE_ORDER}"
        )
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise RejectionError(f"field shape {values.shape} does not match grid {grid.shape}")
    w = stencil_weights(order)
    ax = 0 if axis == "x" else 1
    h = grid.h_x if axis == "x" else grid.h_k
    if values.shape[ax] < w.size:
        raise RejectionError(
            f"grid has {values.shape[ax]} nodes along {axis}, stencil needs {w.size}"
        )
    return correlate1d(values, w, axis=ax, mode="constant", cval=0.0) / h**order
