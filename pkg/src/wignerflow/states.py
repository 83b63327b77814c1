"""State catalog, Wigner transform, and spectral time evolution.

The catalog covers harmonic-basis-expressible states (eigenstates,
coherent displacements, two-lobe cat superpositions, custom eigenstate
mixes), all with closed-form time dependence under the harmonic well.
Anharmonic dynamics is generated on the wavefunction by a symmetric
split-step propagator and the quasi-probability field is rebuilt by
direct quadrature of the phase-space convolution at each output time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import RejectionError
from .grid import CoordinateGrid, PhaseSpaceGrid, integrate_volume
from .potentials import PotentialModel

#: Largest |phi| tolerated at the coordinate-grid boundary.
BOUNDARY_ENVELOPE = 1e-12

#: Largest imaginary residue tolerated in the phase-space convolution.
IMAG_RESIDUE_LIMIT = 1e-10

#: Norm drift that makes the propagator reject its own output.
NORM_DRIFT_LIMIT = 1e-8


@dataclass
class Wavefunction:
    """Complex samples of phi(x; tau) on a coordinate grid."""

    values: np.ndarray
    grid: CoordinateGrid
    tau: float = 0.0

    def norm(self) -> float:
        """Trapezoidal integral of |phi|^2 over the grid."""
        return float(np.trapezoid(np.abs(self.values) ** 2, dx=self.grid.h))


@dataclass
class WignerField:
    """Real scalar field W(x, k; tau) on a phase-space grid."""

    values: np.ndarray
    grid: PhaseSpaceGrid
    tau: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise RejectionError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise RejectionError("Wigner field contains non-finite values")

    def total(self) -> float:
        """Quadrature of W over the full grid (1 for a normalized state)."""
        return integrate_volume(self.grid, self.values)


@dataclass(frozen=True)
class StateSpec:
    """Declarative description of a catalog state.

    kind is one of "harmonic_eigenstate" (param n), "coherent" (x0, k0),
    "cat" (x0, k0; superposition of coherent states at +/-(x0, k0)), or
    "superposition" (terms: sequence of (coefficient, n) pairs over
    harmonic eigenstates, normalized to unit sum of squared magnitudes).
    """

    kind: str
    n: int = 0
    x0: float = 0.0
    k0: float = 0.0
    terms: tuple[tuple[complex, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in ("harmonic_eigenstate", "coherent", "cat", "superposition"):
            raise RejectionError(f"unknown state kind {self.kind!r}")
        if self.kind == "harmonic_eigenstate" and (self.n < 0 or self.n > 512):
            raise RejectionError(f"eigenstate index out of range: {self.n}")
        if self.kind == "superposition" and not self.terms:
            raise RejectionError("superposition needs at least one term")


def harmonic_eigenstate(n: int) -> StateSpec:
    return StateSpec("harmonic_eigenstate", n=n)


def coherent(x0: float, k0: float) -> StateSpec:
    return StateSpec("coherent", x0=x0, k0=k0)


def cat(x0: float, k0: float) -> StateSpec:
    return StateSpec("cat", x0=x0, k0=k0)


def superposition(terms) -> StateSpec:
    return StateSpec("superposition", terms=tuple((complex(c), int(n)) for c, n in terms))


def hermite_function(n: int, x: np.ndarray) -> np.ndarray:
    """Normalized harmonic eigenfunction phi_n(x) via the stable recurrence."""
    h0 = np.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if n == 0:
        return h0
    h1 = np.sqrt(2.0) * x * h0
    for m in range(2, n + 1):
        h0, h1 = h1, np.sqrt(2.0 / m) * x * h1 - np.sqrt((m - 1) / m) * h0
    return h1


def _coherent_values(x: np.ndarray, x0: float, k0: float, tau: float) -> np.ndarray:
    # Center rotates with the harmonic flow; the tau/2 zero-point phase keeps
    # the samples equal to the exactly evolved state, not just proportional.
    xc = x0 * np.cos(tau) + k0 * np.sin(tau)
    kc = k0 * np.cos(tau) - x0 * np.sin(tau)
    phase = kc * x - 0.5 * xc * kc - 0.5 * tau
    return np.pi ** (-0.25) * np.exp(-0.5 * (x - xc) ** 2 + 1j * phase)


def evaluate_state(spec: StateSpec, grid: CoordinateGrid, tau: float = 0.0) -> Wavefunction:
    """Sample a catalog state at dimensionless time tau (harmonic dynamics).

    The samples are renormalized on the grid and rejected if the envelope
    has not decayed below BOUNDARY_ENVELOPE at the boundary nodes.
    """
    x = grid.x
    if spec.kind == "harmonic_eigenstate":
        values = hermite_function(spec.n, x) * np.exp(-1j * (spec.n + 0.5) * tau)
    elif spec.kind == "coherent":
        values = _coherent_values(x, spec.x0, spec.k0, tau)
    elif spec.kind == "cat":
        values = _coherent_values(x, spec.x0, spec.k0, tau) + _coherent_values(
            x, -spec.x0, -spec.k0, tau
        )
    else:
        coeffs = np.array([c for c, _ in spec.terms], dtype=complex)
        coeffs = coeffs / np.linalg.norm(coeffs)
        values = np.zeros_like(x, dtype=complex)
        for c, n in zip(coeffs, (n for _, n in spec.terms)):
            values = values + c * hermite_function(n, x) * np.exp(-1j * (n + 0.5) * tau)
    norm = np.sqrt(np.trapezoid(np.abs(values) ** 2, dx=grid.h))
    if norm == 0.0 or not np.isfinite(norm):
        raise RejectionError("state evaluates to zero or non-finite samples on this grid")
    values = values / norm
    edge = max(abs(values[0]), abs(values[-1]))
    if edge >= BOUNDARY_ENVELOPE:
        raise RejectionError(
            f"insufficient grid extent: boundary amplitude {edge:.3e} >= {BOUNDARY_ENVELOPE:.0e}"
        )
    return Wavefunction(values, grid, tau)


def wigner_transform(phi: Wavefunction, grid: PhaseSpaceGrid) -> WignerField:
    """Build W(x, k) from wavefunction samples by direct y-quadrature.

    For each phase-space node the integrand pi^-1 e^{2iky} phi(x-y) phi*(x+y)
    is integrated over y in [-Y, Y] with Y equal to half the coordinate-grid
    half-range, sampling phi through a cubic spline (zero outside its grid).
    The quadrature is rejected if the imaginary residue survives above
    IMAG_RESIDUE_LIMIT, which signals a support or resolution failure.
    """
    cgrid = phi.grid
    if cgrid.h > grid.h_x * (1 + 1e-9):
        raise RejectionError(
            f"coordinate grid (h={cgrid.h:.4g}) is coarser than the phase-space x axis (h={grid.h_x:.4g})"
        )
    if cgrid.x_max < grid.x_max * (1 - 1e-12):
        raise RejectionError(
            f"coordinate grid extent {cgrid.x_max} does not cover the phase-space x axis {grid.x_max}"
        )
    half_y = 0.5 * cgrid.x_max
    m = int(np.floor(half_y / cgrid.h))
    y = np.arange(-m, m + 1) * cgrid.h
    wy = np.full(y.size, cgrid.h)
    wy[0] = wy[-1] = 0.5 * cgrid.h

    spline = CubicSpline(cgrid.x, phi.values, extrapolate=False)
    x = grid.x
    minus = spline(x[:, None] - y[None, :])
    plus = spline(x[:, None] + y[None, :])
    np.nan_to_num(minus, copy=False)
    np.nan_to_num(plus, copy=False)
    integrand = (minus * np.conj(plus)) * wy[None, :]

    kernel = np.exp(2j * np.outer(y, grid.k))
    w_complex = (integrand @ kernel) / np.pi
    residue = float(np.max(np.abs(w_complex.imag)))
    if residue >= IMAG_RESIDUE_LIMIT:
        raise RejectionError(
            f"imaginary residue {residue:.3e} of the Wigner quadrature exceeds {IMAG_RESIDUE_LIMIT:.0e}"
        )
    return WignerField(np.ascontiguousarray(w_complex.real), grid, phi.tau)


def evolve_wavefunction(
    phi: Wavefunction, potential: PotentialModel, dtau: float, steps: int
) -> Wavefunction:
    """Symmetric split-step propagation under k^2/2 + u(x).

    Second-order accurate in dtau; negative dtau propagates backward (the
    scheme is unitary either way).  Rejects its output when the trapezoidal
    norm drifts by more than NORM_DRIFT_LIMIT, which signals aliasing or a
    non-finite potential value on the grid.
    """
    if steps < 0:
        raise RejectionError(f"step count must be >= 0, got {steps}")
    if steps == 0:
        return Wavefunction(phi.values.copy(), phi.grid, phi.tau)
    if dtau == 0.0 or not np.isfinite(dtau):
        raise RejectionError(f"invalid time step {dtau}")
    x = phi.grid.x
    kappa = 2.0 * np.pi * np.fft.fftfreq(phi.grid.n, d=phi.grid.h)
    half_v = np.exp(-0.5j * dtau * potential.u(x))
    full_t = np.exp(-0.5j * dtau * kappa**2)
    if not (np.all(np.isfinite(half_v)) and np.all(np.isfinite(full_t))):
        raise RejectionError("potential or kinetic phase is non-finite on the grid")
    norm0 = phi.norm()
    values = phi.values.astype(complex, copy=True)
    for _ in range(steps):
        values *= half_v
        values = np.fft.ifft(full_t * np.fft.fft(values))
        values *= half_v
    out = Wavefunction(values, phi.grid, phi.tau + dtau * steps)
    drift = abs(out.norm() - norm0)
    if not np.isfinite(drift) or drift > NORM_DRIFT_LIMIT:
        raise RejectionError(
            f"norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}; enlarge the grid"
        )
    return out
