"""Continuity-equation flux quantifiers along classical orbits.

Loop integrals of the quantum current remainder Delta J against the
weights {1, ln W, W, W**(beta-1)} quantify probability, entropy, purity
and Renyi-entropy transport across a classical orbit; all of them vanish
identically when the current is classical.  Signs follow the printed
loop formulas:

    sigma:  - integral dtau  Delta J_k  dx/dtau
    svn:    + integral dtau  ln|W| Delta J_k  dx/dtau
    purity: - integral dtau  W Delta J_k  dx/dtau
    renyi:  - integral dtau  W**(beta-1) Delta J_k  dx/dtau

An independent oracle cross-checks each loop value by central finite
differences of the orbit-interior integral of the matching quantity,
with the state advanced by the spectral propagator.  The exact balance
relations connecting the two routes carry the volume correction
int W**p div(w) dV over the enclosed region, which volume_term provides.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .currents import DEFAULT_NU_MAX, delta_current, div_w, wigner_current
from .errors import RejectionError
from .classical import ClassicalOrbit
from .grid import CoordinateGrid, PhaseSpaceGrid, integrate_volume
from .observables import ENTROPY_FLOOR, power_field
from .potentials import PotentialModel
from .states import StateSpec, WignerField, evaluate_state, evolve_wavefunction, wigner_transform

QUANTITIES = ("sigma", "svn", "purity", "renyi")


def interpolate_on_orbit(grid: PhaseSpaceGrid, values: np.ndarray, orbit: ClassicalOrbit) -> np.ndarray:
    """Bicubic samples of a grid field at the orbit points.

    The orbit must stay at least two cells inside the grid boundary.
    """
    pad_x = 2 * grid.h_x
    pad_k = 2 * grid.h_k
    if (
        np.min(orbit.x) < grid.x_min + pad_x
        or np.max(orbit.x) > grid.x_max - pad_x
        or np.min(orbit.k) < grid.k_min + pad_k
        or np.max(orbit.k) > grid.k_max - pad_k
    ):
        raise RejectionError("orbit leaves the safe grid interior (two-cell margin)")
    spline = RectBivariateSpline(grid.x, grid.k, np.asarray(values, dtype=float))
    return spline.ev(orbit.x, orbit.k)


def _scanline_inside(xs: np.ndarray, ks: np.ndarray, vx: np.ndarray, vk: np.ndarray) -> np.ndarray:
    """Even-odd winding test of a lattice against a closed polygon.

    Returns a boolean array of shape (len(xs), len(ks)); a point is inside
    when an odd number of polygon edges cross the horizontal ray to its
    right.  Row-by-row scanline keeps the cost at O(rows * vertices).
    """
    x1, k1 = vx, vk
    x2, k2 = np.roll(vx, -1), np.roll(vk, -1)
    out = np.zeros((xs.size, ks.size), dtype=bool)
    for j, k in enumerate(ks):
        straddle = (k1 > k) != (k2 > k)
        if not straddle.any():
            continue
        a_x, a_k = x1[straddle], k1[straddle]
        x_cross = a_x + (k - a_k) * (x2[straddle] - a_x) / (k2[straddle] - a_k)
        x_cross.sort()
        to_the_right = x_cross.size - np.searchsorted(x_cross, xs, side="right")
        out[:, j] = (to_the_right % 2).astype(bool)
    return out


def orbit_interior_mask(orbit: ClassicalOrbit, grid: PhaseSpaceGrid) -> np.ndarray:
    """Boolean node mask of the region enclosed by the orbit polygon."""
    mask = np.zeros(grid.shape, dtype=bool)
    ix = np.nonzero((grid.x >= orbit.x.min()) & (grid.x <= orbit.x.max()))[0]
    ik = np.nonzero((grid.k >= orbit.k.min()) & (grid.k <= orbit.k.max()))[0]
    if ix.size == 0 or ik.size == 0:
        return mask
    mask[np.ix_(ix, ik)] = _scanline_inside(grid.x[ix], grid.k[ik], orbit.x, orbit.k)
    return mask


class OrbitRegion:
    """Quadrature helper for integrals over the orbit interior.

    Builds, once per orbit, a refined node-centered lattice over the orbit
    bounding box with fractional cell-coverage weights (subsampled on
    boundary cells), so that finite differences of region integrals are not
    polluted by staircase error.  Also exposes the plain boolean node mask
    used by volume_term.
    """

    def __init__(
        self,
        orbit: ClassicalOrbit,
        grid: PhaseSpaceGrid,
        refine: int = 4,
        subsamples: int = 8,
    ) -> None:
        self.orbit = orbit
        self.grid = grid
        self.mask = orbit_interior_mask(orbit, grid)

        hx, hk = grid.h_x / refine, grid.h_k / refine
        x_lo, x_hi = orbit.x.min() - grid.h_x, orbit.x.max() + grid.h_x
        k_lo, k_hi = orbit.k.min() - grid.h_k, orbit.k.max() + grid.h_k
        self._fx = np.arange(x_lo, x_hi + hx, hx)
        self._fk = np.arange(k_lo, k_hi + hk, hk)
        self._cell_area = hx * hk

        # Coverage fraction of each node-centered cell, from an exact winding
        # test on a subsamples x subsamples sub-lattice per cell.
        frac = (np.arange(subsamples) + 0.5) / subsamples - 0.5
        sub_x = (self._fx[:, None] + hx * frac[None, :]).ravel()
        sub_k = (self._fk[:, None] + hk * frac[None, :]).ravel()
        inside = _scanline_inside(sub_x, sub_k, orbit.x, orbit.k)
        inside = inside.reshape(self._fx.size, subsamples, self._fk.size, subsamples)
        self._weights = inside.mean(axis=(1, 3))

    def integral(self, values: np.ndarray, func=None) -> float:
        """Integral over the enclosed region of func(W) (default: W itself)."""
        spline = RectBivariateSpline(self.grid.x, self.grid.k, np.asarray(values, dtype=float))
        fine = spline(self._fx, self._fk)
        if func is not None:
            fine = func(fine)
        return float(np.sum(fine * self._weights) * self._cell_area)

    def quantity(self, w: WignerField, name: str, beta: float | None = None, floor: float = ENTROPY_FLOOR) -> float:
        """Region-restricted sigma / S_vN / purity / Renyi power integral."""
        if name == "sigma":
            return self.integral(w.values)
        if name == "svn":
            def neg_w_log(v):
                keep = np.abs(v) > floor
                out = np.zeros_like(v)
                out[keep] = -v[keep] * np.log(np.abs(v[keep]))
                return out
            return self.integral(w.values, neg_w_log)
        if name == "purity":
            return 2.0 * np.pi * self.integral(w.values, np.square)
        if name == "renyi":
            if beta is None:
                raise RejectionError("renyi quantity needs beta")
            return self.integral(w.values, lambda v: power_field(v, beta, floor))
        raise RejectionError(f"unknown quantity {name!r}")


def _delta_jk_on_orbit(
    w: WignerField, orbit: ClassicalOrbit, potential: PotentialModel, nu_max: int
) -> np.ndarray:
    j = wigner_current(w, potential, nu_max)
    dj = delta_current(j, w, potential)
    return interpolate_on_orbit(w.grid, dj.jk, orbit)


def _loop_sum(weights: np.ndarray, delta_jk: np.ndarray, orbit: ClassicalOrbit) -> float:
    return float(np.sum(weights * delta_jk * orbit.vx) * orbit.dtau)


def sigma_flux(w: WignerField, orbit: ClassicalOrbit, potential: PotentialModel, nu_max: int = DEFAULT_NU_MAX) -> float:
    """Probability flux across the orbit: instantaneous rate of the enclosed probability."""
    djk = _delta_jk_on_orbit(w, orbit, potential, nu_max)
    return -_loop_sum(np.ones_like(djk), djk, orbit)


def svn_flux(
    w: WignerField,
    orbit: ClassicalOrbit,
    potential: PotentialModel,
    nu_max: int = DEFAULT_NU_MAX,
    epsilon: float = ENTROPY_FLOOR,
) -> float:
    """ln|W|-weighted loop flux (positive sign as printed).

    Rejects when the orbit touches nodes with |W| <= epsilon; a silently
    floored weight would bias the integral.
    """
    if epsilon <= 0:
        raise RejectionError(f"epsilon must be positive, got {epsilon}")
    total = w.total()
    if abs(total - 1.0) > 1e-4:
        warnings.warn(
            f"svn_flux on an unnormalized field (integral {total:.6g}): "
            "the ln W weight is scale-sensitive",
            RuntimeWarning,
            stacklevel=2,
        )
    djk = _delta_jk_on_orbit(w, orbit, potential, nu_max)
    w_on = interpolate_on_orbit(w.grid, w.values, orbit)
    small = np.abs(w_on) <= epsilon
    if np.any(small):
        i = int(np.argmax(small))
        raise RejectionError(
            f"|W|={abs(w_on[i]):.3e} <= epsilon at orbit sample {i} "
            f"(x={orbit.x[i]:.6g}, k={orbit.k[i]:.6g})"
        )
    return _loop_sum(np.log(np.abs(w_on)), djk, orbit)


def purity_flux(
    w: WignerField, orbit: ClassicalOrbit, potential: PotentialModel, nu_max: int = DEFAULT_NU_MAX
) -> float:
    """W-weighted loop flux, the loop form of the purity rate (no 2 pi factor)."""
    djk = _delta_jk_on_orbit(w, orbit, potential, nu_max)
    w_on = interpolate_on_orbit(w.grid, w.values, orbit)
    return -_loop_sum(w_on, djk, orbit)


def renyi_flux(
    w: WignerField,
    orbit: ClassicalOrbit,
    potential: PotentialModel,
    nu_max: int = DEFAULT_NU_MAX,
    beta: float = 2.0,
    floor: float = ENTROPY_FLOOR,
) -> float:
    """W**(beta-1)-weighted loop flux; beta follows the Renyi-entropy rules."""
    if beta <= 0 or beta == 1.0:
        raise RejectionError(f"beta must be positive and different from 1, got {beta}")
    djk = _delta_jk_on_orbit(w, orbit, potential, nu_max)
    w_on = interpolate_on_orbit(w.grid, w.values, orbit)
    exponent = beta - 1.0
    if float(exponent).is_integer():
        weights = w_on ** int(exponent) if exponent != 1.0 else w_on
    else:
        negative = int(np.count_nonzero((w_on < 0.0) & (np.abs(w_on) > floor)))
        if negative:
            raise RejectionError(
                f"W**(beta-1) undefined for beta={beta}: {negative} negative orbit samples"
            )
        weights = np.abs(w_on) ** exponent
    return -_loop_sum(weights, djk, orbit)


@dataclass
class VolumeTermResult:
    value: float
    masked_in_region: int

    def __float__(self) -> float:
        return self.value


def volume_term(
    w: WignerField,
    potential: PotentialModel,
    nu_max: int = DEFAULT_NU_MAX,
    epsilon: float | None = None,
    region: np.ndarray | None = None,
    weight: str | float = "one",
) -> VolumeTermResult:
    """Volume correction int weight * W * div(w) dV over a node-mask region.

    weight "one" gives the entropy-balance term int W div(w); weight "w"
    gives the purity term int W^2 div(w); a float beta gives the Renyi term
    (beta - 1) int W**beta div(w).  Nodes where the phase-velocity quotient
    is masked contribute zero and are counted.
    """
    j = wigner_current(w, potential, nu_max)
    dv = div_w(j, w, epsilon)
    if weight == "one":
        integrand = w.values * dv.values
    elif weight == "w":
        integrand = w.values**2 * dv.values
    else:
        beta = float(weight)
        integrand = (beta - 1.0) * power_field(w.values, beta) * dv.values
    keep = dv.valid if region is None else (dv.valid & region)
    n_region = int(np.count_nonzero(region)) if region is not None else w.values.size
    masked = n_region - int(np.count_nonzero(keep))
    return VolumeTermResult(integrate_volume(w.grid, integrand, mask=keep), masked)


def _evolve_to(
    spec: StateSpec,
    potential: PotentialModel,
    cgrid: CoordinateGrid,
    tau: float,
    dtau_evolve: float,
):
    phi0 = evaluate_state(spec, cgrid, 0.0)
    if tau == 0.0:
        return phi0
    n_steps = max(1, int(round(abs(tau) / dtau_evolve)))
    return evolve_wavefunction(phi0, potential, tau / n_steps, n_steps)


def oracle_flux(
    spec: StateSpec,
    potential: PotentialModel,
    orbit: ClassicalOrbit,
    quantity: str,
    dtau_fd: float = 1e-3,
    *,
    tau: float = 0.0,
    beta: float | None = None,
    pgrid: PhaseSpaceGrid,
    cgrid: CoordinateGrid,
    dtau_evolve: float = 2.5e-4,
    region: OrbitRegion | None = None,
    floor: float = ENTROPY_FLOOR,
) -> float:
    """Independent instantaneous rate of a region-restricted quantity.

    Evolves the state to tau - dtau_fd and tau + dtau_fd with the spectral
    propagator, rebuilds W at both times, and central-differences the
    orbit-interior integral of the quantity (sigma, svn, purity as
    2 pi int W^2, or the Renyi power integral int W**beta).  This route never
    touches the current series or its truncation order; that independence is
    what lets it adjudicate the loop formulas.
    """
    if quantity not in QUANTITIES:
        raise RejectionError(f"unknown quantity {quantity!r}")
    if dtau_fd <= 0:
        raise RejectionError(f"dtau_fd must be positive, got {dtau_fd}")
    if region is None:
        region = OrbitRegion(orbit, pgrid)
    q = []
    for t in (tau - dtau_fd, tau + dtau_fd):
        phi = _evolve_to(spec, potential, cgrid, t, dtau_evolve)
        w = wigner_transform(phi, pgrid)
        q.append(region.quantity(w, quantity, beta=beta, floor=floor))
    return (q[1] - q[0]) / (2.0 * dtau_fd)


def oracle_rates(
    spec: StateSpec,
    potential: PotentialModel,
    orbit: ClassicalOrbit,
    betas,
    dtau_fd: float = 1e-3,
    *,
    tau: float = 0.0,
    pgrid: PhaseSpaceGrid,
    cgrid: CoordinateGrid,
    dtau_evolve: float = 2.5e-4,
    region: OrbitRegion | None = None,
    floor: float = ENTROPY_FLOOR,
) -> dict:
    """All oracle rates at once from a single pair of evolved fields.

    Same finite-difference route as oracle_flux, sharing the two Wigner
    builds across sigma, svn, purity and every requested beta.
    """
    if region is None:
        region = OrbitRegion(orbit, pgrid)
    fields = [
        wigner_transform(_evolve_to(spec, potential, cgrid, t, dtau_evolve), pgrid)
        for t in (tau - dtau_fd, tau + dtau_fd)
    ]

    def diff(name: str, beta: float | None = None):
        try:
            q = [region.quantity(w, name, beta=beta, floor=floor) for w in fields]
        except RejectionError as exc:
            return exc
        return (q[1] - q[0]) / (2.0 * dtau_fd)

    out = {name: diff(name) for name in ("sigma", "svn", "purity")}
    out["renyi"] = {f"{b:g}": diff("renyi", b) for b in betas}
    return out


def _rel_dev(value: float, reference: float, floor: float = 1e-12) -> float:
    if abs(value) < floor and abs(reference) < floor:
        return 0.0
    return abs(value - reference) / max(abs(reference), floor)


@dataclass
class FluxReport:
    """Machine-readable record of one flux run."""

    config: dict
    orbit: dict
    times: list = field(default_factory=list)
    accumulated: dict | None = None

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "orbit": self.orbit,
            "times": self.times,
            "accumulated": self.accumulated,
        }


def instantaneous_block(
    w: WignerField,
    orbit: ClassicalOrbit,
    potential: PotentialModel,
    nu_max: int,
    betas,
    epsilon_entropy: float = ENTROPY_FLOOR,
    epsilon_mask: float | None = None,
    region: OrbitRegion | None = None,
) -> dict:
    """All loop fluxes, volume terms and balance forms at the field's time tag.

    The balance ("full") forms pair each loop value with its volume
    correction so that they should match the oracle rates:
        sigma_full  = sigma_loop
        svn_full    = svn_loop + int W div(w)
        purity_full = purity_loop - int W^2 div(w)      (oracle carries 2 pi)
        renyi_full  = renyi_loop - (beta-1) int W**beta div(w)
    """
    if region is None:
        region = OrbitRegion(orbit, w.grid)
    mask = region.mask
    block: dict = {"tau": w.tau}

    sig = sigma_flux(w, orbit, potential, nu_max)
    block["sigma"] = {"loop": sig, "full": sig}

    svn = svn_flux(w, orbit, potential, nu_max, epsilon_entropy)
    vt_svn = volume_term(w, potential, nu_max, epsilon_mask, mask, "one")
    block["svn"] = {
        "loop": svn,
        "volume_term": vt_svn.value,
        "masked_nodes": vt_svn.masked_in_region,
        "full": svn + vt_svn.value,
    }

    pur = purity_flux(w, orbit, potential, nu_max)
    vt_pur = volume_term(w, potential, nu_max, epsilon_mask, mask, "w")
    block["purity"] = {
        "loop": pur,
        "volume_term": vt_pur.value,
        "masked_nodes": vt_pur.masked_in_region,
        "full": pur - vt_pur.value,
    }

    block["renyi"] = {}
    for beta in betas:
        try:
            flux = renyi_flux(w, orbit, potential, nu_max, beta, epsilon_entropy)
        except RejectionError as exc:
            block["renyi"][f"{beta:g}"] = {"rejected": str(exc)}
            continue
        entry = {"loop": flux}
        # The volume correction and region power integral raise for
        # non-integer beta whenever W dips negative somewhere on the grid or
        # region; the loop value above stays valid, so degrade per piece.
        try:
            vt = volume_term(w, potential, nu_max, epsilon_mask, mask, beta)
            entry["volume_term"] = vt.value
            entry["masked_nodes"] = vt.masked_in_region
            entry["full"] = flux - vt.value
        except RejectionError as exc:
            entry["volume_term_rejected"] = str(exc)
        try:
            power_integral = region.quantity(w, "renyi", beta=beta, floor=epsilon_entropy)
            entry["region_power_integral"] = power_integral
            if power_integral > 0:
                entry["rate"] = flux / power_integral
        except RejectionError as exc:
            entry["rate_rejected"] = str(exc)
        block["renyi"][f"{beta:g}"] = entry
    return block


def attach_oracles(
    block: dict,
    spec: StateSpec,
    potential: PotentialModel,
    orbit: ClassicalOrbit,
    betas,
    *,
    pgrid: PhaseSpaceGrid,
    cgrid: CoordinateGrid,
    dtau_fd: float = 1e-3,
    dtau_evolve: float = 2.5e-4,
    region: OrbitRegion | None = None,
    floor: float = ENTROPY_FLOOR,
) -> dict:
    """Add oracle rates and relative deviations to an instantaneous block."""
    if region is None:
        region = OrbitRegion(orbit, pgrid)
    rates = oracle_rates(
        spec, potential, orbit, betas, dtau_fd,
        tau=block["tau"], pgrid=pgrid, cgrid=cgrid,
        dtau_evolve=dtau_evolve, region=region, floor=floor,
    )
    o_sig = rates["sigma"]
    block["sigma"]["oracle"] = o_sig
    block["sigma"]["rel_dev"] = _rel_dev(block["sigma"]["full"], o_sig)

    o_svn = rates["svn"]
    block["svn"]["oracle"] = o_svn
    block["svn"]["rel_dev"] = _rel_dev(block["svn"]["full"], o_svn)

    o_pur = rates["purity"]
    block["purity"]["oracle"] = o_pur
    block["purity"]["oracle_2pi_adjusted"] = o_pur / (2.0 * np.pi)
    block["purity"]["rel_dev"] = _rel_dev(block["purity"]["full"], o_pur / (2.0 * np.pi))
    block["purity"]["rel_dev_unadjusted"] = _rel_dev(block["purity"]["full"], o_pur)

    for beta in betas:
        entry = block["renyi"][f"{beta:g}"]
        if "rejected" in entry:
            continue
        o_b = rates["renyi"][f"{beta:g}"]
        if isinstance(o_b, RejectionError):
            entry["oracle_rejected"] = str(o_b)
            continue
        entry["oracle"] = o_b
        if "full" in entry:
            entry["rel_dev"] = _rel_dev(entry["full"], o_b)
    return block


def period_accumulation(
    spec: StateSpec,
    potential: PotentialModel,
    orbit: ClassicalOrbit,
    nu_max: int,
    betas,
    *,
    pgrid: PhaseSpaceGrid,
    cgrid: CoordinateGrid,
    n_nodes: int = 32,
    dtau_evolve: float = 1e-3,
    epsilon_entropy: float = ENTROPY_FLOOR,
    region: OrbitRegion | None = None,
) -> dict:
    """Period-accumulated forms of every flux.

    Three values per quantity:
      frozen          loop integral with W frozen at tau = 0 (printed form),
      time_consistent the printed parametric integral with W(tau) regenerated
                      at each quadrature node (diagonal sampling),
      balance         trapezoidal time integral over [0, T] of the
                      instantaneous balance forms (loop + volume term),
      direct_change   Q(T) - Q(0) of the region-restricted quantity, the
                      independent reference for `balance`.

    Once nodal lines of W enter the region, the svn volume integrand
    W div(w) grows like 1/W near them and its node quadrature loses
    meaning; direct_change stays reliable and the reported deviation makes
    the breakdown explicit.
    """
    if region is None:
        region = OrbitRegion(orbit, pgrid)
    T = orbit.period
    taus = np.linspace(0.0, T, n_nodes + 1)
    names = ["sigma", "svn", "purity"] + [("renyi", b) for b in betas]

    def key(name):
        return name if isinstance(name, str) else f"renyi_{name[1]:g}"

    inst = {key(n): [] for n in names}
    diag = {key(n): [] for n in names}
    rejected: dict[str, str] = {}

    phi = evaluate_state(spec, cgrid, 0.0)
    w0 = wigner_transform(phi, pgrid)
    q_start = {}
    q_end = {}

    # Orbit-point sampler for the diagonal (time-consistent) form.
    def orbit_point(tau):
        idx = tau / orbit.dtau
        i = int(round(idx)) % orbit.x.size
        return i

    for j, tau_j in enumerate(taus):
        if j > 0:
            step = taus[j] - taus[j - 1]
            n_sub = max(1, int(round(step / dtau_evolve)))
            phi = evolve_wavefunction(phi, potential, step / n_sub, n_sub)
        w = wigner_transform(phi, pgrid)
        blk = instantaneous_block(
            w, orbit, potential, nu_max, betas, epsilon_entropy, None, region
        )
        jcur = wigner_current(w, potential, nu_max)
        djk_field = delta_current(jcur, w, potential).jk
        i_pt = orbit_point(tau_j)
        spl_dj = RectBivariateSpline(pgrid.x, pgrid.k, djk_field)
        spl_w = RectBivariateSpline(pgrid.x, pgrid.k, w.values)
        dj_pt = float(spl_dj.ev(orbit.x[i_pt], orbit.k[i_pt]))
        w_pt = float(spl_w.ev(orbit.x[i_pt], orbit.k[i_pt]))
        vx_pt = orbit.vx[i_pt]

        for name in names:
            k = key(name)
            if isinstance(name, str):
                inst[k].append(blk[name]["full"])
            else:
                entry = blk["renyi"][f"{name[1]:g}"]
                if "full" in entry:
                    inst[k].append(entry["full"])
                else:
                    rejected.setdefault(
                        k, entry.get("rejected", entry.get("volume_term_rejected", ""))
                    )
                    inst[k].append(np.nan)
            if k == "sigma":
                diag[k].append(-dj_pt * vx_pt)
            elif k == "svn":
                diag[k].append(np.log(abs(w_pt)) * dj_pt * vx_pt if abs(w_pt) > epsilon_entropy else np.nan)
            elif k == "purity":
                diag[k].append(-w_pt * dj_pt * vx_pt)
            else:
                b = name[1]
                if float(b - 1).is_integer() or w_pt > 0:
                    diag[k].append(-(w_pt ** (b - 1.0)) * dj_pt * vx_pt)
                else:
                    diag[k].append(np.nan)
        if j == 0:
            q_start = {
                "sigma": region.quantity(w, "sigma"),
                "svn": region.quantity(w, "svn", floor=epsilon_entropy),
                "purity": region.quantity(w, "purity"),
                **{
                    f"renyi_{b:g}": _safe_power_quantity(region, w, b, epsilon_entropy)
                    for b in betas
                },
            }
        if j == n_nodes:
            q_end = {
                "sigma": region.quantity(w, "sigma"),
                "svn": region.quantity(w, "svn", floor=epsilon_entropy),
                "purity": region.quantity(w, "purity"),
                **{
                    f"renyi_{b:g}": _safe_power_quantity(region, w, b, epsilon_entropy)
                    for b in betas
                },
            }

    out: dict = {"period": T, "n_nodes": n_nodes}
    frozen_blk = instantaneous_block(w0, orbit, potential, nu_max, betas, epsilon_entropy, None, region)
    for name in names:
        k = key(name)
        if isinstance(name, str):
            frozen = frozen_blk[name]["loop"]
        else:
            e = frozen_blk["renyi"][f"{name[1]:g}"]
            frozen = e.get("loop", float("nan"))
        balance = float(np.trapezoid(np.asarray(inst[k]), taus))
        time_consistent = float(np.trapezoid(np.asarray(diag[k]), taus))
        direct = None
        if q_start.get(k) is not None and q_end.get(k) is not None:
            direct = q_end[k] - q_start[k]
            if k == "purity":
                direct = direct / (2.0 * np.pi)
        entry = {
            "frozen": frozen,
            "time_consistent": time_consistent,
            "balance": balance,
            "direct_change": direct,
        }
        if direct is not None and np.isfinite(balance):
            entry["rel_dev"] = _rel_dev(balance, direct)
        if k in rejected:
            entry["rejected"] = rejected[k]
        out[k] = entry
    return out


def _safe_power_quantity(region: OrbitRegion, w: WignerField, beta: float, floor: float):
    try:
        return region.quantity(w, "renyi", beta=beta, floor=floor)
    except RejectionError:
        return None
