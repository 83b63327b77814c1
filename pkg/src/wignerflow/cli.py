"""Batch front end: JSON run configuration in, CSV/JSON reports out.

Exit codes: 0 success, 2 configuration validation failure, 3 numerical
rejection inside a module, 4 I/O failure.  Errors print a single
machine-parsable line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fluxes as fx
from .classical import solve_orbit
from .currents import DEFAULT_NU_MAX
from .errors import ConfigError, RejectionError, WignerFlowError
from .grid import CoordinateGrid, DimensionlessMap, PhaseSpaceGrid
from .observables import ENTROPY_FLOOR
from .potentials import CATALOG, PotentialModel
from .states import StateSpec, evaluate_state, evolve_wavefunction, wigner_transform

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_TOP_KEYS = {
    "potential", "state", "grid", "coordinate_grid", "nu_max", "epsilon_entropy",
    "epsilon_mask", "beta_list", "orbit", "dtau", "dtau_fd", "output_times",
    "accumulation", "units", "emit_fields",
}
_POTENTIAL_KEYS = {"kind", "lambda"}
_STATE_KEYS = {"kind", "n", "x0", "k0", "terms"}
_GRID_KEYS = {"x_max", "k_max", "n_x", "n_k"}
_CGRID_KEYS = {"x_max", "n"}
_ORBIT_KEYS = {"x0", "k0", "dtau", "samples", "tau_limit"}
_ACC_KEYS = {"enabled", "time_nodes", "dtau"}
_UNITS_KEYS = {"m", "omega", "hbar", "q0", "p0", "dt", "dt_fd", "t_out"}


@dataclass
class RunConfig:
    """Validated run parameters, all dimensionless."""

    potential: PotentialModel
    state: StateSpec
    grid: PhaseSpaceGrid
    coordinate_grid: CoordinateGrid
    nu_max: int
    epsilon_entropy: float
    epsilon_mask: float | None
    beta_list: tuple[float, ...]
    orbit_start: tuple[float, float]
    orbit_dtau: float
    orbit_samples: int
    orbit_tau_limit: float
    dtau: float
    dtau_fd: float
    output_times: tuple[float, ...]
    accumulate: bool
    accumulation_nodes: int
    accumulation_dtau: float
    emit_fields: bool
    echo: dict = field(default_factory=dict)


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {where}")
    return section[key]


def parse_config(raw: dict) -> RunConfig:
    """Validate a parsed JSON document against every module precondition."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be an object")
    _reject_unknown(raw, _TOP_KEYS, "top level")

    units = raw.get("units")
    umap = DimensionlessMap()
    if units is not None:
        _reject_unknown(units, _UNITS_KEYS, "units")
        try:
            umap = DimensionlessMap(
                float(units.get("m", 1.0)), float(units.get("omega", 1.0)), float(units.get("hbar", 1.0))
            )
        except RejectionError as exc:
            raise ConfigError(str(exc)) from exc

    pot_sec = _require(raw, "potential", "top level")
    _reject_unknown(pot_sec, _POTENTIAL_KEYS, "potential")
    kind = _require(pot_sec, "kind", "potential")
    if kind not in CATALOG:
        raise ConfigError(f"unknown potential kind {kind!r}; catalog: {sorted(CATALOG)}")
    try:
        if kind in ("quartic_perturbed", "double_well"):
            potential = CATALOG[kind](float(_require(pot_sec, "lambda", "potential")))
        else:
            if "lambda" in pot_sec:
                raise ConfigError(f"potential {kind!r} takes no lambda parameter")
            potential = CATALOG[kind]()
    except RejectionError as exc:
        raise ConfigError(str(exc)) from exc

    state_sec = _require(raw, "state", "top level")
    _reject_unknown(state_sec, _STATE_KEYS, "state")
    skind = _require(state_sec, "kind", "state")
    try:
        if skind == "harmonic_eigenstate":
            state = StateSpec(skind, n=int(_require(state_sec, "n", "state")))
        elif skind in ("coherent", "cat"):
            state = StateSpec(
                skind,
                x0=float(_require(state_sec, "x0", "state")),
                k0=float(_require(state_sec, "k0", "state")),
            )
        elif skind == "superposition":
            terms = _require(state_sec, "terms", "state")
            parsed = []
            for t in terms:
                _reject_unknown(t, {"re", "im", "n"}, "state.terms[]")
                parsed.append((complex(float(t.get("re", 0.0)), float(t.get("im", 0.0))), int(_require(t, "n", "state.terms[]"))))
            state = StateSpec(skind, terms=tuple(parsed))
        else:
            raise ConfigError(f"unknown state kind {skind!r}")
    except RejectionError as exc:
        raise ConfigError(str(exc)) from exc

    gsec = raw.get("grid", {})
    _reject_unknown(gsec, _GRID_KEYS, "grid")
    csec = raw.get("coordinate_grid", {})
    _reject_unknown(csec, _CGRID_KEYS, "coordinate_grid")
    try:
        grid = PhaseSpaceGrid.centered(
            float(gsec.get("x_max", 8.0)), float(gsec.get("k_max", 8.0)),
            int(gsec.get("n_x", 256)), int(gsec.get("n_k", 256)),
        )
        cgrid = CoordinateGrid(float(csec.get("x_max", 16.0)), int(csec.get("n", 2048)))
    except RejectionError as exc:
        raise ConfigError(str(exc)) from exc

    nu_max = int(raw.get("nu_max", DEFAULT_NU_MAX))
    if nu_max < 0:
        raise ConfigError(f"nu_max must be >= 0, got {nu_max}")
    epsilon_entropy = float(raw.get("epsilon_entropy", ENTROPY_FLOOR))
    if epsilon_entropy <= 0:
        raise ConfigError(f"epsilon_entropy must be positive, got {epsilon_entropy}")
    epsilon_mask = raw.get("epsilon_mask")
    if epsilon_mask is not None:
        epsilon_mask = float(epsilon_mask)
        if epsilon_mask <= 0:
            raise ConfigError(f"epsilon_mask must be positive, got {epsilon_mask}")

    betas = tuple(float(b) for b in raw.get("beta_list", (0.5, 2.0, 3.0)))
    for b in betas:
        if b == 1.0:
            raise ConfigError("beta must differ from 1")
        if b <= 0:
            raise ConfigError(f"beta must be positive, got {b}")

    osec = _require(raw, "orbit", "top level")
    _reject_unknown(osec, _ORBIT_KEYS, "orbit")
    x0 = float(_require(osec, "x0", "orbit"))
    k0 = float(_require(osec, "k0", "orbit"))
    if units is not None and ("q0" in units or "p0" in units):
        x0 = umap.x_from_q(float(units.get("q0", umap.q_from_x(x0))))
        k0 = umap.k_from_p(float(units.get("p0", umap.p_from_k(k0))))
    orbit_dtau = float(osec.get("dtau", 1e-4))
    orbit_samples = int(osec.get("samples", 4096))
    orbit_tau_limit = float(osec.get("tau_limit", 1e3))
    if orbit_dtau <= 0 or orbit_samples < 16 or orbit_tau_limit <= 0:
        raise ConfigError("orbit dtau, samples and tau_limit must be positive (samples >= 16)")
    grad = np.hypot(k0, float(potential.derivative(x0, 1)))
    if grad <= 1e-12:
        raise ConfigError(f"orbit start ({x0}, {k0}) is an equilibrium point")

    dtau = float(raw.get("dtau", 1e-3))
    dtau_fd = float(raw.get("dtau_fd", 1e-3))
    if units is not None:
        if "dt" in units:
            dtau = umap.tau_from_t(float(units["dt"]))
        if "dt_fd" in units:
            dtau_fd = umap.tau_from_t(float(units["dt_fd"]))
    if dtau <= 0 or dtau_fd <= 0:
        raise ConfigError("dtau and dtau_fd must be positive")

    times = raw.get("output_times", [0.0])
    if units is not None and "t_out" in units:
        times = [umap.tau_from_t(float(t)) for t in units["t_out"]]
    times = tuple(float(t) for t in times)
    if not times or any(t < 0 for t in times) or list(times) != sorted(times):
        raise ConfigError("output_times must be a non-empty ascending list of times >= 0")

    acc = raw.get("accumulation", {})
    _reject_unknown(acc, _ACC_KEYS, "accumulation")
    accumulate = bool(acc.get("enabled", False))
    acc_nodes = int(acc.get("time_nodes", 32))
    acc_dtau = float(acc.get("dtau", dtau))
    if accumulate and (acc_nodes < 4 or acc_dtau <= 0):
        raise ConfigError("accumulation needs time_nodes >= 4 and a positive dtau")

    return RunConfig(
        potential=potential,
        state=state,
        grid=grid,
        coordinate_grid=cgrid,
        nu_max=nu_max,
        epsilon_entropy=epsilon_entropy,
        epsilon_mask=epsilon_mask,
        beta_list=betas,
        orbit_start=(x0, k0),
        orbit_dtau=orbit_dtau,
        orbit_samples=orbit_samples,
        orbit_tau_limit=orbit_tau_limit,
        dtau=dtau,
        dtau_fd=dtau_fd,
        output_times=times,
        accumulate=accumulate,
        accumulation_nodes=acc_nodes,
        accumulation_dtau=acc_dtau,
        emit_fields=bool(raw.get("emit_fields", False)),
        echo=raw,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


@contextmanager
def _stage(name: str):
    try:
        yield
    except RejectionError as exc:
        raise RejectionError(f"[{name}] {exc}") from exc


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not np.isfinite(value):
        return ""
    return repr(float(value))


def _flux_csv_rows(times_blocks: list, betas) -> tuple[list[str], list[list[str]]]:
    header = [
        "tau",
        "sigma_flux", "sigma_oracle", "sigma_rel_dev",
        "svn_flux", "svn_volume_term", "svn_full", "svn_oracle", "svn_rel_dev",
        "purity_flux", "purity_volume_term", "purity_full",
        "purity_oracle_dP", "purity_oracle_2pi_adjusted", "purity_rel_dev",
    ]
    for b in betas:
        tag = f"{b:g}"
        header += [
            f"renyi_flux_{tag}", f"renyi_volume_term_{tag}", f"renyi_full_{tag}",
            f"renyi_rate_{tag}", f"renyi_oracle_{tag}", f"renyi_rel_dev_{tag}",
        ]
    rows = []
    for blk in times_blocks:
        row = [_fmt(blk["tau"])]
        s = blk["sigma"]
        row += [_fmt(s["loop"]), _fmt(s.get("oracle")), _fmt(s.get("rel_dev"))]
        v = blk["svn"]
        row += [_fmt(v["loop"]), _fmt(v["volume_term"]), _fmt(v["full"]),
                _fmt(v.get("oracle")), _fmt(v.get("rel_dev"))]
        p = blk["purity"]
        row += [_fmt(p["loop"]), _fmt(p["volume_term"]), _fmt(p["full"]),
                _fmt(p.get("oracle")), _fmt(p.get("oracle_2pi_adjusted")), _fmt(p.get("rel_dev"))]
        for b in betas:
            e = blk["renyi"][f"{b:g}"]
            row += [_fmt(e.get("loop")), _fmt(e.get("volume_term")), _fmt(e.get("full")),
                    _fmt(e.get("rate")), _fmt(e.get("oracle")), _fmt(e.get("rel_dev"))]
        rows.append(row)
    return header, rows


def run(config: RunConfig, out_dir: str | Path, emit_fields: bool = False, quiet: bool = True) -> Path:
    """Execute one configured run and write report.json, fluxes.csv, orbit.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit = emit_fields or config.emit_fields

    def say(msg: str) -> None:
        if not quiet:
            print(msg)

    with _stage("classical.solve_orbit"):
        orbit = solve_orbit(
            config.potential,
            config.orbit_start,
            dtau=config.orbit_dtau,
            n_samples=config.orbit_samples,
            tau_limit=config.orbit_tau_limit,
            x_limit=config.grid.x_max,
        )
    say(f"orbit: T={orbit.period:.6f} E={orbit.energy:.6f}")
    with _stage("fluxes.orbit_region"):
        region = fx.OrbitRegion(orbit, config.grid)

    oracle_kw = dict(
        pgrid=config.grid, cgrid=config.coordinate_grid,
        dtau_fd=config.dtau_fd, dtau_evolve=min(config.dtau, config.dtau_fd / 2),
        region=region, floor=config.epsilon_entropy,
    )

    blocks = []
    field_files = []
    with _stage("states.evaluate_state"):
        phi = evaluate_state(config.state, config.coordinate_grid, 0.0)
    prev_t = 0.0
    for t in config.output_times:
        if t > prev_t:
            with _stage("states.evolve_wavefunction"):
                n_sub = max(1, int(round((t - prev_t) / config.dtau)))
                phi = evolve_wavefunction(phi, config.potential, (t - prev_t) / n_sub, n_sub)
            prev_t = t
        with _stage("states.wigner_transform"):
            w = wigner_transform(phi, config.grid)
        with _stage("fluxes.instantaneous"):
            blk = fx.instantaneous_block(
                w, orbit, config.potential, config.nu_max, config.beta_list,
                config.epsilon_entropy, config.epsilon_mask, region,
            )
        with _stage("fluxes.oracle"):
            fx.attach_oracles(
                blk, config.state, config.potential, orbit, config.beta_list, **oracle_kw,
            )
        blocks.append(blk)
        say(f"tau={t:g}: sigma={blk['sigma']['loop']:.3e} (dev {blk['sigma']['rel_dev']:.2%})")
        if emit:
            fdir = out / "fields"
            fdir.mkdir(exist_ok=True)
            X, K = config.grid.meshes()
            path = fdir / f"W_{t:.6f}.csv"
            with path.open("w", newline="") as fh:
                wr = csv.writer(fh)
                wr.writerow(["x", "k", "W"])
                for xi, ki, wi in zip(X.ravel(), K.ravel(), w.values.ravel()):
                    wr.writerow([repr(float(xi)), repr(float(ki)), repr(float(wi))])
            field_files.append(path.name)

    accumulated = None
    if config.accumulate:
        with _stage("fluxes.period_accumulation"):
            accumulated = fx.period_accumulation(
                config.state, config.potential, orbit, config.nu_max, config.beta_list,
                pgrid=config.grid, cgrid=config.coordinate_grid,
                n_nodes=config.accumulation_nodes, dtau_evolve=config.accumulation_dtau,
                epsilon_entropy=config.epsilon_entropy, region=region,
            )

    report = fx.FluxReport(
        config=config.echo,
        orbit={
            "start": list(config.orbit_start),
            "energy": orbit.energy,
            "period": orbit.period,
            "samples": int(orbit.x.size),
            "single_well_asymmetric": bool(orbit.single_well_asymmetric),
        },
        times=blocks,
        accumulated=accumulated,
    )

    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")

    header, rows = _flux_csv_rows(blocks, config.beta_list)
    with (out / "fluxes.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)

    with (out / "orbit.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["tau", "x_C", "k_C", "n_x", "n_k", "dl"])
        for i in range(orbit.x.size):
            wr.writerow([
                repr(float(orbit.tau[i])), repr(float(orbit.x[i])), repr(float(orbit.k[i])),
                repr(float(orbit.nx[i])), repr(float(orbit.nk[i])), repr(float(orbit.dl[i])),
            ])
    say(f"wrote {out / 'report.json'}, fluxes.csv, orbit.csv"
        + (f", {len(field_files)} field dump(s)" if field_files else ""))
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wignerflow",
        description="Phase-space flux simulator: Wigner currents and continuity-equation quantifiers.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default="wignerflow-run", help="output directory")
    parser.add_argument("--emit-fields", action="store_true", help="dump W(x,k) CSV per output time")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    def fail(code: int, stage: str, message: str) -> int:
        print(f"wignerflow-error code={code} stage={stage} message={message}", file=sys.stderr)
        return code

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, "cli.validate", str(exc))
    except OSError as exc:
        return fail(EXIT_IO, "cli.load_config", str(exc))

    try:
        run(config, args.out, emit_fields=args.emit_fields, quiet=args.quiet)
    except RejectionError as exc:
        return fail(EXIT_NUMERICAL, "run", str(exc))
    except OSError as exc:
        return fail(EXIT_IO, "cli.write", str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
