"""Command-line driver: scheme runs, parameter sweeps, benchmark-table and
trajectory reproduction, effective-model dumps.

Subcommands: steady, sweep, table1, trajectory, reduce.  Rates are given in
units of g unless suffixed with a rate name (``0.1gamma``, ``0.2kappa``).
Sweeps run on a thread pool capped by the LE_THREADS environment variable;
outputs are CSV (12 significant digits) and JSON run records.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, effective, liouville, ratemodel, schemes
from .hilbert import named_state
from .model import SystemParams, build_master_equation
from .schemes import SchemeId, parse_scheme, preset

DEFAULT_G_MHZ = 16.0  # g / 2 pi, reference cavity


def _format(x: float) -> str:
    return f"{x:.11e}"


def parse_rate(text: str, gamma: float, kappa: float, g: float = 1.0) -> float:
    """Parse ``0.25``, ``0.1gamma``, ``0.5kappa`` or ``0.02g`` into g units."""
    text = text.strip()
    for suffix, scale in (("gamma", gamma), ("kappa", kappa), ("g", g)):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * scale
    return float(text)


def _cavity_args(args) -> tuple[float, float, float]:
    g = args.g
    if args.C is not None:
        gamma, kappa = schemes.cavity_rates_for_cooperativity(args.C, g=g)
    else:
        gamma = args.gamma if args.gamma is not None else schemes.DEFAULT_GAMMA_OVER_G * g
        kappa = args.kappa if args.kappa is not None else schemes.DEFAULT_KAPPA_OVER_G * g
    return g, gamma, kappa


def build_params(args) -> SystemParams:
    g, gamma, kappa = _cavity_args(args)
    omega = parse_rate(args.omega, gamma, kappa, g) if args.omega else None
    omega_mw = parse_rate(args.omega_mw, gamma, kappa, g) if args.omega_mw else None
    params = preset(
        args.scheme, g=g, gamma=gamma, kappa=kappa, Omega=omega, Omega_MW=omega_mw
    )
    overrides = {}
    for key in ("Delta", "delta", "beta", "phi", "alpha", "b", "n_max"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        params = params.replace(**overrides)
    return params


def config_hash(config: dict) -> str:
    clean = {k: v for k, v in config.items() if not callable(v)}
    canon = json.dumps(clean, sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def run_record(scheme: str, params: SystemParams, outputs: list[dict],
               config: dict) -> dict:
    return {
        "scheme": str(scheme),
        "params": params.to_dict(),
        "outputs": outputs,
        "provenance": {
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "config_hash": config_hash(config),
        },
    }


def write_record(record: dict, path: Path) -> None:
    path.write_text(json.dumps(record, indent=1) + "\n")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_format(x) if isinstance(x, float) else x for x in row]
            )


def _workers() -> int:
    env = os.environ.get("LE_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def microseconds(t_over_g: float, g_mhz: float) -> float:
    """Convert a time in 1/g units to microseconds using g/2pi in MHz."""
    return t_over_g / (2.0 * math.pi * g_mhz)


# -- steady ------------------------------------------------------------------


def cmd_steady(args) -> int:
    params = build_params(args)
    scheme = parse_scheme(args.scheme)
    me = build_master_equation(params)
    lv = liouville.vectorize(me)
    outputs = []
    if scheme is SchemeId.MIX:
        fid = schemes.scheme_numeric_fidelity(
            scheme, g=params.g, gamma=params.gamma, kappa=params.kappa,
            Omega=params.Omega,
        )
        gap = liouville.spectral_gap(lv).gap
    else:
        rho = liouville.steady_state(lv)
        fid = liouville.fidelity(rho, named_state(me.space, "S"))
        gap = liouville.spectral_gap(lv).gap
    C = params.cooperativity()
    fid_analytic = 1.0 - schemes.static_error(scheme, C)
    gap_analytic = schemes.gap_analytic(scheme, params)
    outputs += [
        {"name": "fidelity", "value": fid, "method": "full"},
        {"name": "fidelity", "value": fid_analytic, "method": "analytic"},
        {"name": "gap", "value": gap, "method": "full"},
        {"name": "gap", "value": gap_analytic, "method": "analytic"},
    ]
    print(f"scheme {scheme}  C = {C:.4g}  Omega = {params.Omega:.4g} g")
    print(f"  fidelity  full {fid:.5f}   analytic {fid_analytic:.5f}   "
          f"deviation {fid - fid_analytic:+.4f}")
    print(f"  gap       full {gap:.4e} g   analytic {gap_analytic:.4e} g   "
          f"deviation {(gap - gap_analytic) / gap_analytic:+.2%}")
    record = run_record(scheme, params, outputs, vars(args) | {"cmd": "steady"})
    out = Path(args.record) if args.record else Path(f"steady_{scheme}.json")
    write_record(record, out)
    print(f"record written to {out}")
    return 0


# -- sweep -------------------------------------------------------------------


def _sweep_point(axis: str, value: float, scheme: SchemeId, args) -> list[list]:
    g = args.g
    rows = []
    try:
        if axis == "cooperativity":
            gamma, kappa = schemes.cavity_rates_for_cooperativity(value, g=g)
            fid = schemes.scheme_numeric_fidelity(scheme, g=g, gamma=gamma,
                                                  kappa=kappa, Omega=gamma / 10.0)
            params = preset(scheme, g=g, gamma=gamma, kappa=kappa, Omega=gamma / 10.0)
            rows.append([axis, value, str(scheme), "full", fid, 1.0 - fid,
                         float("nan"), "ok"])
            rows.append([axis, value, str(scheme), "analytic",
                         1.0 - schemes.static_error(scheme, value),
                         schemes.static_error(scheme, value), float("nan"), "ok"])
        elif axis == "drive":
            g_, gamma, kappa = _cavity_args(args)
            params = preset(scheme, g=g_, gamma=gamma, kappa=kappa, Omega=value)
            fid = schemes.scheme_numeric_fidelity(scheme, g=g_, gamma=gamma,
                                                  kappa=kappa, Omega=value)
            tol = schemes.WS_DEGENERACY_TOL if scheme is SchemeId.WS else None
            gap = (schemes.numeric_gap(params, tol)
                   if scheme is not SchemeId.MIX else float("nan"))
            rows.append([axis, value, str(scheme), "full", fid, 1.0 - fid, gap, "ok"])
            rows.append([axis, value, str(scheme), "analytic",
                         float("nan"), float("nan"),
                         schemes.gap_analytic(scheme, params), "ok"])
        elif axis == "asymmetry":
            g_, gamma, kappa = _cavity_args(args)
            omega = parse_rate(args.omega, gamma, kappa, g_) if args.omega else None
            params = preset(scheme, g=g_, gamma=gamma, kappa=kappa,
                            Omega=omega).replace(alpha=value)
            fid = schemes.numeric_fidelity(params)
            rows.append([axis, value, str(scheme), "full", fid, 1.0 - fid,
                         float("nan"), "ok"])
            rows.append([axis, value, str(scheme), "analytic", float("nan"),
                         schemes.asymmetry_error(value), float("nan"), "ok"])
        elif axis == "time":
            g_, gamma, kappa = _cavity_args(args)
            params = preset(scheme, g=g_, gamma=gamma, kappa=kappa)
            opt = schemes.optimal_drive_for_time(value, params)
            rows.append([axis, value, str(scheme), "analytic",
                         1.0 - opt["error"], opt["error"], opt["Omega_opt"], "ok"])
        else:
            raise ValueError(f"unknown axis {axis}")
    except Exception as exc:  # noqa: BLE001 - per-point failures become rows
        rows.append([axis, value, str(scheme), "none", float("nan"),
                     float("nan"), float("nan"), f"error: {exc}"])
    return rows


def cmd_sweep(args) -> int:
    axis = args.axis
    values = np.geomspace(args.start, args.stop, args.points) if args.log \
        else np.linspace(args.start, args.stop, args.points)
    scheme_ids = [parse_scheme(s) for s in args.schemes.split(",")]
    tasks = [(i, v, s) for i, v in enumerate(values) for s in scheme_ids]
    results: dict[tuple[int, str], list[list]] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            futures = {
                pool.submit(_sweep_point, axis, float(v), s, args): (i, str(s))
                for i, v, s in tasks
            }
            for fut, key in futures.items():
                results[key] = fut.result()
    header = ["axis", "value", "scheme", "method", "fidelity", "error", "gap", "status"]
    rows = []
    failed = False
    for i, v, s in tasks:
        for row in results[(i, str(s))]:
            rows.append(row)
            failed = failed or str(row[-1]).startswith("error")
    out = Path(args.out)
    write_csv(out, header, rows)
    print(f"{len(rows)} rows written to {out}")
    return 1 if failed else 0


# -- table1 ------------------------------------------------------------------


def cmd_table1(args) -> int:
    scheme_ids = [parse_scheme(s) for s in args.schemes.split(",")]
    g, gamma, kappa = args.g, schemes.DEFAULT_GAMMA_OVER_G * args.g, \
        schemes.DEFAULT_KAPPA_OVER_G * args.g
    C = g * g / (gamma * kappa)
    header = ["scheme", "static_error", "max_fidelity", "gap_at_2pct",
              "convergence_time_at_2pct", "needs_confinement"]
    rows = []
    failed = False
    for scheme in scheme_ids:
        try:
            static = schemes.static_error(scheme, C)
            fid = schemes.scheme_numeric_fidelity(scheme, g=g, gamma=gamma,
                                                  kappa=kappa, Omega=gamma / 10.0)
            omega2 = schemes.drive_for_dynamic_error(scheme, 0.02, g=g,
                                                     gamma=gamma, kappa=kappa)
            probe = SchemeId.T0 if scheme is SchemeId.MIX else scheme
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                params2 = preset(probe, g=g, gamma=gamma, kappa=kappa, Omega=omega2)
            me = build_master_equation(params2)
            lv = liouville.vectorize(me)
            report = liouville.spectral_gap(lv)
            rho_ss = liouville.steady_state(lv)
            rho0 = liouville.mixed_ground_state(me.space)
            t_conv = liouville.time_to_convergence(lv, rho0, rho_ss,
                                                   threshold=0.01,
                                                   gap_hint=report.gap)
            t_us = microseconds(t_conv, args.g_mhz)
            rows.append([str(scheme), static, fid, report.gap, t_us,
                         "yes" if schemes.needs_confinement(scheme) else "no"])
            print(f"{scheme!s:9s} static {static:.4f}  fidelity {fid:.4f}  "
                  f"gap@2% {report.gap:.2e} g  t@2% {t_us:.1f} us "
                  f"(1/gap = {microseconds(1.0 / report.gap, args.g_mhz):.1f} us)  "
                  f"confinement {'yes' if schemes.needs_confinement(scheme) else 'no'}")
        except Exception as exc:  # noqa: BLE001 - report per scheme
            failed = True
            rows.append([str(scheme), float("nan"), float("nan"), float("nan"),
                         float("nan"), f"error: {exc}"])
            print(f"{scheme}: failed: {exc}")
    write_csv(Path(args.out), header, rows)
    print(f"table written to {args.out}")
    return 1 if failed else 0


# -- trajectory ----------------------------------------------------------------


def _initial_state(spec: str, space):
    if spec == "mixed":
        return liouville.mixed_ground_state(space)
    return liouville.DensityMatrix.pure(named_state(space, spec))


def cmd_trajectory(args) -> int:
    params = build_params(args)
    scheme = parse_scheme(args.scheme)
    methods = [m.strip() for m in args.methods.split(",")]
    header = ["t", "method", "P_00", "P_T", "P_11", "P_S", "P_excited_total",
              "fidelity"]
    rows = []
    failed = False
    dt = args.dt if args.dt else 0.05 / params.g
    for method in methods:
        try:
            if method == "full":
                me = build_master_equation(params)
            elif method == "effective":
                me = effective.reduce(effective.partition(params)).as_master_equation()
            elif method == "dressed_effective":
                me = effective.reduce_dressed(
                    effective.partition(params)).as_master_equation()
            elif method == "rate":
                if scheme is not SchemeId.S1:
                    raise ValueError("rate model is defined for the S1 scheme only")
                rm = ratemodel.build_rates(params, dressed=True)
                db = ratemodel.build_dressed_basis(params.Omega_MW, params.beta)
                n = max(2, min(1001, int(args.t_final / dt / 50) + 2))
                times = np.linspace(0.0, args.t_final, n)
                bare0 = {"mixed": np.full(4, 0.25),
                         "00": np.eye(4)[0], "T": np.eye(4)[1],
                         "11": np.eye(4)[2], "S": np.eye(4)[3]}[args.rho0]
                p0 = (db.transform() ** 2) @ bare0
                pops = ratemodel.evolve(rm, p0, times)
                # dressed populations map to bare ones through the squared
                # basis-change amplitudes (diagonal-density approximation)
                weights = db.transform() ** 2
                for i, t in enumerate(times):
                    bare = weights.T @ pops[i]
                    rows.append([float(t), method, float(bare[0]), float(bare[1]),
                                 float(bare[2]), float(bare[3]), 0.0,
                                 float(bare[3])])
                continue
            else:
                raise ValueError(f"unknown method {method!r}")
            rho0 = _initial_state(args.rho0, me.space)
            traj = liouville.propagate(me, rho0, args.t_final, dt)
            _, data = liouville.trajectory_csv_rows(traj)
            for data_row in data:
                rows.append([data_row[0], method] + data_row[1:])
        except Exception as exc:  # noqa: BLE001 - per-method failures isolated
            failed = True
            rows.append([0.0, method, float("nan"), float("nan"), float("nan"),
                         float("nan"), float("nan"), f"error: {exc}"])
            print(f"method {method}: failed: {exc}")
    write_csv(Path(args.out), header, rows)
    print(f"{len(rows)} rows written to {args.out}")
    return 1 if failed else 0


# -- reduce --------------------------------------------------------------------


def cmd_reduce(args) -> int:
    params = build_params(args)
    pm = effective.partition(params)
    model = effective.reduce_dressed(pm) if args.dressed else effective.reduce(pm)
    rates = {
        k: ([v.real, v.imag] if isinstance(v, complex) else float(v))
        for k, v in effective.effective_rates(params).items()
    }
    Path(args.out).write_text(model.to_json(rates=rates) + "\n")
    print(f"effective model written to {args.out}")
    return 0


# -- parser --------------------------------------------------------------------


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", default="S1")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--C", type=float, default=None,
                   help="set cooperativity, keeping gamma/kappa = 12/5")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--omega", default=None,
                   help="optical drive, e.g. 0.0375 or 0.1gamma")
    p.add_argument("--omega-mw", dest="omega_mw", default=None)
    p.add_argument("--Delta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavsinglet",
        description="Dissipative preparation of a two-atom entangled steady "
                    "state in a lossy cavity: steady states, spectra, sweeps "
                    "and benchmark tables.",
    )
    parser.add_argument("--g-mhz", dest="g_mhz", type=float, default=DEFAULT_G_MHZ,
                        help="g / 2 pi in MHz for time conversion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", help="steady-state fidelity and gap")
    _add_param_flags(p)
    p.add_argument("--record", default=None, help="run-record JSON path")
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("sweep", help="parameter sweeps to CSV")
    _add_param_flags(p)
    p.add_argument("--axis", required=True,
                   choices=["cooperativity", "drive", "time", "asymmetry"])
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.add_argument("--schemes", default="S1")
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("table1", help="benchmark table across schemes")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--schemes", default="S1,S0,T1,T0,T0S0_mix,WS")
    p.add_argument("--out", default="table1.csv")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("trajectory", help="multi-method population trajectories")
    _add_param_flags(p)
    p.add_argument("--t-final", dest="t_final", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--methods", default="full")
    p.add_argument("--rho0", default="mixed",
                   help="mixed or a named state (S, T, 00, 11)")
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("reduce", help="dump the effective ground-state model")
    _add_param_flags(p)
    p.add_argument("--dressed", action="store_true")
    p.add_argument("--out", default="effective_model.json")
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
