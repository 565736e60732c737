"""Scenario-driven command line: configure, simulate, verify, report.

Configs are JSON with a published schema (unknown keys are errors).  Every
output file starts with a comment line carrying the config hash and seed so
runs can be traced back to their inputs.  Exit codes: 0 success, 1 check
failure (verify, or simulate with --strict), 2 config/schema violation.
"""

import argparse
import hashlib
import json
import os
import sys

import jsonschema
import numpy as np

from . import analytic, hydro, kinetics, regimes, stats, verify
from .analytic import InitialGaussian, QuantumScale
from .forces import Free, Harmonic, Magnetic
from .linear import propagate_gaussian
from .regime import Frictionless, Kramers, Smoluchowski

_NUMBER = {"type": "number"}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system", "regime", "numerics"],
    "properties": {
        "system": {"enum": ["free", "harmonic", "magnetic"]},
        "regime": {"enum": ["frictionless", "kramers", "smoluchowski"]},
        "heisenberg": {"type": "boolean"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: _NUMBER
                for k in (
                    "a", "b", "q", "beta", "D", "omega", "omega_c",
                    "m", "hbar", "x_ini", "u_ini",
                )
            },
        },
        "numerics": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_grid"],
            "properties": {
                "n_samples": {"type": "integer", "minimum": 1},
                "t_grid": {"type": "array", "items": _NUMBER, "minItems": 1},
                "dt": _NUMBER,
                "seed": {"type": "integer", "minimum": 0},
                "integrator": {"enum": ["exact", "em"]},
                "delta": _NUMBER,
                "n_boot": {"type": "integer", "minimum": 10},
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "n_cells": {"type": "integer", "minimum": 9},
                        "span_sigmas": _NUMBER,
                        "x_min": _NUMBER,
                        "x_max": _NUMBER,
                    },
                },
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv"]}},
                "long_format": {"type": "boolean"},
            },
        },
    },
}


class ConfigError(Exception):
    pass


def canonical_json(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config):
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:12]


def load_config(path):
    with open(path) as f:
        config = json.load(f)
    validate_config(config)
    return config


def validate_config(config):
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from exc
    params = config.get("params", {})
    if config.get("heisenberg"):
        if "a" in params or "b" in params:
            raise ConfigError("params: heisenberg mode forbids explicit a/b")
        for key in ("hbar", "omega"):
            if key not in params:
                raise ConfigError(f"params/{key}: required in heisenberg mode")
    if config["system"] == "harmonic" and "omega" not in params:
        raise ConfigError("params/omega: required for the harmonic system")
    if config["system"] == "magnetic" and "omega_c" not in params:
        raise ConfigError("params/omega_c: required for the magnetic system")
    if config["regime"] == "kramers" and "beta" not in params:
        raise ConfigError("params/beta: required for the kramers regime")
    if config["regime"] == "smoluchowski":
        for key in ("beta", "D"):
            if key not in params:
                raise ConfigError(f"params/{key}: required for the smoluchowski regime")
    tg = config["numerics"]["t_grid"]
    if any(t < 0 for t in tg) or any(b <= a for a, b in zip(tg, tg[1:])):
        raise ConfigError("numerics/t_grid: must be strictly increasing from 0")


def build_force(config):
    params = config.get("params", {})
    m = params.get("m", 1.0)
    system = config["system"]
    if system == "free":
        return Free(m=m)
    if system == "harmonic":
        return Harmonic(omega=params["omega"], m=m)
    return Magnetic(omega_c=params["omega_c"], m=m)


def build_regime(config):
    params = config.get("params", {})
    kind = config["regime"]
    if kind == "frictionless":
        return Frictionless(q=params.get("q", 1.0))
    if kind == "kramers":
        beta = params["beta"]
        q = params.get("q", params.get("D", 1.0) * beta**2)
        return Kramers(q=q, beta=beta)
    return Smoluchowski(diffusion_D=params["D"], beta=params["beta"])


def build_initial(config):
    params = config.get("params", {})
    x_ini = params.get("x_ini", 0.0)
    u_ini = params.get("u_ini", 0.0)
    if config.get("heisenberg"):
        scale = QuantumScale(
            hbar=params["hbar"], m=params.get("m", 1.0), omega=params["omega"]
        )
        return analytic.heisenberg_initial(scale, x_ini=x_ini, u_ini=u_ini)
    return InitialGaussian(
        x_ini=x_ini, u_ini=u_ini, a=params.get("a", 1.0), b=params.get("b", 1.0)
    )


def build_grid(config, force, regime, init):
    grid_cfg = config["numerics"].get("grid", {})
    n_cells = grid_cfg.get("n_cells", 512)
    if "x_min" in grid_cfg and "x_max" in grid_cfg:
        return hydro.Grid1D(grid_cfg["x_min"], grid_cfg["x_max"], n_cells)
    span = grid_cfg.get("span_sigmas", 8.0)
    t_ref = config["numerics"]["t_grid"][-1]
    mean, cov = propagate_gaussian(force, regime, t_ref, init)
    return hydro.grid_spanning(mean[0], np.sqrt(cov[0, 0]), n_cells, span)


def _header(config, seed):
    return f"config={config_hash(config)} seed={seed}"


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _fields_for(config, force, regime, t, init, grid):
    if isinstance(regime, Smoluchowski):
        ctx = regimes.SmoluchowskiContext(
            beta=regime.beta, diffusion_D=regime.diffusion_D, force=force
        )
        return regimes.smoluchowski_fields(t, init, ctx, grid), ctx
    return hydro.fields_from_analytic(t, init, regime.q, grid, force), None


def run_analytic(config, out_dir, seed):
    os.makedirs(out_dir, exist_ok=True)
    force = build_force(config)
    regime = build_regime(config)
    init = build_initial(config)
    header = _header(config, seed)
    t_grid = config["numerics"]["t_grid"]
    q = regime.q if not isinstance(regime, Smoluchowski) else regime.diffusion_D * regime.beta**2

    summary = {"config_hash": config_hash(config), "seed": seed, "command": "analytic"}

    with open(os.path.join(out_dir, "covariance.csv"), "w") as f:
        f.write(f"# {header}\n")
        f.write("t,e,g,h,k,d2\n")
        for t in t_grid:
            cov = analytic.covariance_entries(force, t, init, q)
            try:
                d2 = analytic.d2_coefficient(force, t, init, q)
            except ValueError:
                d2 = cov.det
            k = cov.k if cov.k is not None else 0.0
            f.write(f"{t!r},{cov.e!r},{cov.g!r},{cov.h!r},{k!r},{d2!r}\n")

    if isinstance(force, Magnetic):
        window = analytic.positivity_window(force, init, q, max(t_grid[-1], 1e-6), 512)
        summary["d2_sign_change_time"] = window.first_zero
        summary["d2_all_positive"] = bool(np.all(window.positive))
    elif any(t > 0 for t in t_grid):
        grid = build_grid(config, force, regime, init)
        delta = config["numerics"].get("delta", grid.spacing / 16.0)
        max_cont = max_mom = 0.0
        ctx = None
        for i, t in enumerate(t for t in t_grid if t > 0):
            field, ctx = _fields_for(config, force, regime, t, init, grid)
            hydro.write_field_csv(
                field, os.path.join(out_dir, f"fields_{i:03d}.csv"), header
            )
            if isinstance(regime, Smoluchowski):
                trip = regimes.smoluchowski_triplet(t, delta, init, ctx, grid)
                res, mask = regimes.smoluchowski_momentum_residual(trip, ctx)
            else:
                trip = hydro.analytic_triplet(t, delta, init, q, grid, force)
                d2 = analytic.d2_coefficient(force, t, init, q)
                res, mask = hydro.momentum_residual(trip, force, d2, sign="plus")
            cres, cmask = hydro.continuity_residual(trip)
            hydro.write_residual_csv(
                grid.centers, cres, None, cmask,
                os.path.join(out_dir, f"continuity_{i:03d}.csv"), header,
            )
            hydro.write_residual_csv(
                grid.centers, res, None, mask,
                os.path.join(out_dir, f"momentum_{i:03d}.csv"), header,
            )
            max_cont = max(max_cont, float(np.max(np.abs(cres[cmask]))))
            max_mom = max(max_mom, float(np.max(np.abs(res[mask]))))
        summary["max_continuity_residual"] = max_cont
        summary["max_momentum_residual"] = max_mom
        t_fit = [t for t in t_grid if t > 0][-1]
        if isinstance(regime, Smoluchowski):
            trip = regimes.smoluchowski_triplet(t_fit, delta, init, ctx, grid)
        else:
            trip = hydro.analytic_triplet(t_fit, delta, init, q, grid, force)
        c, sign, gof = hydro.fit_quantum_coefficient(trip, force)
        summary["fitted_coefficient"] = c
        summary["fitted_sign"] = sign
        summary["fit_rms_residual"] = gof

    if (
        config.get("heisenberg")
        and isinstance(force, Harmonic)
        and isinstance(regime, Frictionless)
        and regime.q == 0.0
    ):
        params = config["params"]
        scale = QuantumScale(params["hbar"], params.get("m", 1.0), params["omega"])
        xs = np.linspace(init.x_ini - 6 * init.a, init.x_ini + 6 * init.a, 400)
        worst = 0.0
        for t in np.linspace(0.0, 2 * np.pi / scale.omega, 50):
            mean, cov = propagate_gaussian(force, regime, t, init)
            rho = analytic.gaussian_density(xs, mean[0], cov[0, 0])
            worst = max(worst, float(np.max(np.abs(rho - analytic.coherent_density(xs, t, scale, init.x_ini)))))
        summary["coherent_sup_error"] = worst
        summary["coherent_match"] = worst <= 1e-10

    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def run_simulate(config, out_dir, seed, strict=False):
    os.makedirs(out_dir, exist_ok=True)
    force = build_force(config)
    regime = build_regime(config)
    init = build_initial(config)
    num = config["numerics"]
    n = num.get("n_samples", 10000)
    if n < 10:
        raise ConfigError("numerics/n_samples: simulate requires N >= 10")
    n_boot = num.get("n_boot", 200)
    header = _header(config, seed)
    t_grid = list(num["t_grid"])

    one_d = force.n_dim == 1
    grid = build_grid(config, force, regime, init) if one_d else None
    delta = num.get("delta", grid.spacing / 16.0 if one_d else 1e-3)
    t_diag = t_grid[-1] if t_grid[-1] > 0 else None
    sim_times = sorted(set(t_grid) | ({t_diag - delta, t_diag + delta} if one_d and t_diag else set()))
    sim_times = [t for t in sim_times if t >= 0]

    snaps = kinetics.simulate(
        init, force, regime, sim_times, n, seed,
        integrator=num.get("integrator", "exact"), dt=num.get("dt"),
    )
    by_time = dict(zip(sim_times, snaps))
    long_format = config.get("outputs", {}).get("long_format", True)
    kinetics.write_snapshots(
        [by_time[t] for t in t_grid], os.path.join(out_dir, "snapshots.csv"),
        header, long_format=long_format,
    )

    checks = {}
    cov_rows = []
    for t in t_grid:
        ens = by_time[t]
        _, cov_ref = propagate_gaussian(force, regime, t, init)
        s = ens.state()
        sample_cov = np.cov(s, rowvar=False).reshape(cov_ref.shape)
        idx = stats.bootstrap_indices(n, min(n_boot, 100), seed + 1)
        boots = np.array([np.cov(s[i], rowvar=False).reshape(cov_ref.shape) for i in idx])
        se = boots.std(axis=0, ddof=1)
        ok = bool(np.all(np.abs(sample_cov - cov_ref) <= 3.0 * se + 1e-15))
        cov_rows.append((t, ok))
    checks["covariance_within_3se"] = all(ok for _, ok in cov_rows)

    if one_d and t_diag:
        trip_ens = [by_time[t_diag - delta], by_time[t_diag], by_time[t_diag + delta]]
        trip = tuple(hydro.estimate_fields(e, grid) for e in trip_ens)
        for f in trip:
            if f.coverage < 0.99:
                checks["grid_coverage_ok"] = False
        res, mask = hydro.continuity_residual(trip)

        def resample_residual(indices):
            sub = tuple(hydro.subsample_field(e, grid, indices) for e in trip_ens)
            r, m = hydro.continuity_residual(sub)
            return np.where(m, r, 0.0)

        idx = stats.bootstrap_indices(n, min(n_boot, 100), seed + 2)
        boots = np.array([resample_residual(i) for i in idx])
        stat_err = boots.std(axis=0, ddof=1)
        hydro.write_residual_csv(
            grid.centers, res, stat_err, mask,
            os.path.join(out_dir, "continuity_mc.csv"), header,
        )
        hydro.write_field_csv(trip[1], os.path.join(out_dir, "fields_mc.csv"), header)
        good = mask & (stat_err > 0)
        checks["continuity_within_3se"] = bool(
            np.all(np.abs(res[good]) <= 3.0 * stat_err[good])
        )

    passed = all(checks.values())
    summary = {
        "config_hash": config_hash(config),
        "seed": seed,
        "command": "simulate",
        "n_samples": n,
        "checks": checks,
        "covariance_by_time": [{"t": t, "pass": ok} for t, ok in cov_rows],
        "result": "PASS" if passed else "FAIL",
    }
    _write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary, (0 if passed or not strict else 1)


def run_verify(out_dir=None):
    results = verify.run_checks()
    for rec in results:
        status = "PASS" if rec["passed"] else "FAIL"
        print(f"{status} {rec['name']} measured={rec['measured']:.3e} tol={rec['tolerance']:.3e}")
    report = {"checks": results, "all_passed": all(r["passed"] for r in results)}
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, "verify_report.json"), report)
    return report


_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot the field and residual CSVs written next to this script.\"\"\"
import glob
import io
import os
import numpy as np
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for pattern, cols in (("fields_*.csv", ["rho", "v", "qp_term"]), ("*_0*.csv", ["residual"])):
    for path in sorted(glob.glob(os.path.join(here, pattern))):
        with open(path) as f:
            body = "\\n".join(l for l in f.read().splitlines() if not l.startswith("#"))
        data = np.genfromtxt(io.StringIO(body), delimiter=",", names=True)
        if data.dtype.names is None or "x" not in data.dtype.names:
            continue
        fig, ax = plt.subplots()
        for col in cols:
            if col in data.dtype.names:
                ax.plot(data["x"], data[col], label=col)
        ax.set_xlabel("x")
        ax.legend()
        ax.set_title(os.path.basename(path))
        fig.savefig(path.replace(".csv", ".png"), dpi=120)
        plt.close(fig)
print("wrote plots next to the CSV files")
"""


def run_report(out_dir):
    path = os.path.join(out_dir, "summary.json")
    if not os.path.exists(path):
        raise ConfigError(f"no summary.json under {out_dir}; run analytic/simulate first")
    with open(path) as f:
        summary = json.load(f)
    lines = [f"phasekin report for {out_dir}", "=" * 40]
    for key in sorted(summary):
        lines.append(f"{key}: {summary[key]}")
    text = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "report.txt"), "w") as f:
        f.write(text)
    with open(os.path.join(out_dir, "plots.py"), "w") as f:
        f.write(_PLOT_SCRIPT)
    print(text, end="")
    return summary


def main(argv=None):
    parser = argparse.ArgumentParser(prog="phasekin")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analytic", "simulate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strict", action="store_true")
    p = sub.add_parser("verify")
    p.add_argument("--out", default=None)
    p = sub.add_parser("report")
    p.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    threads = os.environ.get("PHASEKIN_THREADS")
    if threads:
        try:
            import numba

            numba.set_num_threads(max(1, int(threads)))
        except ImportError:
            pass

    try:
        if args.command == "verify":
            report = run_verify(args.out)
            return 0 if report["all_passed"] else 1
        if args.command == "report":
            run_report(args.out)
            return 0
        config = load_config(args.config)
        seed = args.seed if args.seed is not None else config["numerics"].get("seed", 0)
        out_dir = args.out or config.get("outputs", {}).get("directory", "out")
        if args.command == "analytic":
            run_analytic(config, out_dir, seed)
            return 0
        summary, code = run_simulate(config, out_dir, seed, strict=args.strict)
        print(summary["result"])
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
