"""Acceptance gate: seven pinned criteria with explicit tolerances and budgets.

Each test computes its measurement, records one pass/fail line for the
terminal summary, then asserts.  Criteria are independent; none shares
state with another.
"""

import json
import time

import numpy as np
import pytest

from phasekin import (
    Free,
    Frictionless,
    Harmonic,
    InitialGaussian,
    Kramers,
    Magnetic,
    QuantumScale,
    SmoluchowskiContext,
    coherent_density,
    collision_moments,
    covariance_entries_free,
    d2_coefficient,
    fit_quantum_coefficient,
    heisenberg_initial,
)
from phasekin import hydro, regimes
from phasekin.cli import main
from phasekin.kinetics import simulate
from phasekin.linear import propagate_gaussian
from phasekin.stats import bootstrap_cov_se, cov_entries_2d

from conftest import record_criterion

UNIT = InitialGaussian(a=1.0, b=1.0)


def _finish(name, passed, detail, budget, elapsed):
    in_budget = elapsed <= budget
    record_criterion(name, passed and in_budget, f"{detail}; {elapsed:.1f}s/{budget:.0f}s")
    assert passed, detail
    assert in_budget, f"runtime {elapsed:.1f}s exceeds {budget:.0f}s budget"


def test_criterion_1_covariance_law_monte_carlo():
    t0 = time.perf_counter()
    n = 100000
    times = [0.5, 1.0, 2.0]
    snaps = simulate(UNIT, Free(), Frictionless(1.0), times, n, 2024)
    worst_sigma = 0.0
    for t, snap in zip(times, snaps):
        x, u = snap.x[:, 0], snap.u[:, 0]
        ref = covariance_entries_free(t, UNIT, 1.0)
        sample = cov_entries_2d(x, u)
        se = bootstrap_cov_se(x, u, n_boot=200, seed=1)
        for got, want, err in zip(sample, (ref.e, ref.h, ref.g), se):
            worst_sigma = max(worst_sigma, abs(got - want) / err)
    elapsed = time.perf_counter() - t0
    _finish(
        "1 covariance law (N=1e5, t in {0.5,1,2}, 3 bootstrap SE)",
        worst_sigma <= 3.0,
        f"worst deviation {worst_sigma:.2f} SE",
        30.0,
        elapsed,
    )


def test_criterion_2_pressure_coefficient_and_sign():
    t0 = time.perf_counter()
    grid = hydro.grid_spanning(0.0, np.sqrt(8.0 / 3.0), 512)
    trip = hydro.analytic_triplet(1.0, grid.spacing / 16.0, UNIT, 1.0, grid)
    c_fric, _, _ = fit_quantum_coefficient(trip, Free())

    ctx = SmoluchowskiContext(beta=1.0, diffusion_D=1.0)
    sgrid = hydro.grid_spanning(0.0, np.sqrt(1.0 + 2.0), 512)
    strip = regimes.smoluchowski_triplet(1.0, sgrid.spacing / 16.0, UNIT, ctx, sgrid)
    c_smol, _, _ = fit_quantum_coefficient(strip, Free())

    ok = abs(c_fric - 8.0) <= 0.005 * 8.0 and abs(c_smol + 2.0) <= 0.005 * 2.0
    elapsed = time.perf_counter() - t0
    _finish(
        "2 pressure coefficient fits (+8.0 and -2.0 within 0.5%)",
        ok,
        f"frictionless {c_fric:.4f}, overdamped {c_smol:.4f}",
        5.0,
        elapsed,
    )


def test_criterion_3_small_frequency_limits():
    t0 = time.perf_counter()
    worst = 0.0
    for t in (0.1, 1.0, 5.0):
        free = d2_coefficient(Free(), t, UNIT, 1.0)
        for force in (Magnetic(omega_c=1e-4), Harmonic(omega=1e-4)):
            val = d2_coefficient(force, t, UNIT, 1.0)
            worst = max(worst, abs(val - free) / free)
    elapsed = time.perf_counter() - t0
    _finish(
        "3 small-frequency limits (rel 1e-6 at t in {0.1,1,5})",
        worst <= 1e-6,
        f"worst relative deviation {worst:.2e}",
        1.0,
        elapsed,
    )


def test_criterion_4_coherent_state():
    t0 = time.perf_counter()
    scale = QuantumScale(hbar=1.0, m=1.0, omega=1.0)
    init = heisenberg_initial(scale, x_ini=1.0)
    force, reg = Harmonic(omega=1.0), Frictionless(0.0)
    xs = np.linspace(-6.0, 6.0, 600)
    sup_err = width_dev = 0.0
    for t in np.linspace(0.0, 2.0 * np.pi, 50):
        mean, cov = propagate_gaussian(force, reg, t, init)
        rho = np.exp(-((xs - mean[0]) ** 2) / (2.0 * cov[0, 0])) / np.sqrt(
            2.0 * np.pi * cov[0, 0]
        )
        sup_err = max(sup_err, float(np.max(np.abs(rho - coherent_density(xs, t, scale, 1.0)))))
        width_dev = max(width_dev, abs(float(cov[0, 0]) - init.a**2))
    ok = sup_err <= 1e-10 and width_dev <= 1e-10
    elapsed = time.perf_counter() - t0
    _finish(
        "4 coherent state (sup error and width drift <= 1e-10)",
        ok,
        f"sup error {sup_err:.2e}, width drift {width_dev:.2e}",
        2.0,
        elapsed,
    )


def test_criterion_5_conservation_residuals():
    t0 = time.perf_counter()
    maxima = {}
    for n in (512, 1024):
        grid = hydro.grid_spanning(0.0, np.sqrt(8.0 / 3.0), n)
        trip = hydro.analytic_triplet(1.0, grid.spacing / 16.0, UNIT, 1.0, grid)
        cres, cmask = hydro.continuity_residual(trip)
        mres, mmask = hydro.momentum_residual(trip, Free(), 4.0, sign="plus")
        maxima[n] = (
            float(np.max(np.abs(cres[cmask]))),
            float(np.max(np.abs(mres[mmask]))),
        )
    shrink = min(maxima[512][i] / maxima[1024][i] for i in range(2))
    grid = hydro.grid_spanning(0.0, np.sqrt(8.0 / 3.0), 512)
    field = hydro.fields_from_analytic(1.0, UNIT, 1.0, grid)
    pres, pmask = hydro.pressure_identity_residual(field, 4.0)
    p_max = float(np.max(np.abs(pres[pmask])))
    ok = max(maxima[512]) <= 1e-4 and shrink >= 3.0 and p_max <= 1e-4
    elapsed = time.perf_counter() - t0
    _finish(
        "5 conservation residuals (<=1e-4 at 512 cells, >=3x shrink at 1024)",
        ok,
        f"max residual {max(maxima[512]):.2e}, shrink {shrink:.1f}x, "
        f"pressure identity {p_max:.2e}",
        10.0,
        elapsed,
    )


def test_criterion_6_collision_moments():
    t0 = time.perf_counter()
    rho = np.array([0.1, 0.7, 1.3])
    v = np.array([-0.4, 0.0, 0.9])

    m0_f, m1_f, m2_f = collision_moments(rho, v, np.ones(3), Frictionless(0.8))
    frictionless_ok = np.all(m0_f == 0.0) and np.all(m1_f == 0.0) and np.allclose(
        m2_f, 2.0 * 0.8 * rho, rtol=0, atol=1e-15
    )

    q, beta = 1.2, 0.5
    m0_k, m1_k, m2_k = collision_moments(
        rho, v, np.full(3, q / beta), Kramers(q=q, beta=beta)
    )
    kramers_ok = (
        np.all(m0_k == 0.0)
        and np.max(np.abs(m1_k - (-beta * rho * v))) <= 1e-12
        and np.max(np.abs(m2_k)) <= 1e-12
    )
    ok = bool(frictionless_ok and kramers_ok)
    elapsed = time.perf_counter() - t0
    _finish(
        "6 collision moments (exact zeros, Kramers forms to 1e-12)",
        ok,
        f"frictionless {'ok' if frictionless_ok else 'bad'}, "
        f"kramers {'ok' if kramers_ok else 'bad'}",
        1.0,
        elapsed,
    )


def test_criterion_7_byte_identical_outputs(tmp_path, capsys):
    t0 = time.perf_counter()
    cfg = {
        "system": "free",
        "regime": "frictionless",
        "params": {"a": 1.0, "b": 1.0, "q": 1.0},
        "numerics": {"t_grid": [0.0, 1.0], "n_samples": 5000, "seed": 11, "n_boot": 50},
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "r1")]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "r2")]) == 0
    capsys.readouterr()
    names = ("snapshots.csv", "summary.json", "continuity_mc.csv", "fields_mc.csv")
    same = {
        name: (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
        for name in names
    }
    ok = all(same.values())
    elapsed = time.perf_counter() - t0
    _finish(
        "7 determinism (byte-identical outputs for same config and seed)",
        ok,
        "all artifacts identical" if ok else f"differing: {[k for k, v in same.items() if not v]}",
        30.0,
        elapsed,
    )
