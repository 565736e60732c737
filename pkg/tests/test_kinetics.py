"""Ensemble simulation: exact transition, Euler-Maruyama, moments, export."""

import numpy as np
import pytest

from phasekin import (
    Ensemble,
    Free,
    Frictionless,
    Harmonic,
    InitialGaussian,
    Kramers,
    Magnetic,
    Smoluchowski,
    collision_moments,
    em_step,
    exact_step,
    simulate,
)
from phasekin.kinetics import sample_initial, write_snapshots
from phasekin.linear import propagate_gaussian, transition
from phasekin.stats import bootstrap_cov_se, cov_entries_2d

UNIT = InitialGaussian(a=1.0, b=1.0)


# ---------------------------------------------------------------------------
# exact transition moments
# ---------------------------------------------------------------------------

def test_free_transition_noise_covariance():
    q, dt = 0.8, 0.3
    _, sigma, chol = transition(Free(), Frictionless(q), dt)
    expected = np.array(
        [[(2.0 / 3.0) * q * dt**3, q * dt**2], [q * dt**2, 2.0 * q * dt]]
    )
    np.testing.assert_allclose(sigma, expected, rtol=1e-12)
    np.testing.assert_allclose(chol @ chol.T, expected, rtol=0, atol=1e-14)


def test_transition_semigroup_under_composition():
    for force in (Free(), Harmonic(omega=1.3), Magnetic(omega_c=0.9)):
        phi_h, sig_h, _ = transition(force, Frictionless(0.7), 0.4)
        phi, sig, _ = transition(force, Frictionless(0.7), 0.8)
        np.testing.assert_allclose(phi_h @ phi_h, phi, rtol=0, atol=1e-13)
        np.testing.assert_allclose(
            phi_h @ sig_h @ phi_h.T + sig_h, sig, rtol=0, atol=1e-13
        )


def test_propagate_gaussian_free_reference():
    mean, cov = propagate_gaussian(Free(), Frictionless(1.0), 1.0, UNIT)
    np.testing.assert_allclose(mean, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(cov, [[8.0 / 3.0, 2.0], [2.0, 3.0]], rtol=1e-13)


def test_kramers_velocity_variance_relaxes_to_q_over_beta():
    q, beta = 2.0, 1.5
    _, cov = propagate_gaussian(Free(), Kramers(q=q, beta=beta), 30.0, UNIT)
    assert cov[1, 1] == pytest.approx(q / beta, rel=1e-8)


# ---------------------------------------------------------------------------
# exact integrator on ensembles
# ---------------------------------------------------------------------------

def test_exact_step_is_deterministic_given_seed():
    ens = sample_initial(UNIT, Free(), Frictionless(1.0), 64, 11)
    a = exact_step(ens, Free(), Frictionless(1.0), 0.5)
    b = exact_step(ens, Free(), Frictionless(1.0), 0.5)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.u, b.u)
    assert a.t == 0.5 and a.step_index == 1


def test_single_sample_ballistic_limit():
    init = InitialGaussian(x_ini=0.5, u_ini=2.0, a=1e-9, b=1e-9)
    ens = sample_initial(init, Free(), Frictionless(0.0), 1, 3)
    ens = exact_step(ens, Free(), Frictionless(0.0), 3.0)
    assert ens.x[0, 0] == pytest.approx(0.5 + 2.0 * 3.0, abs=1e-7)
    assert ens.u[0, 0] == pytest.approx(2.0, abs=1e-8)


def test_harmonic_noiseless_energy_conserved():
    omega = 1.7
    init = InitialGaussian(x_ini=1.0, u_ini=0.3, a=0.5, b=0.4)
    ens = sample_initial(init, Harmonic(omega=omega), Frictionless(0.0), 200, 5)
    energy0 = 0.5 * ens.u[:, 0] ** 2 + 0.5 * omega**2 * ens.x[:, 0] ** 2
    for _ in range(10000):
        ens = exact_step(ens, Harmonic(omega=omega), Frictionless(0.0), 0.01)
    energy = 0.5 * ens.u[:, 0] ** 2 + 0.5 * omega**2 * ens.x[:, 0] ** 2
    np.testing.assert_allclose(energy, energy0, rtol=1e-12)


def test_magnetic_rotates_velocity_plane():
    wc = 2.0
    ens = sample_initial(UNIT, Magnetic(omega_c=wc), Frictionless(0.0), 100, 9)
    speed0 = np.hypot(ens.u[:, 0], ens.u[:, 1])
    ens = exact_step(ens, Magnetic(omega_c=wc), Frictionless(0.0), 0.7)
    np.testing.assert_allclose(np.hypot(ens.u[:, 0], ens.u[:, 1]), speed0, rtol=1e-12)


def test_point_source_covariance_within_bootstrap_error():
    init = InitialGaussian(a=1e-8, b=1e-8)
    q, t, n = 1.0, 1.0, 20000
    snaps = simulate(init, Free(), Frictionless(q), [t], n, 17)
    x, u = snaps[0].x[:, 0], snaps[0].u[:, 0]
    var_x, cov_xu, var_u = cov_entries_2d(x, u)
    se = bootstrap_cov_se(x, u, seed=1)
    targets = ((2.0 / 3.0) * q * t**3, q * t**2, 2.0 * q * t)
    for got, ref, err in zip((var_x, cov_xu, var_u), targets, se):
        assert abs(got - ref) <= 4.0 * err


# ---------------------------------------------------------------------------
# Euler-Maruyama cross-validation
# ---------------------------------------------------------------------------

def test_em_matches_ode_in_noiseless_limit():
    omega = 1.3
    init = InitialGaussian(x_ini=1.0, u_ini=0.0, a=1e-9, b=1e-9)
    reg = Frictionless(0.0)
    ens = sample_initial(init, Harmonic(omega=omega), reg, 1, 2)
    dt = 1e-4
    for _ in range(round(1.0 / dt)):
        ens = em_step(ens, Harmonic(omega=omega), reg, dt)
    assert ens.x[0, 0] == pytest.approx(np.cos(omega * 1.0), abs=2e-4)
    assert ens.u[0, 0] == pytest.approx(-omega * np.sin(omega * 1.0), abs=3e-4)


def test_em_and_exact_agree_in_distribution():
    n = 20000
    exact = simulate(UNIT, Free(), Frictionless(1.0), [1.0], n, 23)[-1]
    em = simulate(UNIT, Free(), Frictionless(1.0), [1.0], n, 23, integrator="em", dt=0.01)[-1]
    for snap in (exact, em):
        var_x, cov_xu, var_u = cov_entries_2d(snap.x[:, 0], snap.u[:, 0])
        se = bootstrap_cov_se(snap.x[:, 0], snap.u[:, 0], seed=2)
        for got, ref, err in zip(
            (var_x, cov_xu, var_u), (8.0 / 3.0, 2.0, 3.0), se
        ):
            assert abs(got - ref) <= 4.0 * err + 0.05  # em carries O(dt) bias


def test_em_smoluchowski_heat_kernel_variance():
    init = InitialGaussian(a=1e-8)
    reg = Smoluchowski(diffusion_D=0.5, beta=2.0)
    snaps = simulate(init, Free(), reg, [2.0], 20000, 31, integrator="em", dt=0.05)
    x = snaps[-1].x[:, 0]
    assert snaps[-1].u is None
    assert np.var(x) == pytest.approx(2.0 * 0.5 * 2.0, rel=0.05)


# ---------------------------------------------------------------------------
# simulate driver
# ---------------------------------------------------------------------------

def test_simulate_bit_identical_reruns():
    args = (UNIT, Harmonic(omega=1.0), Kramers(q=1.0, beta=0.5), [0.0, 0.5, 1.0], 500, 77)
    a = simulate(*args)
    b = simulate(*args)
    for sa, sb in zip(a, b):
        assert np.array_equal(sa.x, sb.x) and np.array_equal(sa.u, sb.u)


def test_simulate_returns_snapshot_per_time():
    snaps = simulate(UNIT, Free(), Frictionless(1.0), [0.0, 0.3, 1.1], 50, 1)
    assert [s.t for s in snaps] == [0.0, 0.3, 1.1]
    assert all(s.n_samples == 50 for s in snaps)


def test_simulate_input_validation():
    with pytest.raises(ValueError):
        simulate(UNIT, Free(), Frictionless(1.0), [], 10, 0)
    with pytest.raises(ValueError):
        simulate(UNIT, Free(), Frictionless(1.0), [1.0, 0.5], 10, 0)
    with pytest.raises(ValueError):
        simulate(UNIT, Free(), Frictionless(1.0), [1.0], 10, 0, integrator="em")
    with pytest.raises(ValueError):
        simulate(UNIT, Free(), Frictionless(1.0), [1.0], 10, 0, integrator="rk4")


def test_ensemble_shape_validation():
    with pytest.raises(ValueError):
        Ensemble(x=np.zeros(3), u=None, t=0.0, master_seed=0)
    with pytest.raises(ValueError):
        Ensemble(x=np.zeros((3, 1)), u=np.zeros((2, 1)), t=0.0, master_seed=0)


# ---------------------------------------------------------------------------
# collision moments
# ---------------------------------------------------------------------------

def test_collision_moments_frictionless():
    rho = np.array([0.2, 1.0, 0.5])
    m0, m1, m2 = collision_moments(rho, np.ones(3), np.ones(3), Frictionless(0.7))
    assert np.all(m0 == 0.0) and np.all(m1 == 0.0)
    np.testing.assert_allclose(m2, 2.0 * 0.7 * rho, rtol=1e-15)


def test_collision_moments_kramers_momentum_sink():
    rho, v = np.array([1.0]), np.array([0.5])
    _, m1, _ = collision_moments(rho, v, np.array([1.0]), Kramers(q=1.0, beta=2.0))
    assert m1[0] == pytest.approx(-1.0, abs=1e-15)


def test_collision_moments_kramers_stationary_second_moment():
    q, beta = 1.8, 0.6
    rho = np.array([0.3, 0.9])
    second = np.full(2, q / beta)  # equilibrium velocity variance
    m0, _, m2 = collision_moments(rho, np.zeros(2), second, Kramers(q=q, beta=beta))
    assert np.all(m0 == 0.0)
    np.testing.assert_allclose(m2, 0.0, atol=1e-12)


def test_collision_moments_rejects_smoluchowski():
    with pytest.raises(ValueError):
        collision_moments(np.ones(2), np.ones(2), np.ones(2), Smoluchowski(0.5, 1.0))


# ---------------------------------------------------------------------------
# snapshot export
# ---------------------------------------------------------------------------

def test_write_snapshots_long_format(tmp_path):
    snaps = simulate(UNIT, Free(), Frictionless(1.0), [0.0, 1.0], 5, 4)
    path = tmp_path / "snaps.csv"
    written = write_snapshots(snaps, path, header_comment="h")
    assert written == [str(path)]
    lines = path.read_text().splitlines()
    assert lines[0] == "# h"
    assert lines[1] == "t,idx,x,u"
    assert len(lines) == 2 + 2 * 5
    t, idx, x, u = lines[2].split(",")
    assert float(t) == 0.0 and idx == "0"
    assert float(x) == snaps[0].x[0, 0] and float(u) == snaps[0].u[0, 0]


def test_write_snapshots_per_time_and_planar_columns(tmp_path):
    snaps = simulate(UNIT, Magnetic(omega_c=1.0), Frictionless(1.0), [0.0, 1.0], 3, 4)
    written = write_snapshots(snaps, tmp_path / "s.csv", long_format=False)
    assert len(written) == 2
    header = open(written[1]).readline().strip()
    assert header == "t,idx,x,y,u,w"
