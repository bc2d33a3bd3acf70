import math

import numpy as np
import pytest

from cavityfront.dynamics import (
    AmplitudeState,
    IntegrationError,
    IntegratorConfig,
    energy_expectation,
    hamiltonian_matrix,
    initial_state,
    integrate,
    norm_squared,
    propagate,
    propagate_oracle,
    rhs,
)
from cavityfront.model import (
    AtomParams,
    asymmetric_mode_set,
    coupling_matrix,
    default_atoms,
)

OMEGA1 = 6 * np.pi


def rabi_system():
    """One atom resonantly coupled to one mode with unit strength.

    Atom 1 at the cavity midpoint, gamma = 1, mode n = 5: the coupling is
    sin(5*pi/2) = 1 and atoms 2, 3 decouple entirely (gamma = 0), leaving
    the textbook two-level problem c1(t) = exp(-i w t) cos(t).
    """
    modes = asymmetric_mode_set(5, 1)
    omega = 5 * np.pi
    atoms = (
        AtomParams(index=1, position_fraction=0.5, transition_frequency=omega, decay_rate=1.0),
        AtomParams(index=2, position_fraction=0.25, transition_frequency=omega, decay_rate=0.0),
        AtomParams(index=3, position_fraction=0.75, transition_frequency=omega, decay_rate=0.0),
    )
    return atoms, modes, coupling_matrix(atoms, modes)


def random_state(n_modes, seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=3 + n_modes) + 1j * rng.normal(size=3 + n_modes)
    y /= np.linalg.norm(y)
    return AmplitudeState(c=y[:3], b=y[3:], t=0.0)


# ---------------------------------------------------------------- rhs


def test_rhs_decoupled_atoms_pick_up_only_phase_velocity(small_system):
    atoms, modes, _ = small_system
    dead = tuple(
        AtomParams(a.index, a.position_fraction, a.transition_frequency, 0.0)
        for a in atoms
    )
    coup = coupling_matrix(dead, modes)
    psi = initial_state(modes)
    dy = rhs(psi, dead, modes, coup)
    assert dy[0] == -1j * OMEGA1
    assert np.all(dy[1:] == 0.0)


def test_rhs_single_mode_substitution():
    atoms, modes, coup = rabi_system()
    psi = initial_state(modes)
    dy = rhs(psi, atoms, modes, coup)
    # c1 = 1, b = 0: dc1 = -i w c1, db1 = -i g c1 = -i
    assert dy[0] == pytest.approx(-1j * 5 * np.pi, abs=1e-14)
    assert dy[3] == pytest.approx(-1j, abs=1e-14)
    assert dy[1] == 0.0 and dy[2] == 0.0


def test_rhs_agrees_with_dense_hamiltonian(small_system):
    atoms, modes, coup = small_system
    h = hamiltonian_matrix(atoms, modes, coup)
    psi = random_state(len(modes), seed=11)
    y = np.concatenate([psi.c, psi.b])
    want = -1j * (h @ y)
    got = rhs(psi, atoms, modes, coup)
    assert np.max(np.abs(got - want)) <= 1e-13 * np.max(np.abs(want))


def test_rhs_is_linear(small_system):
    atoms, modes, coup = small_system
    a = random_state(len(modes), seed=1)
    b = random_state(len(modes), seed=2)
    al, be = 0.3 - 0.7j, -1.1 + 0.2j
    mix = AmplitudeState(c=al * a.c + be * b.c, b=al * a.b + be * b.b)
    lhs = rhs(mix, atoms, modes, coup)
    rhs_sum = al * rhs(a, atoms, modes, coup) + be * rhs(b, atoms, modes, coup)
    assert np.max(np.abs(lhs - rhs_sum)) <= 1e-13


def test_rhs_rejects_mismatched_couplings(small_system):
    atoms, modes, _ = small_system
    wrong = coupling_matrix(atoms, asymmetric_mode_set(2, 5))
    with pytest.raises(ValueError):
        rhs(initial_state(modes), atoms, modes, wrong)


def test_hamiltonian_is_symmetric(small_system):
    atoms, modes, coup = small_system
    h = hamiltonian_matrix(atoms, modes, coup)
    assert np.array_equal(h, h.T)


# ------------------------------------------------------------- oracle


def test_oracle_at_zero_time_is_identity(small_system):
    atoms, modes, coup = small_system
    psi = random_state(len(modes), seed=3)
    out = propagate_oracle(psi, atoms, modes, coup, 0.0)
    assert np.max(np.abs(out.c - psi.c)) <= 1e-13
    assert np.max(np.abs(out.b - psi.b)) <= 1e-13


def test_oracle_preserves_norm(small_system):
    atoms, modes, coup = small_system
    psi = random_state(len(modes), seed=4)
    for t in (0.3, 1.7, 9.4):
        out = propagate_oracle(psi, atoms, modes, coup, t)
        assert abs(norm_squared(out) - norm_squared(psi)) <= 1e-12


def test_oracle_matches_rabi_closed_form():
    atoms, modes, coup = rabi_system()
    omega = 5 * np.pi
    psi = initial_state(modes)
    for t in (0.2, 0.9, math.pi / 2):
        out = propagate_oracle(psi, atoms, modes, coup, t)
        want_c1 = np.exp(-1j * omega * t) * math.cos(t)
        want_b1 = -1j * np.exp(-1j * omega * t) * math.sin(t)
        assert abs(out.c[0] - want_c1) <= 1e-12
        assert abs(out.b[0] - want_b1) <= 1e-12


def test_oracle_free_atom_phase():
    modes = asymmetric_mode_set(1, 4)
    atoms = tuple(
        AtomParams(j + 1, (0.2, 0.5, 0.8)[j], OMEGA1, 0.0) for j in range(3)
    )
    coup = coupling_matrix(atoms, modes)
    out = propagate_oracle(initial_state(modes), atoms, modes, coup, 0.77)
    assert abs(out.c[0] - np.exp(-1j * OMEGA1 * 0.77)) <= 1e-12


def test_oracle_refuses_large_mode_sets():
    modes = asymmetric_mode_set(1, 513)
    atoms = default_atoms(omega1=200 * np.pi)
    coup = coupling_matrix(atoms, modes)
    with pytest.raises(ValueError):
        propagate_oracle(initial_state(modes), atoms, modes, coup, 0.1)


# ---------------------------------------------------- norm and energy


def test_norm_and_energy_of_reference_states(small_system):
    atoms, modes, coup = small_system
    psi = initial_state(modes)
    assert norm_squared(psi) == 1.0
    assert energy_expectation(psi, atoms, modes, coup) == pytest.approx(
        OMEGA1, rel=1e-15
    )
    # single photon in the lowest retained mode (index 2)
    one = AmplitudeState(c=np.zeros(3), b=np.eye(len(modes))[0])
    assert energy_expectation(one, atoms, modes, coup) == pytest.approx(
        2 * np.pi, rel=1e-15
    )


def test_energy_conserved_under_oracle(small_system):
    atoms, modes, coup = small_system
    psi = random_state(len(modes), seed=5)
    e0 = energy_expectation(psi, atoms, modes, coup)
    out = propagate_oracle(psi, atoms, modes, coup, 0.7)
    e1 = energy_expectation(out, atoms, modes, coup)
    assert abs(e1 - e0) <= 1e-10 * abs(e0)


# ----------------------------------------------------------- stepping


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(step_size=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(step_size=1e-3, corrector_iterations=0)
    with pytest.raises(ValueError):
        IntegratorConfig(step_size=1e-3, sample_stride=0)


def test_integrate_refuses_under_resolved_step(small_system):
    atoms, modes, coup = small_system
    # h * omega_max = 0.02 * 9 pi = 0.57 > 0.3
    cfg = IntegratorConfig(step_size=0.02)
    with pytest.raises(IntegrationError):
        integrate(initial_state(modes), atoms, modes, coup, cfg, 1.0)


def test_integrate_rejects_misaligned_span(small_system):
    atoms, modes, coup = small_system
    cfg = IntegratorConfig(step_size=1e-3)
    with pytest.raises(ValueError):
        integrate(initial_state(modes), atoms, modes, coup, cfg, 0.0105)


def test_integrate_rejects_misaligned_snapshot(small_system):
    atoms, modes, coup = small_system
    cfg = IntegratorConfig(step_size=1e-3)
    with pytest.raises(ValueError):
        integrate(
            initial_state(modes), atoms, modes, coup, cfg, 0.1,
            snapshot_times=(0.0505,),
        )


def test_integrate_matches_oracle_on_small_system(small_system):
    atoms, modes, coup = small_system
    psi = initial_state(modes)
    cfg = IntegratorConfig(step_size=5e-4, sample_stride=2000)
    end = propagate(psi, atoms, modes, coup, cfg, 1.0)
    ref = propagate_oracle(psi, atoms, modes, coup, 1.0)
    err = max(np.max(np.abs(end.c - ref.c)), np.max(np.abs(end.b - ref.b)))
    assert err <= 1e-8


def test_integrate_rabi_probability(small_system):
    atoms, modes, coup = rabi_system()
    cfg = IntegratorConfig(step_size=math.pi / 4000, sample_stride=10)
    traj = integrate(initial_state(modes), atoms, modes, coup, cfg, math.pi)
    want = np.cos(traj.times) ** 2
    assert np.max(np.abs(traj.probs[:, 0] - want)) <= 1e-6


def test_integrate_order_four_convergence(small_system):
    # global error should shrink by ~2^4 per halving; the window [12, 20]
    # leaves room for the error terms beyond the leading one
    atoms, modes, coup = small_system
    psi = initial_state(modes)
    ref = propagate_oracle(psi, atoms, modes, coup, 1.0)
    errs = []
    for h in (1e-3, 5e-4, 2.5e-4):
        cfg = IntegratorConfig(step_size=h, sample_stride=round(1.0 / h))
        end = propagate(psi, atoms, modes, coup, cfg, 1.0)
        errs.append(max(np.max(np.abs(end.c - ref.c)), np.max(np.abs(end.b - ref.b))))
    for coarse, fine in zip(errs, errs[1:]):
        assert 12.0 <= coarse / fine <= 20.0


def test_integrate_round_trip_reversibility(small_system):
    # conjugating amplitudes reverses the flow; going out and back should
    # land within twice the one-way error of the start
    atoms, modes, coup = small_system
    psi = initial_state(modes)
    cfg = IntegratorConfig(step_size=5e-4, sample_stride=2000)
    fwd = propagate(psi, atoms, modes, coup, cfg, 1.0)
    ref = propagate_oracle(psi, atoms, modes, coup, 1.0)
    one_way = max(np.max(np.abs(fwd.c - ref.c)), np.max(np.abs(fwd.b - ref.b)))
    flipped = AmplitudeState(c=np.conj(fwd.c), b=np.conj(fwd.b), t=0.0)
    back = propagate(flipped, atoms, modes, coup, cfg, 1.0)
    err = max(np.max(np.abs(np.conj(back.c) - psi.c)),
              np.max(np.abs(np.conj(back.b) - psi.b)))
    assert err <= 2.0 * one_way + 1e-12


def test_integrate_norm_and_energy_drift(small_system):
    atoms, modes, coup = small_system
    cfg = IntegratorConfig(step_size=2.5e-4, sample_stride=40)
    traj = integrate(initial_state(modes), atoms, modes, coup, cfg, 1.0)
    assert np.max(np.abs(traj.norm2 - 1.0)) <= 1e-10
    assert np.max(np.abs(traj.energy / traj.energy[0] - 1.0)) <= 1e-10


def test_integrate_is_deterministic(small_system):
    atoms, modes, coup = small_system
    cfg = IntegratorConfig(step_size=1e-3, sample_stride=100)
    a = integrate(initial_state(modes), atoms, modes, coup, cfg, 0.5,
                  snapshot_times=(0.25,))
    b = integrate(initial_state(modes), atoms, modes, coup, cfg, 0.5,
                  snapshot_times=(0.25,))
    assert a.times.tobytes() == b.times.tobytes()
    assert a.probs.tobytes() == b.probs.tobytes()
    assert a.norm2.tobytes() == b.norm2.tobytes()
    assert a.energy.tobytes() == b.energy.tobytes()
    assert np.array_equal(a.snapshots[0].b, b.snapshots[0].b)


def test_integrate_sampling_includes_endpoints(small_system):
    atoms, modes, coup = small_system
    cfg = IntegratorConfig(step_size=1e-3, sample_stride=300)
    traj = integrate(initial_state(modes), atoms, modes, coup, cfg, 1.0)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(1.0, abs=1e-12)
    assert traj.step_count == 1000
    # stride 300 over 1000 steps: rows at 0, 300, 600, 900, 1000
    assert len(traj.times) == 5


def test_integrate_aborts_on_blowup():
    # an intentionally unstable step (h * omega >> stability limit) must
    # abort with a diagnostic, not return garbage
    modes = asymmetric_mode_set(40, 1)
    atoms = (
        AtomParams(1, 0.5, 40 * np.pi, 1.0),
        AtomParams(2, 0.25, 40 * np.pi, 0.0),
        AtomParams(3, 0.75, 40 * np.pi, 0.0),
    )
    coup = coupling_matrix(atoms, modes)
    cfg = IntegratorConfig(step_size=0.05, sample_stride=50, resolution_cap=1e9)
    with pytest.raises(IntegrationError) as exc:
        integrate(initial_state(modes), atoms, modes, coup, cfg, 400.0)
    assert exc.value.t is not None


def test_amplitude_state_validation():
    with pytest.raises(ValueError):
        AmplitudeState(c=np.zeros(2), b=np.zeros(4))
    with pytest.raises(ValueError):
        AmplitudeState(c=np.zeros(3), b=np.zeros((2, 2)))
