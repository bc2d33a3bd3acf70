"""Single-excitation amplitudes and their time evolution.

State vector y = (c1, c2, c3, b_1, ..., b_N): three atomic excitation
amplitudes plus one photon amplitude per retained mode.  The equations of
motion are linear,

    dy/dt = -i H y,      H = [[diag(omega_atoms), g], [g.T, diag(omega_modes)]]

with H real symmetric, so the exact flow is unitary and both the norm and
<H> are conserved.  The workhorse integrator is a fixed-step fourth-order
Adams-Bashforth-Moulton predictor-corrector (PECE) bootstrapped by three
classical Runge-Kutta steps; propagate_oracle gives an independent
eigendecomposition propagator for cross-checks on small systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .model import CouplingMatrix, ModeSet

# Order-4 multistep coefficients, newest sample first.
_AB4 = np.array([55.0, -59.0, 37.0, -9.0]) / 24.0
# Corrector weight on the predicted endpoint, then on the stored history.
_AM4_NEW = 9.0 / 24.0
_AM4_TAIL = np.array([19.0, -5.0, 1.0, 0.0]) / 24.0

# Principal local-error constant of the order-4 corrector; the dominant
# global error on an oscillator of frequency w integrated for time T is
# close to this constant times (h*w)^4 * w * T, and it is almost purely a
# phase error (norm drift enters one power of h*w later).
PHASE_ERROR_CONSTANT = 19.0 / 720.0


class IntegrationError(RuntimeError):
    """Raised when a propagation cannot produce a trustworthy result."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class IntegrationInterrupted(Exception):
    """Carries the partial trajectory recorded before a keyboard interrupt."""

    def __init__(self, trajectory: "Trajectory"):
        super().__init__("integration interrupted")
        self.trajectory = trajectory


@dataclass(frozen=True)
class AmplitudeState:
    """Amplitudes at one instant: c has shape (3,), b one entry per mode."""

    c: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if c.shape != (3,):
            raise ValueError(f"c must have shape (3,), got {c.shape}")
        if b.ndim != 1:
            raise ValueError(f"b must be one-dimensional, got shape {b.shape}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        c.flags.writeable = False
        b.flags.writeable = False


def initial_state(modes: ModeSet) -> AmplitudeState:
    """Atom 1 excited, atoms 2 and 3 in the ground state, field in vacuum."""
    return AmplitudeState(
        c=np.array([1.0, 0.0, 0.0], dtype=np.complex128),
        b=np.zeros(len(modes), dtype=np.complex128),
        t=0.0,
    )


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    step_size * max mode frequency must stay at or below resolution_cap;
    runs that would under-resolve the fastest retained mode are refused.
    corrector_iterations = 1 is the standard PECE scheme (two right-hand
    side evaluations per step).  Every sample_stride-th step is recorded.
    """

    step_size: float
    corrector_iterations: int = 1
    sample_stride: int = 1
    resolution_cap: float = 0.3

    def __post_init__(self):
        if not self.step_size > 0.0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.corrector_iterations < 1:
            raise ValueError(
                f"corrector_iterations must be >= 1, got {self.corrector_iterations}"
            )
        if self.sample_stride < 1:
            raise ValueError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if not self.resolution_cap > 0.0:
            raise ValueError(
                f"resolution_cap must be positive, got {self.resolution_cap}"
            )


@dataclass
class Trajectory:
    """Sampled output of one propagation.

    times[r] is the r-th recorded instant; probs[r] holds the three atomic
    excitation probabilities; norm2 and energy are the conserved checks at
    the recorded instants.  snapshots holds full AmplitudeState copies at
    the requested snapshot times, in time order.
    """

    times: np.ndarray
    probs: np.ndarray
    norm2: np.ndarray
    energy: np.ndarray
    snapshots: list
    config: IntegratorConfig
    mode_policy: str
    mode_count: int
    step_count: int
    truncated: bool = False


class _Rhs:
    """Streaming dy/dt = -i H y using the arrow structure of H.

    H is never materialized: the diagonal is one multiply, the coupling
    block costs two thin matrix-vector products.  Couplings are stored as
    complex once so the BLAS calls do not re-copy them every evaluation.
    """

    def __init__(self, omega_atoms, omega_modes, g):
        self.omega = np.ascontiguousarray(
            np.concatenate([omega_atoms, omega_modes]), dtype=np.float64
        )
        self.gc = np.ascontiguousarray(g, dtype=np.complex128)
        self.size = self.omega.size
        self._t3 = np.empty(3, dtype=np.complex128)
        self._tn = np.empty(self.gc.shape[1], dtype=np.complex128)

    def __call__(self, y, out):
        np.multiply(self.omega, y, out=out)
        np.dot(self.gc, y[3:], out=self._t3)
        out[:3] += self._t3
        np.dot(y[:3], self.gc, out=self._tn)
        out[3:] += self._tn
        out *= -1j
        return out


def _system(atoms, modes: ModeSet, couplings: CouplingMatrix):
    if len(atoms) != 3:
        raise ValueError(f"expected 3 atoms, got {len(atoms)}")
    if couplings.g.shape[1] != len(modes):
        raise ValueError(
            f"coupling matrix has {couplings.g.shape[1]} columns for "
            f"{len(modes)} modes"
        )
    omega_atoms = np.array([a.transition_frequency for a in atoms], dtype=np.float64)
    return omega_atoms, modes.frequencies, couplings.g


def rhs(state: AmplitudeState, atoms, modes: ModeSet, couplings: CouplingMatrix):
    """Time derivative of the stacked amplitude vector at the given state."""
    omega_atoms, omega_modes, g = _system(atoms, modes, couplings)
    f = _Rhs(omega_atoms, omega_modes, g)
    y = np.concatenate([state.c, state.b])
    out = np.empty_like(y)
    return f(y, out)


def hamiltonian_matrix(atoms, modes: ModeSet, couplings: CouplingMatrix):
    """Dense real-symmetric H; independent assembly used by the oracle."""
    omega_atoms, omega_modes, g = _system(atoms, modes, couplings)
    m = 3 + len(modes)
    h = np.zeros((m, m), dtype=np.float64)
    h[np.arange(3), np.arange(3)] = omega_atoms
    h[np.arange(3, m), np.arange(3, m)] = omega_modes
    h[:3, 3:] = g
    h[3:, :3] = g.T
    return h

ORACLE_MODE_CAP = 512


def propagate_oracle(
    state: AmplitudeState,
    atoms,
    modes: ModeSet,
    couplings: CouplingMatrix,
    t: float,
    mode_cap: int = ORACLE_MODE_CAP,
):
    """Exact propagation by eigendecomposition, y(t) = V exp(-i w dt) V.T y.

    Dense and O((3+N)^3), so refuses above mode_cap modes; meant as the
    reference answer for small systems, not a production path.
    """
    if len(modes) > mode_cap:
        raise ValueError(
            f"oracle propagation limited to {mode_cap} modes, got {len(modes)}"
        )
    h = hamiltonian_matrix(atoms, modes, couplings)
    w, v = scipy.linalg.eigh(h)
    y0 = np.concatenate([state.c, state.b])
    phases = np.exp(-1j * w * (t - state.t))
    y = v @ (phases * (v.T @ y0))
    return AmplitudeState(c=y[:3], b=y[3:], t=t)


def norm_squared(state: AmplitudeState) -> float:
    """Total excitation weight |c1|^2 + |c2|^2 + |c3|^2 + sum |b_n|^2.

    Written as the sum of the three atomic probabilities plus the total
    field weight so the bookkeeping identity with
    observables.excitation_probabilities holds bit-exactly.
    """
    c, b = state.c, state.b
    p = (
        float(c[0].real**2 + c[0].imag**2)
        + float(c[1].real**2 + c[1].imag**2)
        + float(c[2].real**2 + c[2].imag**2)
    )
    return p + float(np.sum(b.real**2 + b.imag**2))


def energy_expectation(
    state: AmplitudeState, atoms, modes: ModeSet, couplings: CouplingMatrix
) -> float:
    """<H> = sum_j w_j |c_j|^2 + sum_n w_n |b_n|^2 + 2 Re sum_jn g_jn c_j* b_n."""
    omega_atoms, omega_modes, g = _system(atoms, modes, couplings)
    c, b = state.c, state.b
    atom_part = float(np.dot(omega_atoms, c.real**2 + c.imag**2))
    field_part = float(np.dot(omega_modes, b.real**2 + b.imag**2))
    cross = 2.0 * float(np.real(np.vdot(c, g @ b)))
    return atom_part + field_part + cross


def _rotated(coeffs):
    # table[head][row] = coefficient of history row `row` when the newest
    # sample lives in row `head`; lets the hot loop take one gemv against a
    # fixed (4, m) history buffer instead of rolling the buffer.
    table = np.empty((4, 4), dtype=np.complex128)
    for head in range(4):
        for row in range(4):
            table[head, row] = coeffs[(head - row) % 4]
    table.flags.writeable = False
    return table


_AB4_ROT = _rotated(_AB4)
_AM4_ROT = _rotated(_AM4_TAIL)


def integrate(
    state: AmplitudeState,
    atoms,
    modes: ModeSet,
    couplings: CouplingMatrix,
    config: IntegratorConfig,
    t_end: float,
    snapshot_times: tuple = (),
) -> Trajectory:
    """Propagate to t_end with the order-4 predictor-corrector.

    t_end - state.t must be an integer number of steps, and every snapshot
    time must fall on a step boundary; both are checked up front.  Raises
    IntegrationError if an amplitude stops being finite, and re-raises a
    keyboard interrupt as IntegrationInterrupted carrying the rows recorded
    so far (truncated=True) so callers can flush partial output.
    """
    omega_atoms, omega_modes, g = _system(atoms, modes, couplings)
    h = config.step_size
    omega_max = float(omega_modes[-1])
    if h * omega_max > config.resolution_cap * (1.0 + 1e-12):
        raise IntegrationError(
            f"step refused: step_size * omega_max = {h * omega_max:.6g} exceeds "
            f"resolution cap {config.resolution_cap:.6g}"
        )
    span = t_end - state.t
    if not span > 0.0:
        raise ValueError(f"t_end must exceed the state time, got span {span}")
    n_steps = int(round(span / h))
    if n_steps < 1 or abs(n_steps * h - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(
            f"integration span {span!r} is not an integer number of steps of "
            f"size {h!r}"
        )

    snap_steps = {}
    for ts in snapshot_times:
        k = int(round((ts - state.t) / h))
        if k < 0 or k > n_steps or abs(state.t + k * h - ts) > 1e-9:
            raise ValueError(
                f"snapshot time {ts!r} does not fall on a step boundary"
            )
        snap_steps.setdefault(k, ts)

    stride = config.sample_stride
    sample_steps = list(range(0, n_steps, stride))
    if sample_steps[-1] != n_steps:
        sample_steps.append(n_steps)
    sample_at = {s: r for r, s in enumerate(sample_steps)}
    n_rows = len(sample_steps)

    times = np.empty(n_rows, dtype=np.float64)
    probs = np.empty((n_rows, 3), dtype=np.float64)
    norm2 = np.empty(n_rows, dtype=np.float64)
    energy = np.empty(n_rows, dtype=np.float64)
    snapshots = []

    m = 3 + len(modes)
    f = _Rhs(omega_atoms, omega_modes, g)
    gc = f.gc

    y = np.empty(m, dtype=np.complex128)
    y[:3] = state.c
    y[3:] = state.b
    ynew = np.empty_like(y)
    ypred = np.empty_like(y)
    fpred = np.empty_like(y)
    comb = np.empty_like(y)
    tmp = np.empty_like(y)
    fh = np.empty((4, m), dtype=np.complex128)

    rows_done = 0

    def record(step, yv):
        nonlocal rows_done
        t = state.t + step * h
        r = sample_at.get(step)
        if r is not None:
            # overflow here is the blowup signal itself, not a defect
            with np.errstate(over="ignore", invalid="ignore"):
                c0, c1, c2 = yv[0], yv[1], yv[2]
                p1 = c0.real**2 + c0.imag**2
                p2 = c1.real**2 + c1.imag**2
                p3 = c2.real**2 + c2.imag**2
                b = yv[3:]
                bw = float(np.sum(b.real**2 + b.imag**2))
                total = p1 + p2 + p3 + bw
            if not math.isfinite(total):
                raise IntegrationError(
                    f"amplitudes became non-finite at t = {t:.6g}", t=t
                )
            eb = gc @ b
            en = (
                float(np.dot(omega_atoms, [p1, p2, p3]))
                + float(np.dot(omega_modes, b.real**2 + b.imag**2))
                + 2.0 * float(np.real(np.vdot(yv[:3], eb)))
            )
            times[r] = t
            probs[r, 0] = p1
            probs[r, 1] = p2
            probs[r, 2] = p3
            norm2[r] = total
            energy[r] = en
            rows_done = r + 1
        if step in snap_steps:
            snapshots.append(
                AmplitudeState(c=yv[:3].copy(), b=yv[3:].copy(), t=snap_steps[step])
            )

    record(0, y)
    f(y, fh[0])
    head = 0

    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)

    try:
        # Three single-step RK4 launches to fill the multistep history.
        for step in range(min(3, n_steps)):
            k1 = fh[head]
            np.multiply(k1, 0.5 * h, out=tmp)
            np.add(y, tmp, out=ypred)
            f(ypred, k2)
            np.multiply(k2, 0.5 * h, out=tmp)
            np.add(y, tmp, out=ypred)
            f(ypred, k3)
            np.multiply(k3, h, out=tmp)
            np.add(y, tmp, out=ypred)
            f(ypred, k4)
            np.add(k1, k4, out=comb)
            np.multiply(k2, 2.0, out=tmp)
            comb += tmp
            np.multiply(k3, 2.0, out=tmp)
            comb += tmp
            np.multiply(comb, h / 6.0, out=comb)
            y += comb
            head += 1
            f(y, fh[head])
            record(step + 1, y)

        hc = h * _AM4_NEW
        for step in range(3, n_steps):
            # predict
            np.dot(_AB4_ROT[head], fh, out=comb)
            np.multiply(comb, h, out=comb)
            np.add(y, comb, out=ypred)
            f(ypred, fpred)
            # correct (re-evaluating at the corrected point if asked to)
            for it in range(config.corrector_iterations):
                if it > 0:
                    f(ynew, fpred)
                np.dot(_AM4_ROT[head], fh, out=comb)
                np.multiply(comb, h, out=comb)
                np.multiply(fpred, hc, out=tmp)
                comb += tmp
                np.add(y, comb, out=ynew)
            # final evaluation lands directly in the history slot
            head = (head + 1) % 4
            f(ynew, fh[head])
            y, ynew = ynew, y
            record(step + 1, y)
    except KeyboardInterrupt:
        raise IntegrationInterrupted(
            Trajectory(
                times=times[:rows_done].copy(),
                probs=probs[:rows_done].copy(),
                norm2=norm2[:rows_done].copy(),
                energy=energy[:rows_done].copy(),
                snapshots=snapshots,
                config=config,
                mode_policy=modes.policy,
                mode_count=len(modes),
                step_count=n_steps,
                truncated=True,
            )
        ) from None

    return Trajectory(
        times=times,
        probs=probs,
        norm2=norm2,
        energy=energy,
        snapshots=snapshots,
        config=config,
        mode_policy=modes.policy,
        mode_count=len(modes),
        step_count=n_steps,
        truncated=False,
    )


def propagate(
    state: AmplitudeState,
    atoms,
    modes: ModeSet,
    couplings: CouplingMatrix,
    config: IntegratorConfig,
    t_end: float,
) -> AmplitudeState:
    """Endpoint-only propagation; records nothing but the final state."""
    traj = integrate(
        state,
        atoms,
        modes,
        couplings,
        IntegratorConfig(
            step_size=config.step_size,
            corrector_iterations=config.corrector_iterations,
            sample_stride=max(1, int(round((t_end - state.t) / config.step_size))),
            resolution_cap=config.resolution_cap,
        ),
        t_end,
        snapshot_times=(t_end,),
    )
    return traj.snapshots[-1]
