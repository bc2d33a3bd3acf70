"""System construction: atoms, cavity mode sets, atom-mode couplings.

Three two-level atoms sit in a cavity with perfectly reflecting walls at
x = 0 and x = 1.  Atom j at position x_j with decay rate gamma_j couples to
mode n with strength

    g_jn = sqrt(gamma_j) * sin(n * pi * x_j)

i.e. the coupling amplitude is taken constant across the retained band, which
is the near-resonance regime all scenarios here operate in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PI = math.pi


def sinpi(z):
    """sin(pi*z), exactly zero whenever z is an integer.

    Couplings must vanish identically when an atom sits on a mode node, and
    field profiles must vanish at the walls; np.sin(np.pi*z) leaves O(1e-16)
    residues there.  Reducing mod 2 keeps the argument small (no large-angle
    accuracy loss for high mode indices) and makes integer points detectable.

    Parameters
    ----------
    z : float or ndarray

    Returns
    -------
    float or ndarray, matching the input shape.
    """
    z = np.asarray(z, dtype=np.float64)
    r = np.mod(z, 2.0)
    out = np.sin(PI * r)
    out = np.where(r == np.floor(r), 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class AtomParams:
    """One two-level atom.

    position_fraction is x_j in units of the cavity length, strictly inside
    (0, 1). transition_frequency and decay_rate use the cavity units
    (frequencies in multiples of 1/(L/c)).
    """

    index: int
    position_fraction: float
    transition_frequency: float
    decay_rate: float

    def __post_init__(self):
        if self.index not in (1, 2, 3):
            raise ValueError(f"atom index must be 1, 2 or 3, got {self.index}")
        if not 0.0 < self.position_fraction < 1.0:
            raise ValueError(
                f"atom {self.index}: position_fraction must lie strictly inside "
                f"(0, 1), got {self.position_fraction}"
            )
        if not self.transition_frequency > 0.0:
            raise ValueError(
                f"atom {self.index}: transition_frequency must be positive, "
                f"got {self.transition_frequency}"
            )
        if self.decay_rate < 0.0:
            raise ValueError(
                f"atom {self.index}: decay_rate must be >= 0, got {self.decay_rate}"
            )

    @property
    def coupling_amplitude(self) -> float:
        """Per-mode coupling amplitude Omega_j = sqrt(gamma_j)."""
        return math.sqrt(self.decay_rate)


@dataclass(frozen=True)
class ModeSet:
    """Retained cavity modes.

    indices are the integer mode numbers n >= 1, strictly increasing;
    frequencies[k] == indices[k] * pi exactly.  policy records how the set
    was built ("symmetric" or "asymmetric").
    """

    indices: np.ndarray
    frequencies: np.ndarray
    policy: str

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("mode indices must be a non-empty 1d array")
        if idx[0] < 1:
            raise ValueError(f"mode indices must be >= 1, got lowest {idx[0]}")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("mode indices must be strictly increasing")
        freq = idx.astype(np.float64) * PI
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "frequencies", freq)
        idx.flags.writeable = False
        freq.flags.writeable = False

    def __len__(self) -> int:
        return int(self.indices.size)


def symmetric_mode_set(center_index: int, half_count: int) -> ModeSet:
    """Band of 2*half_count + 1 consecutive modes centered on center_index.

    The frequency offsets from the center mode form a multiset symmetric
    under negation, which is what lets the retained band mimic a frequency
    integral extended to -infinity.  The band must not reach below mode 1:
    center_index - half_count >= 1.
    """
    center_index = int(center_index)
    half_count = int(half_count)
    if half_count < 0:
        raise ValueError(f"half_count must be >= 0, got {half_count}")
    lo = center_index - half_count
    if lo < 1:
        raise ValueError(
            f"symmetric band reaches mode {lo} < 1 "
            f"(center_index {center_index}, half_count {half_count})"
        )
    idx = np.arange(lo, center_index + half_count + 1, dtype=np.int64)
    return ModeSet(indices=idx, frequencies=idx * PI, policy="symmetric")


def asymmetric_mode_set(lowest_index: int, count: int) -> ModeSet:
    """count consecutive modes starting at lowest_index (bounded below).

    Growing count raises only the upper cut-off; the lower edge stays put,
    which is the situation where precausal tails persist.
    """
    lowest_index = int(lowest_index)
    count = int(count)
    if lowest_index < 1:
        raise ValueError(f"lowest_index must be >= 1, got {lowest_index}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    idx = np.arange(lowest_index, lowest_index + count, dtype=np.int64)
    return ModeSet(indices=idx, frequencies=idx * PI, policy="asymmetric")


@dataclass(frozen=True)
class CouplingMatrix:
    """Atom-mode couplings g[j, k] for atom j+1 and the k-th retained mode."""

    g: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        amp = np.asarray(self.amplitudes, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != 3:
            raise ValueError(f"coupling matrix must have shape (3, N), got {g.shape}")
        if amp.shape != (3,):
            raise ValueError(f"amplitudes must have shape (3,), got {amp.shape}")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "amplitudes", amp)
        g.flags.writeable = False
        amp.flags.writeable = False


def coupling_matrix(atoms: tuple, modes: ModeSet) -> CouplingMatrix:
    """Build g_jn = Omega_j * sin(n*pi*x_j) for all three atoms.

    Exactly zero where n*x_j is an integer (atom on a node).  Row j is
    bounded by Omega_j in magnitude.
    """
    if len(atoms) != 3:
        raise ValueError(f"expected 3 atoms, got {len(atoms)}")
    n = modes.indices.astype(np.float64)
    g = np.empty((3, len(modes)), dtype=np.float64)
    amps = np.empty(3, dtype=np.float64)
    for j, atom in enumerate(atoms):
        amps[j] = atom.coupling_amplitude
        g[j, :] = amps[j] * sinpi(n * atom.position_fraction)
    return CouplingMatrix(g=g, amplitudes=amps)


def initial_state(modes: ModeSet):
    """Atom 1 excited, atoms 2 and 3 ground, field in vacuum, at t = 0."""
    # local import: dynamics owns the state type and imports this module
    from .dynamics import initial_state as _build

    return _build(modes)


def default_atoms(
    omega1: float,
    delta: float = 4.0,
    gammas: tuple = (1.0, 16.0, 256.0),
    positions: tuple = (0.25, 0.5, 0.75),
) -> tuple:
    """The standard atom triple: atoms 1 and 3 resonant at omega1, atom 2
    detuned below by delta."""
    freqs = (omega1, omega1 - delta, omega1)
    return tuple(
        AtomParams(
            index=j + 1,
            position_fraction=positions[j],
            transition_frequency=freqs[j],
            decay_rate=gammas[j],
        )
        for j in range(3)
    )
