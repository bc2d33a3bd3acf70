"""Field energy density, light-cone tails, precausal excitation measures.

The field observable is the normally ordered energy density with the
zero-point part dropped,

    <E^2(x, t)> = 2 * omega1 * | sum_n b_n(t) sin(n*pi*x) |^2

in cavity units (prefactor 2*omega1/L with L = 1).  The light cone of the
initially excited atom at x1 moving at speed 1 covers [x1 - t, x1 + t];
tail_fraction measures how much of the field weight a profile puts outside
that interval, and precausal_average measures atom 3's excitation before a
signal from atom 1 could have reached it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import AmplitudeState
from .model import ModeSet, sinpi

_BLOCK = 256


@dataclass(frozen=True)
class FieldProfile:
    """<E^2> sampled on a uniform grid over the full cavity at one instant."""

    grid: np.ndarray
    values: np.ndarray
    t: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be matching 1d arrays")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        grid.flags.writeable = False
        values.flags.writeable = False


@dataclass(frozen=True)
class TailReport:
    """Split of a profile's grid weight across the light-cone boundary.

    The cone is the interval [source_x - speed*t, source_x + speed*t];
    boundary grid points count as inside.  tail_fraction is
    outside / (inside + outside), defined as 0 for an identically zero
    profile.
    """

    inside_weight: float
    outside_weight: float
    tail_fraction: float
    source_x: float
    t: float
    speed: float = 1.0


def field_energy_density(
    state: AmplitudeState, modes: ModeSet, omega1: float, x: float
) -> float:
    """<E^2(x)> at a single point; exactly zero at the walls."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    s = sinpi(modes.indices.astype(np.float64) * x)
    re = float(np.dot(s, state.b.real))
    im = float(np.dot(s, state.b.imag))
    return 2.0 * omega1 * (re * re + im * im)


def field_profile(
    state: AmplitudeState, modes: ModeSet, omega1: float, grid_points: int = 2001
) -> FieldProfile:
    """<E^2> on a uniform grid of grid_points samples covering [0, 1].

    Fused evaluation: mode profiles are built blockwise and contracted with
    the amplitudes immediately, so no (grid x modes) matrix is ever held for
    large mode sets.  Two real matrix-vector products per block instead of a
    complex one keeps the couplings out of complex temporaries.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    values = np.empty(grid_points, dtype=np.float64)
    idx = modes.indices.astype(np.float64)
    br, bi = state.b.real, state.b.imag
    scale = 2.0 * omega1
    for i0 in range(0, grid_points, _BLOCK):
        xs = grid[i0 : i0 + _BLOCK]
        s = sinpi(np.outer(xs, idx))
        re = s @ br
        im = s @ bi
        values[i0 : i0 + _BLOCK] = scale * (re * re + im * im)
    return FieldProfile(grid=grid, values=values, t=state.t)


def excitation_probabilities(state: AmplitudeState) -> tuple:
    """(|c1|^2, |c2|^2, |c3|^2); sums with the field weight to the norm."""
    c = state.c
    return (
        float(c[0].real ** 2 + c[0].imag ** 2),
        float(c[1].real ** 2 + c[1].imag ** 2),
        float(c[2].real ** 2 + c[2].imag ** 2),
    )


def tail_fraction(
    profile: FieldProfile, source_x: float, t: float | None = None, speed: float = 1.0
) -> TailReport:
    """Fraction of the profile's grid weight outside the light cone.

    Only valid before the front reaches a wall: t <= min(source_x,
    1 - source_x) / speed, otherwise reflections fold the cone back and the
    in/out split stops meaning anything.
    """
    if t is None:
        t = profile.t
    if not 0.0 < source_x < 1.0:
        raise ValueError(f"source_x must lie strictly inside (0, 1), got {source_x}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if speed * t > min(source_x, 1.0 - source_x) * (1.0 + 1e-12):
        raise ValueError(
            f"cone edge {source_x} +/- {speed * t:.6g} reaches a wall; "
            "tail split undefined after the first reflection"
        )
    lo = source_x - speed * t
    hi = source_x + speed * t
    inside_mask = (profile.grid >= lo) & (profile.grid <= hi)
    inside = float(np.sum(profile.values[inside_mask]))
    outside = float(np.sum(profile.values[~inside_mask]))
    total = inside + outside
    frac = outside / total if total > 0.0 else 0.0
    return TailReport(
        inside_weight=inside,
        outside_weight=outside,
        tail_fraction=frac,
        source_x=source_x,
        t=t,
        speed=speed,
    )


def precausal_average(times, p3, t_causal: float) -> float:
    """Mean of p3 over the samples with t < t_causal.

    t_causal is the earliest instant a light-speed signal from atom 1 can
    reach atom 3 (0.5 cavity crossings for the standard positions).  Needs
    at least two samples inside the window.
    """
    times = np.asarray(times, dtype=np.float64)
    p3 = np.asarray(p3, dtype=np.float64)
    if times.shape != p3.shape or times.ndim != 1:
        raise ValueError("times and p3 must be matching 1d arrays")
    mask = times < t_causal
    if int(mask.sum()) < 2:
        raise ValueError(
            f"precausal window t < {t_causal!r} holds fewer than 2 samples"
        )
    return float(np.mean(p3[mask]))
