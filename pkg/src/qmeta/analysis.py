"""Post-processing of simulated registers and fields."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .dynamics import site_energy
from .model import LatticeLayout, MediumParams, QubitParams, SimState
from .oracles import ChiProfile

PEAK_FRACTION = 0.5
MIN_PEAKS = 4
UNIFORM_TOLERANCE = 1e-12


class InsufficientPeriodicity(ValueError):
    pass


class PreconditionError(ValueError):
    """A measurement precondition failed; ``fraction`` is the offending energy share."""

    def __init__(self, message: str, fraction: float):
        super().__init__(message)
        self.fraction = fraction


@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    uncertainty: float
    peaks: np.ndarray  # refined maximum positions, in array index units
    fft_period: float

    @property
    def n_peaks(self) -> int:
        return len(self.peaks)


def _refine(y: np.ndarray, i: int) -> float:
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    curv = y0 - 2.0 * y1 + y2
    if curv == 0.0:
        return float(i)
    return i + 0.5 * (y0 - y2) / curv


def fft_period(p1: np.ndarray, pad: int = 16) -> float:
    """Period of the strongest non-constant Fourier component (zero-padded)."""
    y = np.asarray(p1, dtype=float)
    y = y - y.mean()
    n = len(y) * pad
    spec = np.abs(np.fft.rfft(y, n))
    freqs = np.fft.rfftfreq(n)
    spec[0] = 0.0
    j = int(np.argmax(spec))
    return math.inf if freqs[j] == 0 else 1.0 / freqs[j]


def modulation_period(p1) -> PeriodEstimate:
    """Mean spacing of the interior maxima above half the global maximum."""
    y = np.asarray(p1, dtype=float)
    if y.ndim != 1 or len(y) < 3:
        raise InsufficientPeriodicity("need a 1D profile with at least 3 samples")
    top = float(np.max(y))
    if not top > 0:
        raise InsufficientPeriodicity("insufficient periodicity: profile has no positive maximum")
    idx, _ = find_peaks(y, height=PEAK_FRACTION * top)
    if len(idx) < MIN_PEAKS:
        raise InsufficientPeriodicity(
            f"insufficient periodicity: {len(idx)} maxima above {PEAK_FRACTION} of the peak, need {MIN_PEAKS}"
        )
    pos = np.array([_refine(y, i) for i in idx])
    spacing = np.diff(pos)
    return PeriodEstimate(
        period=float(spacing.mean()),
        uncertainty=float(spacing.std(ddof=1)) if len(spacing) > 1 else 0.0,
        peaks=pos,
        fft_period=fft_period(y),
    )


@dataclass(frozen=True)
class ChiFit:
    profile: ChiProfile
    p1_min: float
    p1_max: float
    neglected: float  # |(r/E_J) d01 <c0* c1 exp(2 pi i z / L_m)>| over the register
    period: Optional[PeriodEstimate]

    @property
    def static_ratio(self) -> float:
        """chi_tilde over the dropped coherence term; large means the static profile is adequate."""
        if self.neglected == 0:
            return math.inf
        return self.profile.chi_tilde / self.neglected


def fit_chi_profile(state: SimState, q: QubitParams, m: MediumParams) -> ChiFit:
    """Static susceptibility chi0 + chi_tilde (1 + cos(2 pi z / L_m)) of a register.

    chi0 comes from the least excited site, chi_tilde from the population
    contrast and L_m from :func:`modulation_period`.  A uniform register gets
    chi_tilde = 0 and L_m = inf.
    """
    p1 = state.populations
    i_min = int(np.argmin(p1))
    p_min = float(p1[i_min])
    p_max = float(np.max(p1))
    p0_min = float(abs(state.c0[i_min]) ** 2)
    scale = m.r / q.E_J
    chi0 = scale * (q.d00 * p0_min + q.d11 * p_min)
    if p_max - p_min <= UNIFORM_TOLERANCE:
        return ChiFit(ChiProfile(chi0, 0.0, math.inf), p_min, p_max, 0.0, None)
    est = modulation_period(p1)
    chi_tilde = scale * (q.d11 - q.d00) * (p_max - p_min) / 2.0
    z = np.arange(len(p1), dtype=float)
    harmonic = np.mean(np.conj(state.c0) * state.c1 * np.exp(2j * np.pi * z / est.period))
    neglected = abs(scale * q.d01 * harmonic)
    return ChiFit(ChiProfile(chi0, chi_tilde, est.period), p_min, p_max, float(neglected), est)


def chi_register(
    chi: ChiProfile, n_active: int, q: QubitParams, m: MediumParams, z_peak: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Real amplitudes (c0, c1) whose static susceptibility reproduces ``chi`` on the active sites.

    The register is excited most at ``z_peak`` (site index within the active region).
    """
    scale = m.r / q.E_J
    span = q.d11 - q.d00
    if span <= 0:
        raise ValueError("need d11 > d00 to encode a susceptibility in the populations")
    p_min = (chi.chi0 / scale - q.d00) / span
    z = np.arange(n_active, dtype=float) - z_peak
    chi_z = chi(z)
    p1 = (chi_z / scale - q.d00) / span
    if p_min < -1e-12 or np.any(p1 > 1.0 + 1e-12):
        raise ValueError("requested susceptibility is outside the range reachable by the populations")
    p1 = np.clip(p1, 0.0, 1.0)
    return np.sqrt(1.0 - p1).astype(complex), np.sqrt(p1).astype(complex)


@dataclass(frozen=True)
class Transmission:
    T: float
    R: float
    loss: float
    initial_energy: float
    active_fraction: float


def _partition(state: SimState, layout: LatticeLayout, m: MediumParams) -> tuple[float, float, float]:
    e = site_energy(state.a, state.a_dot, layout, m)
    return (
        float(e[: layout.active_start].sum()),
        float(e[layout.active].sum()),
        float(e[layout.active_end :].sum()),
    )


def transmission(
    initial: SimState,
    final: SimState,
    layout: LatticeLayout,
    m: MediumParams,
    tolerance: float = 0.01,
) -> Transmission:
    """Energy fractions of an incident pulse found right (T) and left (R) of the active region."""
    left0, act0, right0 = _partition(initial, layout, m)
    total0 = left0 + act0 + right0
    if not total0 > 0:
        raise PreconditionError("initial state carries no field energy", 0.0)
    outside = (act0 + right0) / total0
    if outside > tolerance:
        raise PreconditionError(
            f"initial pulse is not left of the active region: {outside:.3g} of its energy lies elsewhere", outside
        )
    left, act, right = _partition(final, layout, m)
    frac = act / total0
    if frac > tolerance:
        raise PreconditionError(f"field has not left the active region: {frac:.3g} of the energy remains", frac)
    T = right / total0
    R = left / total0
    return Transmission(T=T, R=R, loss=1.0 - T - R, initial_energy=total0, active_fraction=frac)


def interference_sites(
    layout: LatticeLayout,
    k: float,
    phi0: float = 0.0,
    k_active: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Active-site indices nearest to the nodes and antinodes of a symmetric two-pulse drive.

    Two pulses launched symmetrically about the active centre z_c with wave
    number ``k`` in the padding pick up ``k_active`` inside the active
    region, so the drive a^2 follows 1 + cos(2 k z_c + 2 k_active (z - z_c) + phi0).
    ``k_active=None`` uses ``k`` everywhere, i.e. nodes where cos(2kz + phi0) = -1.
    """
    ka = k if k_active is None else k_active
    zc = layout.center
    z = layout.z_active
    phase = 2 * k * zc + 2 * ka * (z - zc) + phi0
    # nearest site to each extremum: the phase must be within half a site step of it
    tol = ka
    node = np.abs(np.angle(np.exp(1j * (phase - np.pi)))) <= tol
    anti = np.abs(np.angle(np.exp(1j * phase))) <= tol
    return np.flatnonzero(node), np.flatnonzero(anti)
