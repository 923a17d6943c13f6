"""Gaussian-envelope carrier pulses used as initial field conditions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .model import LatticeLayout, MediumParams, QubitParams, SimState

# envelope values below this fraction of the peak are dropped
ENVELOPE_CUTOFF = 1e-8

# validity thresholds
MIN_WIDTH_OVER_WAVELENGTH = 5.0
MIN_WAVELENGTH_OVER_SPACING = 10.0
MAX_PEAK_FIELD = 0.5


@dataclass(frozen=True)
class PulseSpec:
    """A(exp(i*theta) + c.c.) under a Gaussian envelope of width ``l`` centred at ``z0``.

    Right movers use theta = k z - omega t + phi0, left movers
    theta = k z + omega t + phi0.  The envelope moves at omega/k.
    """

    A: float
    k: float
    omega: float
    l: float
    z0: float
    phi0: float = 0.0
    direction: Literal["right", "left"] = "right"

    def __post_init__(self):
        if not self.A >= 0:
            raise ValueError(f"pulse amplitude A must be >= 0, got {self.A}")
        if not self.k > 0:
            raise ValueError(f"wave number k must be > 0, got {self.k}")
        if not self.omega > 0:
            raise ValueError(f"carrier omega must be > 0, got {self.omega}")
        if not self.l > 0:
            raise ValueError(f"envelope width l must be > 0, got {self.l}")
        if self.direction not in ("right", "left"):
            raise ValueError(f"direction must be 'right' or 'left', got {self.direction!r}")

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k

    @property
    def speed(self) -> float:
        return self.omega / self.k


def evaluate(spec: PulseSpec, z: np.ndarray, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Field and its exact time derivative of a free pulse at time ``t``."""
    z = np.asarray(z, dtype=float)
    sign = 1.0 if spec.direction == "right" else -1.0
    s = z - spec.z0 - sign * spec.speed * t
    env = np.exp(-(s**2) / spec.l**2)
    env[env < ENVELOPE_CUTOFF] = 0.0
    theta = spec.k * z - sign * spec.omega * t + spec.phi0
    cos_t = np.cos(theta)
    a = 2 * spec.A * env * cos_t
    # d env/dt = env * 2 s (sign*speed) / l^2,  d cos/dt = sign*omega*sin
    a_dot = 2 * spec.A * env * (
        2 * s * sign * spec.speed / spec.l**2 * cos_t + sign * spec.omega * np.sin(theta)
    )
    return a, a_dot


def synthesize(spec: PulseSpec, layout: LatticeLayout) -> tuple[np.ndarray, np.ndarray]:
    """Sample a pulse on every lattice site at t = 0."""
    if not 0 <= spec.z0 <= layout.n_total - 1:
        raise ValueError(f"pulse centre z0={spec.z0} lies outside the lattice [0, {layout.n_total - 1}]")
    return evaluate(spec, layout.z, 0.0)


def add_pulse(state: SimState, spec: PulseSpec, layout: LatticeLayout) -> SimState:
    """Superpose a pulse on the field of ``state``; qubits are left alone."""
    a, a_dot = synthesize(spec, layout)
    out = state.copy()
    out.a += a
    out.a_dot += a_dot
    return out


@dataclass(frozen=True)
class ValidityWarning:
    condition: str
    ratio: float
    threshold: float

    def __str__(self) -> str:
        return f"{self.condition}: ratio {self.ratio:.4g} violates threshold {self.threshold:g}"


def check_validity(
    spec: PulseSpec,
    layout: LatticeLayout | None = None,
    m: MediumParams | None = None,
    q: QubitParams | None = None,
) -> list[ValidityWarning]:
    """Report violated approximation conditions with the measured ratios.

    ``layout``, ``m`` and ``q`` are accepted for call-site symmetry; the
    three checks only depend on the pulse itself.
    """
    warnings = []
    lam = spec.wavelength
    if spec.l / lam < MIN_WIDTH_OVER_WAVELENGTH:
        warnings.append(ValidityWarning("width l >> wavelength", spec.l / lam, MIN_WIDTH_OVER_WAVELENGTH))
    if lam < MIN_WAVELENGTH_OVER_SPACING:
        warnings.append(ValidityWarning("wavelength >> L0 (continuum limit)", lam, MIN_WAVELENGTH_OVER_SPACING))
    if 2 * spec.A > MAX_PEAK_FIELD:
        warnings.append(ValidityWarning("weak field 2A << 1", 2 * spec.A, MAX_PEAK_FIELD))
    return warnings
