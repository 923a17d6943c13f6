"""Domain types and parameter conventions for the qubit-loaded transmission line.

Units in the dimensionless core: hbar = 1, the qubit splitting epsilon = 1
and the inter-qubit spacing L0 = 1.  Times are in 1/epsilon, lengths in L0,
energies in hbar*epsilon.  Physical (SI) inputs are only touched by
:func:`derive_medium`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class QubitParams:
    """Two-level data of an (identical) charge qubit.

    ``d00``, ``d11``, ``d01`` are the matrix elements E_J<a|cos(phi)|b> in
    units of hbar*epsilon; ``d01`` is stored real and non-negative.
    """

    epsilon: float = 1.0
    E_J: float = 2.0
    d00: float = 0.4
    d11: float = 3.6
    d01: float = 0.2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.E_J > 0:
            raise ValueError(f"E_J must be > 0, got {self.E_J}")
        for name in ("d00", "d11", "d01"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.d01 < 0:
            raise ValueError(f"d01 must be >= 0 (phase absorbed in basis), got {self.d01}")

    def coupling_matrix(self) -> np.ndarray:
        return np.array([[self.d00, self.d01], [self.d01, self.d11]])


@dataclass(frozen=True)
class MediumParams:
    """Lattice medium: wave speeds in L0*epsilon, back-action strength r in epsilon^2."""

    v_tilde: float = 1.99
    u_tilde: float = 1.99
    r: float = 0.25

    def __post_init__(self):
        if not self.v_tilde > 0:
            raise ValueError(f"v_tilde must be > 0, got {self.v_tilde}")
        if not self.u_tilde > 0:
            raise ValueError(f"u_tilde must be > 0, got {self.u_tilde}")
        if not self.r >= 0:
            raise ValueError(f"r must be >= 0, got {self.r}")

    @property
    def matched(self) -> bool:
        return self.u_tilde == self.v_tilde


@dataclass(frozen=True)
class PhysicalParams:
    """Device geometry and junction data in SI units (m, A, F).

    ``C_junction`` is optional: the plasma frequency is normally fixed through
    the ratio E_J / hbar*omega_J instead.
    """

    L0: float = 5e-4
    D: float = 1e-5
    W: float = 1e-5
    I_c: float = 4e-7
    C_junction: Optional[float] = None

    def __post_init__(self):
        for name in ("L0", "D", "W", "I_c"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        if self.C_junction is not None and not self.C_junction > 0:
            raise ValueError(f"C_junction must be strictly positive, got {self.C_junction}")


@dataclass(frozen=True)
class LatticeLayout:
    """Sites ``0..n_total-1``; qubits sit on ``active_start <= n < active_end``."""

    n_total: int
    active_start: int
    active_end: int

    def __post_init__(self):
        if not 0 < self.active_start < self.active_end < self.n_total:
            raise ValueError(
                "need 0 < active_start < active_end < n_total (nonempty passive padding), "
                f"got {self.active_start}, {self.active_end}, {self.n_total}"
            )

    @classmethod
    def centered(cls, n_total: int = 2048, n_active: int = 512) -> "LatticeLayout":
        start = (n_total - n_active) // 2
        return cls(n_total, start, start + n_active)

    @property
    def n_active(self) -> int:
        return self.active_end - self.active_start

    @property
    def active(self) -> slice:
        return slice(self.active_start, self.active_end)

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.n_total, dtype=float)

    @property
    def z_active(self) -> np.ndarray:
        return np.arange(self.active_start, self.active_end, dtype=float)

    @property
    def center(self) -> float:
        """Midpoint of the active region in site units."""
        return 0.5 * (self.active_start + self.active_end - 1)


@dataclass
class SimState:
    """Field samples, their velocities and interaction-picture qubit amplitudes."""

    t: float
    a: np.ndarray
    a_dot: np.ndarray
    c0: np.ndarray
    c1: np.ndarray

    @classmethod
    def ground(cls, layout: LatticeLayout, t: float = 0.0) -> "SimState":
        n = layout.n_active
        return cls(
            t=t,
            a=np.zeros(layout.n_total),
            a_dot=np.zeros(layout.n_total),
            c0=np.ones(n, dtype=complex),
            c1=np.zeros(n, dtype=complex),
        )

    def copy(self) -> "SimState":
        return SimState(self.t, self.a.copy(), self.a_dot.copy(), self.c0.copy(), self.c1.copy())

    def check(self, layout: LatticeLayout) -> None:
        if self.a.shape != (layout.n_total,) or self.a_dot.shape != (layout.n_total,):
            raise ValueError("field arrays do not match the lattice size")
        if self.c0.shape != (layout.n_active,) or self.c1.shape != (layout.n_active,):
            raise ValueError("qubit arrays do not match the active region size")

    @property
    def populations(self) -> np.ndarray:
        """|c1|^2 on every active site."""
        return np.abs(self.c1) ** 2

    def norm_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.c0) ** 2 + np.abs(self.c1) ** 2 - 1.0)))


def chi_expectation(c0, c1, t: float, q: QubitParams, m: MediumParams):
    """Instantaneous susceptibility r<psi|cos(phi)|psi> of a qubit (or array of qubits).

    Works elementwise on arrays; the cross term oscillates as exp(-i*epsilon*t).
    """
    c0 = np.asarray(c0)
    c1 = np.asarray(c1)
    p0 = np.abs(c0) ** 2
    p1 = np.abs(c1) ** 2
    if np.any(np.abs(p0 + p1 - 1.0) > NORM_TOLERANCE):
        raise ValueError("qubit state is not normalized: |c0|^2 + |c1|^2 != 1")
    cross = np.real(q.d01 * np.conj(c0) * c1 * np.exp(-1j * q.epsilon * t))
    chi = (m.r / q.E_J) * (q.d00 * p0 + q.d11 * p1 + 2.0 * cross)
    return float(chi) if chi.ndim == 0 else chi


# -- physical to dimensionless ---------------------------------------------

# CGS-Gaussian constants
C_LIGHT = 2.99792458e10  # cm/s
HBAR_CGS = 1.054571817e-27  # erg s
E_CHARGE_CGS = 4.80320471e-10  # statC
FLUX_QUANTUM_CGS = 2 * math.pi * HBAR_CGS * C_LIGHT / (2 * E_CHARGE_CGS)  # G cm^2
AMPERE_TO_STATAMPERE = 2.99792458e9
STATFARAD_TO_FARAD = 1.0 / 8.987551787e11


@dataclass(frozen=True)
class MediumDerivation:
    """Result of :func:`derive_medium`; ``medium`` is in code units."""

    medium: MediumParams
    epsilon: float  # 1/s
    omega_J: float  # 1/s
    E_J: float  # erg
    bracket: float  # Phi0^2 L0 W omega_J^2 / (32 pi^3 c^2 D E_J)
    r_physical: float  # 1/s^2
    v_tilde_physical: float  # cm/s
    C_tilde: float  # F, impedance-matched passive capacitance
    extras: dict = field(default_factory=dict)

    @property
    def v_over_c(self) -> float:
        return self.v_tilde_physical / C_LIGHT

    @property
    def c_code_units(self) -> float:
        """Speed of light in L0*epsilon units."""
        return C_LIGHT / (self.extras["L0_cm"] * self.epsilon)


def derive_medium(
    phys: PhysicalParams,
    E_J_over_hbar_omegaJ: Optional[float] = 4.0,
    epsilon: Optional[float] = None,
) -> MediumDerivation:
    """Dimensionless medium parameters from device geometry.

    omega_J is taken from the ratio E_J/(hbar omega_J) when given, otherwise
    from omega_J^2 = 2 e I_c / (hbar C).  ``epsilon`` (1/s) defaults to the
    splitting of the charge-basis qubit Hamiltonian at that ratio.
    """
    L0 = phys.L0 * 100.0
    D = phys.D * 100.0
    W = phys.W * 100.0
    I_c = phys.I_c * AMPERE_TO_STATAMPERE
    E_J = FLUX_QUANTUM_CGS * I_c / (2 * math.pi * C_LIGHT)

    if E_J_over_hbar_omegaJ is not None:
        if not E_J_over_hbar_omegaJ > 0:
            raise ValueError("E_J_over_hbar_omegaJ must be > 0")
        omega_J = E_J / (HBAR_CGS * E_J_over_hbar_omegaJ)
    elif phys.C_junction is not None:
        C = phys.C_junction / STATFARAD_TO_FARAD
        omega_J = math.sqrt(2 * E_CHARGE_CGS * I_c / (HBAR_CGS * C))
    else:
        raise ValueError("need either E_J_over_hbar_omegaJ or C_junction")
    ratio = E_J / (HBAR_CGS * omega_J)

    if epsilon is None:
        from .oracles import qubit_spectrum

        epsilon = qubit_spectrum(ratio, n_g=0.0).epsilon_over_omegaJ * omega_J
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")

    bracket = FLUX_QUANTUM_CGS**2 * L0 * W * omega_J**2 / (32 * math.pi**3 * C_LIGHT**2 * D * E_J)
    r = omega_J**2 / (1.0 + bracket)
    upsilon_sq = r * W * FLUX_QUANTUM_CGS**2 / (32 * math.pi**3 * L0 * D * E_J)
    v_tilde = math.sqrt(upsilon_sq) * L0
    C_tilde = 4 * E_CHARGE_CGS**2 * E_J / (HBAR_CGS**2 * omega_J**2) * STATFARAD_TO_FARAD

    medium = MediumParams(
        v_tilde=v_tilde / (L0 * epsilon),
        u_tilde=v_tilde / (L0 * epsilon),
        r=r / epsilon**2,
    )
    return MediumDerivation(
        medium=medium,
        epsilon=epsilon,
        omega_J=omega_J,
        E_J=E_J,
        bracket=bracket,
        r_physical=r,
        v_tilde_physical=v_tilde,
        C_tilde=C_tilde,
        extras={"L0_cm": L0, "E_J_over_hbar_omegaJ": ratio},
    )


def default_params() -> tuple[QubitParams, MediumParams]:
    return QubitParams(), MediumParams()


__all__ = [
    "QubitParams",
    "MediumParams",
    "PhysicalParams",
    "LatticeLayout",
    "SimState",
    "MediumDerivation",
    "chi_expectation",
    "derive_medium",
    "default_params",
]
