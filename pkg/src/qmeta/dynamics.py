"""Time stepping of the coupled field/qubit lattice.

The field obeys a discrete wave equation with speed u in the passive
padding and speed v plus the qubit back-action r*sin(a_n)*<cos phi>_n on the
active sites.  Each qubit follows the two-level equations in the interaction
picture with the quadratic coupling a_n^2 * d_ab.

One base step is kick-drift-kick velocity Verlet for the field wrapped around
a fourth-order update of the amplitudes (the field seen by a qubit is
interpolated linearly across the drift).  The base step is time-symmetric, so a
triple-jump composition of it is fourth order; that is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import LatticeLayout, MediumParams, QubitParams, SimState

CFL_SAFETY = 0.5
MAX_DT_EPSILON = 0.1

_CBRT2 = 2.0 ** (1.0 / 3.0)
TRIPLE_JUMP = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))
_GAUSS_NODES = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)
_MAGNUS_C = math.sqrt(3.0) / 12.0


class StabilityError(ValueError):
    """Time step violates the CFL or phase-resolution limit."""


def _chi_sites(c0, c1, t, q: QubitParams, m: MediumParams, coherent: bool = True):
    # chi_expectation without the normalization check, for the hot loop
    p0 = c0.real**2 + c0.imag**2
    p1 = c1.real**2 + c1.imag**2
    chi = q.d00 * p0 + q.d11 * p1
    if coherent and q.d01 != 0.0:
        chi = chi + 2.0 * q.d01 * np.real(np.conj(c0) * c1 * np.exp(-1j * q.epsilon * t))
    return (m.r / q.E_J) * chi


def _speed_squared(layout: LatticeLayout, m: MediumParams) -> np.ndarray:
    c2 = np.full(layout.n_total, m.u_tilde**2)
    c2[layout.active] = m.v_tilde**2
    return c2


def _laplacian(a: np.ndarray) -> np.ndarray:
    # fixed ends: a = 0 on the ghost sites beyond both boundaries
    lap = np.empty_like(a)
    lap[1:-1] = a[2:] + a[:-2] - 2.0 * a[1:-1]
    lap[0] = a[1] - 2.0 * a[0]
    lap[-1] = a[-2] - 2.0 * a[-1]
    return lap


def field_acceleration(
    state: SimState,
    layout: LatticeLayout,
    m: MediumParams,
    q: QubitParams,
    coherent: bool = True,
) -> np.ndarray:
    """d^2 a / dt^2 on every site.

    With ``coherent=False`` the oscillating qubit coherence is dropped from
    the back-action, leaving the static susceptibility of the populations.
    """
    acc = _speed_squared(layout, m) * _laplacian(state.a)
    act = layout.active
    acc[act] -= np.sin(state.a[act]) * _chi_sites(state.c0, state.c1, state.t, q, m, coherent)
    return acc


def qubit_rhs(a, c0, c1, t: float, q: QubitParams):
    """Right-hand sides (dc0/dt, dc1/dt) of the interaction-picture two-level equations."""
    a2 = np.square(a)
    phase = np.exp(1j * q.epsilon * t)
    dc0 = -1j * a2 * (q.d00 * c0 + q.d01 * c1 * np.conj(phase))
    dc1 = -1j * a2 * (q.d01 * c0 * phase + q.d11 * c1)
    return dc0, dc1


def total_field_energy(state: SimState, layout: LatticeLayout, m: MediumParams) -> float:
    """Quadratic lattice energy sum(a_dot^2)/2 + sum_bonds c^2 (a_{n+1}-a_n)^2 / 2."""
    return float(np.sum(site_energy(state.a, state.a_dot, layout, m)))


def site_energy(a: np.ndarray, a_dot: np.ndarray, layout: LatticeLayout, m: MediumParams) -> np.ndarray:
    """Energy density per site; each bond is split evenly between its two ends.

    Bonds to the fixed-end ghosts are included so that the sum is the energy
    conserved by the free lattice dynamics.
    """
    c2 = _speed_squared(layout, m)
    padded = np.concatenate(([0.0], a, [0.0]))
    grad_sq = np.diff(padded) ** 2  # n_total + 1 bonds
    c2_bond = np.concatenate(([c2[0]], np.minimum(c2[:-1], c2[1:]), [c2[-1]]))
    bond = 0.5 * c2_bond * grad_sq
    return 0.5 * a_dot**2 + 0.5 * (bond[:-1] + bond[1:])


@dataclass
class Recorder:
    """Collects snapshots of the field and the populations every ``stride`` steps."""

    stride: int = 100
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    populations: list = field(default_factory=list)

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    def __call__(self, step_index: int, state: SimState) -> None:
        if step_index % self.stride == 0:
            self.record(state)

    def record(self, state: SimState) -> None:
        self.times.append(state.t)
        self.fields.append(state.a.copy())
        self.populations.append(state.populations)

    def rows(self, layout: LatticeLayout):
        """Yield (t, n, a_n, |c1|^2_n); passive sites carry population 0."""
        for t, a, p1 in zip(self.times, self.fields, self.populations):
            pop = np.zeros(layout.n_total)
            pop[layout.active] = p1
            for n in range(layout.n_total):
                yield t, n, a[n], pop[n]


class Integrator:
    """Fixed-step propagator for one lattice configuration.

    ``order`` selects the plain symmetric step (2) or its triple-jump
    composition (4).  Amplitudes advance with a unitary fourth-order Magnus
    step by default; ``qubit_scheme="rk4"`` selects classical RK4 instead.
    ``frozen=True`` holds the qubit amplitudes fixed and
    drops their coherence from the back-action (static medium).
    """

    def __init__(
        self,
        layout: LatticeLayout,
        medium: MediumParams,
        qubit: QubitParams,
        dt: float,
        order: int = 4,
        frozen: bool = False,
        qubit_scheme: str = "magnus",
    ):
        if not dt > 0:
            raise StabilityError(f"dt must be > 0, got {dt}")
        cfl = CFL_SAFETY / max(medium.v_tilde, medium.u_tilde)
        if dt > cfl:
            raise StabilityError(f"dt={dt} exceeds the CFL limit {cfl:.4g} = 0.5 L0 / max(v, u)")
        if dt > MAX_DT_EPSILON / qubit.epsilon:
            raise StabilityError(f"dt={dt} exceeds 0.1/epsilon = {MAX_DT_EPSILON / qubit.epsilon:.4g}")
        if order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {order}")
        if qubit_scheme not in ("magnus", "rk4"):
            raise ValueError(f"qubit_scheme must be 'magnus' or 'rk4', got {qubit_scheme!r}")
        self.qubit_scheme = qubit_scheme
        self.layout = layout
        self.medium = medium
        self.qubit = qubit
        self.dt = dt
        self.order = order
        self.frozen = frozen
        self._weights = (1.0,) if order == 2 else TRIPLE_JUMP
        self._c2 = _speed_squared(layout, medium)
        self._act = layout.active

    # -- building blocks ---------------------------------------------------

    def acceleration(self, a, c0, c1, t) -> np.ndarray:
        acc = self._c2 * _laplacian(a)
        acc[self._act] -= np.sin(a[self._act]) * _chi_sites(c0, c1, t, self.qubit, self.medium, not self.frozen)
        return acc

    def _advance_qubits(self, a_old, a_new, c0, c1, t, h):
        if self.qubit_scheme == "rk4":
            return self._advance_rk4(a_old, a_new, c0, c1, t, h)
        return self._advance_magnus(a_old, a_new, c0, c1, t, h)

    def _advance_rk4(self, a_old, a_new, c0, c1, t, h):
        """Classical RK4 across [t, t+h] with the site field linear in time."""
        q = self.qubit
        a_mid = 0.5 * (a_old + a_new)
        a2 = (a_old * a_old, a_mid * a_mid, a_new * a_new)
        ph = (
            np.exp(1j * q.epsilon * t),
            np.exp(1j * q.epsilon * (t + 0.5 * h)),
            np.exp(1j * q.epsilon * (t + h)),
        )
        d00, d01, d11 = q.d00, q.d01, q.d11

        def f(i, x0, x1):
            p = ph[i]
            return (
                -1j * a2[i] * (d00 * x0 + d01 * p.conjugate() * x1),
                -1j * a2[i] * (d01 * p * x0 + d11 * x1),
            )

        k10, k11 = f(0, c0, c1)
        k20, k21 = f(1, c0 + 0.5 * h * k10, c1 + 0.5 * h * k11)
        k30, k31 = f(1, c0 + 0.5 * h * k20, c1 + 0.5 * h * k21)
        k40, k41 = f(2, c0 + h * k30, c1 + h * k31)
        c0 = c0 + (h / 6.0) * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
        c1 = c1 + (h / 6.0) * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        return c0, c1

    def _advance_magnus(self, a_old, a_new, c0, c1, t, h):
        """Fourth-order Magnus step (two Gauss points); exactly unitary per site.

        H(s) = a(s)^2 [[d00, d01 e^{-i eps s}], [d01 e^{i eps s}, d11]] and the
        propagator is exp(-i K) with
        K = h/2 (H1 + H2) - i sqrt(3)/12 h^2 [H2, H1].
        """
        q = self.qubit
        da = a_new - a_old
        A, D, B = [], [], []
        for theta in _GAUSS_NODES:
            a2 = np.square(a_old + theta * da)
            A.append(q.d00 * a2)
            D.append(q.d11 * a2)
            B.append(q.d01 * a2 * np.exp(-1j * q.epsilon * (t + theta * h)))
        (A1, A2), (D1, D2), (B1, B2) = A, D, B
        c = _MAGNUS_C * h * h
        im = np.imag(B2 * np.conj(B1))
        k00 = 0.5 * h * (A1 + A2) + 2.0 * c * im
        k11 = 0.5 * h * (D1 + D2) - 2.0 * c * im
        k01 = 0.5 * h * (B1 + B2) - 1j * c * (B1 * (A2 - D2) - B2 * (A1 - D1))
        mean = 0.5 * (k00 + k11)
        half = 0.5 * (k00 - k11)
        theta = np.sqrt(half * half + np.abs(k01) ** 2)
        cos_t = np.cos(theta)
        sinc = np.sinc(theta / np.pi)  # sin(theta)/theta, finite at 0
        glob = np.exp(-1j * mean)
        n0 = glob * (cos_t * c0 - 1j * sinc * (half * c0 + k01 * c1))
        n1 = glob * (cos_t * c1 - 1j * sinc * (np.conj(k01) * c0 - half * c1))
        return n0, n1

    def _substep(self, a, a_dot, c0, c1, t, h, acc):
        a_dot = a_dot + 0.5 * h * acc
        a_new = a + h * a_dot
        if not self.frozen:
            c0, c1 = self._advance_qubits(a[self._act], a_new[self._act], c0, c1, t, h)
        acc = self.acceleration(a_new, c0, c1, t + h)
        a_dot = a_dot + 0.5 * h * acc
        return a_new, a_dot, c0, c1, acc

    def _step(self, a, a_dot, c0, c1, t, acc):
        ts = t
        for w in self._weights:
            h = w * self.dt
            a, a_dot, c0, c1, acc = self._substep(a, a_dot, c0, c1, ts, h, acc)
            ts = ts + h
        return a, a_dot, c0, c1, acc

    # -- public API --------------------------------------------------------

    def step(self, state: SimState) -> SimState:
        """Advance by one ``dt``; returns a new state."""
        acc = self.acceleration(state.a, state.c0, state.c1, state.t)
        a, a_dot, c0, c1, _ = self._step(state.a, state.a_dot, state.c0, state.c1, state.t, acc)
        return SimState(state.t + self.dt, a, a_dot, c0, c1)

    def n_steps(self, t_from: float, t_end: float) -> int:
        if t_end < t_from - 1e-12:
            raise ValueError(f"t_end={t_end} lies before the current time {t_from}")
        return int(round((t_end - t_from) / self.dt))

    def run(
        self,
        state: SimState,
        t_end: float,
        recorder: Optional[Callable[[int, SimState], None]] = None,
    ) -> SimState:
        """Repeat :meth:`step` up to ``t_end`` (rounded to the step grid).

        ``recorder(i, state)`` is called before the first step (i = 0) and
        after every step i = 1..n.
        """
        state.check(self.layout)
        n = self.n_steps(state.t, t_end)
        t = state.t
        a, a_dot, c0, c1 = state.a.copy(), state.a_dot.copy(), state.c0.copy(), state.c1.copy()
        if recorder is not None:
            recorder(0, SimState(t, a, a_dot, c0, c1))
        if n == 0:
            return SimState(t, a, a_dot, c0, c1)
        acc = self.acceleration(a, c0, c1, t)
        for i in range(1, n + 1):
            a, a_dot, c0, c1, acc = self._step(a, a_dot, c0, c1, t, acc)
            t = t + self.dt
            if recorder is not None:
                recorder(i, SimState(t, a, a_dot, c0, c1))
        return SimState(t, a, a_dot, c0, c1)


def step(state: SimState, dt: float, layout: LatticeLayout, m: MediumParams, q: QubitParams, order: int = 4) -> SimState:
    return Integrator(layout, m, q, dt, order=order).step(state)


def run(
    state: SimState,
    t_end: float,
    dt: float,
    layout: LatticeLayout,
    m: MediumParams,
    q: QubitParams,
    recorder=None,
    order: int = 4,
    frozen: bool = False,
) -> SimState:
    return Integrator(layout, m, q, dt, order=order, frozen=frozen).run(state, t_end, recorder)


def lattice_frequency(k: float, v: float, chi: float = 0.0) -> float:
    """Dispersion of the discrete Klein-Gordon lattice, omega^2 = 4 v^2 sin^2(k/2) + chi."""
    return math.sqrt(4 * v * v * math.sin(0.5 * k) ** 2 + chi)


def lattice_wavenumber(omega: float, v: float, chi: float = 0.0) -> float:
    """Inverse of :func:`lattice_frequency` on the first branch."""
    s = math.sqrt(max(omega * omega - chi, 0.0)) / (2 * v)
    if s > 1:
        raise ValueError(f"omega={omega} lies above the lattice band edge")
    return 2 * math.asin(s)
