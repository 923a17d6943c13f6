"""Independent predictions used to validate the lattice simulator.

* local Rabi excitation under two counter-propagating quasi-monochromatic waves
* perturbative Bloch dispersion and gap widths of a cosine susceptibility
* exact Bloch bands from the truncated Fourier-space (Hill) matrix
* charge-basis spectrum of the qubit Hamiltonian

Everything here is small and dense; the symmetric eigenproblems are solved
with a cyclic Jacobi iteration so the oracles do not share a code path with
LAPACK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import MediumParams, QubitParams


class ConvergenceError(RuntimeError):
    pass


class UnphysicalParameters(ValueError):
    pass


class TruncationError(ValueError):
    pass


# -- dense symmetric eigen-solver -----------------------------------------

def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric matrix.

    Cyclic Jacobi rotations, sweeping all (p, q) pairs until the off-diagonal
    Frobenius norm drops below ``tol`` times the matrix norm.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigh needs a square symmetric matrix")
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0 or n == 1:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        off = _off_norm(a)
        if off > tol * scale * 1e3:
            raise ConvergenceError(f"Jacobi did not converge: off-diagonal norm {off:.3e}")
    w = np.diag(a).copy()
    order = np.argsort(w)
    return w[order], v[:, order]


# -- Rabi profile ------------------------------------------------------------

def rabi_frequency(z, A: float, k: float, phi0: float, q: QubitParams, hbar: float = 1.0):
    """|Omega(z)| = 2|d01| A^2 (cos(2kz + phi0) + 1) / hbar."""
    return 2.0 * abs(q.d01) * A**2 * (np.cos(2 * k * np.asarray(z) + phi0) + 1.0) / hbar


def rabi_detuning(z, A: float, k: float, phi0: float, delta: float, q: QubitParams, hbar: float = 1.0):
    """gamma(z) = Delta + 4 A^2 (d00 - d11)(cos(2kz + phi0) + 1) / hbar."""
    return delta + 4.0 * A**2 * (q.d00 - q.d11) * (np.cos(2 * k * np.asarray(z) + phi0) + 1.0) / hbar


def rabi_profile(z, t, A: float, k: float, phi0: float, delta: float, q: QubitParams, hbar: float = 1.0):
    """|c1(z, t)| for a qubit starting in the ground state under the resonant two-wave drive."""
    omega = rabi_frequency(z, A, k, phi0, q, hbar)
    gamma = rabi_detuning(z, A, k, phi0, delta, q, hbar)
    gen = np.sqrt(omega**2 + 0.25 * gamma**2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(gen > 0, omega * np.abs(np.sin(gen * np.asarray(t))) / np.where(gen > 0, gen, 1.0), 0.0)
    out = np.where(omega == 0, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


# -- susceptibility profile and bands ---------------------------------------

@dataclass(frozen=True)
class ChiProfile:
    """chi(z) = chi0 + chi_tilde (1 + cos(2 pi z / L_m))."""

    chi0: float
    chi_tilde: float
    L_m: float

    def __post_init__(self):
        if not self.chi0 >= 0:
            raise ValueError(f"chi0 must be >= 0, got {self.chi0}")
        if not self.chi_tilde >= 0:
            raise ValueError(f"chi_tilde must be >= 0, got {self.chi_tilde}")
        if not self.L_m > 0:
            raise ValueError(f"L_m must be > 0, got {self.L_m}")

    def __call__(self, z):
        return self.chi0 + self.chi_tilde * (1.0 + np.cos(2 * np.pi * np.asarray(z) / self.L_m))

    @property
    def W0(self) -> float:
        return self.chi0 + self.chi_tilde

    def fourier(self, n: int) -> float:
        """W_k at k = pi n / L_m, i.e. (1/L_m) int chi(z) exp(2ikz) dz over one period."""
        n = abs(int(n))
        if n == 0:
            return self.W0
        if n == 1:
            return 0.5 * self.chi_tilde
        return 0.0


def fourier_coefficient_quadrature(chi: ChiProfile, n: int, samples: int = 4096) -> complex:
    """Numerical (1/L_m) int_{-L_m/2}^{L_m/2} chi(z) exp(2 i k_n z) dz, k_n = pi n / L_m."""
    z = (np.arange(samples) + 0.5) / samples * chi.L_m - 0.5 * chi.L_m
    k = math.pi * n / chi.L_m
    return complex(np.mean(chi(z) * np.exp(2j * k * z)))


def _resonance_index(k: float, L_m: float, tol: float = 1e-9) -> int:
    n = round(k * L_m / math.pi)
    if n != 0 and abs(k - math.pi * n / L_m) <= tol * max(1.0, abs(k)):
        return n
    return 0


def dispersion_perturbative(k: float, chi: ChiProfile, m: MediumParams) -> tuple[float, float]:
    """Lower and upper branch omega at wave number k from omega^2 - v^2 k^2 = +-|W_k| + W_0.

    Off the resonant set k = pi n / L_m the splitting vanishes and both values coincide.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    n = _resonance_index(k, chi.L_m)
    split = abs(chi.fourier(n)) if n else 0.0
    base = m.v_tilde**2 * k * k + chi.W0
    lo, hi = base - split, base + split
    if lo < 0:
        raise UnphysicalParameters(f"omega^2 = {lo:.4g} < 0 at k = {k}")
    return math.sqrt(lo), math.sqrt(hi)


@dataclass(frozen=True)
class GapEstimate:
    n: int
    width: float  # W_kn / sqrt((pi v n / L_m)^2 + W0)
    width_literal: float  # chi_tilde / sqrt((pi v / L_m)^2 + W0) for n = 1, else 0
    center: float  # sqrt((pi v n / L_m)^2 + W0)
    validity_ratio: float  # ((pi v n / L_m)^2 + W0) / |W_kn|


def gap_estimates(n: int, chi: ChiProfile, m: MediumParams) -> GapEstimate:
    if n < 1:
        raise ValueError("gap index n must be >= 1")
    base = (math.pi * m.v_tilde * n / chi.L_m) ** 2 + chi.W0
    w_n = abs(chi.fourier(n))
    width = w_n / math.sqrt(base)
    literal = chi.chi_tilde / math.sqrt(base) if n == 1 else 0.0
    ratio = base / w_n if w_n > 0 else math.inf
    return GapEstimate(n, width, literal, math.sqrt(base), ratio)


def gap_width(n: int, chi: ChiProfile, m: MediumParams) -> float:
    """Perturbative width of the n-th gap, W_kn / sqrt((pi v n / L_m)^2 + W0).

    This is the form that agrees with the exact Hill-matrix bands; the variant
    with numerator chi_tilde (twice W_k1) is available as
    ``gap_estimates(...).width_literal``.
    """
    return gap_estimates(n, chi, m).width


def hill_matrix(k: float, chi: ChiProfile, m: MediumParams, M: int) -> np.ndarray:
    """(2M+1)^2 Fourier-space operator whose eigenvalues are omega^2 at Bloch wave number k."""
    g = 2 * math.pi / chi.L_m
    orders = np.arange(-M, M + 1)
    h = np.diag(m.v_tilde**2 * (k + g * orders) ** 2 + chi.W0)
    off = 0.5 * chi.chi_tilde
    idx = np.arange(2 * M)
    h[idx, idx + 1] = off
    h[idx + 1, idx] = off
    return h


@dataclass
class BandStructure:
    samples: list = field(default_factory=list)  # (k, ascending omegas)
    gaps: list = field(default_factory=list)  # (n, center, width)

    def omegas(self) -> np.ndarray:
        return np.array([w for _, w in self.samples])

    def ks(self) -> np.ndarray:
        return np.array([k for k, _ in self.samples])


def bloch_frequencies(k: float, chi: ChiProfile, m: MediumParams, M: int = 8) -> np.ndarray:
    if M < 4:
        raise ValueError("truncation M must be >= 4")
    w2, _ = jacobi_eigh(hill_matrix(k, chi, m, M))
    if w2[0] < -1e-12 * max(1.0, abs(w2[-1])):
        raise UnphysicalParameters(f"negative omega^2 = {w2[0]:.4g} at k = {k}")
    return np.sqrt(np.clip(w2, 0.0, None))


def fold_to_zone(k: float, L_m: float) -> float:
    """Map k into the first Brillouin zone [-pi/L_m, pi/L_m]."""
    g = 2 * math.pi / L_m
    return k - g * math.floor(k / g + 0.5)


def bloch_bands(
    k_list: Sequence[float],
    chi: ChiProfile,
    m: MediumParams,
    M: int = 8,
    n_gaps: int = 3,
) -> BandStructure:
    """Bands at the (zone-folded) wave numbers in ``k_list`` plus the first ``n_gaps`` gaps.

    Gap n opens between bands n-1 and n (0-based) at the zone edge for odd n
    and at the zone centre for even n.
    """
    bs = BandStructure()
    for k in k_list:
        bs.samples.append((float(k), bloch_frequencies(fold_to_zone(float(k), chi.L_m), chi, m, M)))
    edge = bloch_frequencies(math.pi / chi.L_m, chi, m, M)
    centre = bloch_frequencies(0.0, chi, m, M)
    for n in range(1, n_gaps + 1):
        w = edge if n % 2 else centre
        lo, hi = w[n - 1], w[n]
        bs.gaps.append((n, 0.5 * (lo + hi), max(hi - lo, 0.0)))
    return bs


# -- charge qubit --------------------------------------------------------------

@dataclass(frozen=True)
class QubitSpectrum:
    """Levels of the charge-basis Hamiltonian; energies in hbar*omega_J.

    ``d00``, ``d01``, ``d11`` are E_J<a|cos phi|b> in units of hbar*epsilon.
    """

    epsilon_over_omegaJ: float
    d00: float
    d01: float
    d11: float
    E_J_over_hbar_epsilon: float
    levels: np.ndarray

    def to_qubit_params(self) -> QubitParams:
        return QubitParams(
            epsilon=1.0,
            E_J=self.E_J_over_hbar_epsilon,
            d00=self.d00,
            d11=self.d11,
            d01=abs(self.d01),
        )


def charge_hamiltonian(ej_over_hbar_omegaJ: float, n_g: float, M: int) -> np.ndarray:
    """(hbar w_J)^2 (m - n_g)^2 / E_J on the diagonal, -E_J between neighbours; units hbar w_J."""
    ej = ej_over_hbar_omegaJ
    m = np.arange(-M, M + 1)
    h = np.diag((m - n_g) ** 2 / ej)
    idx = np.arange(2 * M)
    h[idx, idx + 1] = -ej
    h[idx + 1, idx] = -ej
    return h


def qubit_spectrum(EJ_over_hbar_omegaJ: float, n_g: float = 0.0, M: int = 30) -> QubitSpectrum:
    """Two lowest levels of -(hbar w_J)^2/E_J d^2/dphi^2 - 2 E_J cos(phi) in the charge basis |m| <= M."""
    if not EJ_over_hbar_omegaJ > 0:
        raise ValueError("EJ_over_hbar_omegaJ must be > 0")
    if M < 8:
        raise ValueError("charge truncation M must be >= 8")
    ej = EJ_over_hbar_omegaJ
    w, v = jacobi_eigh(charge_hamiltonian(ej, n_g, M))
    ground = v[:, 0]
    edge = max(abs(ground[0]), abs(ground[-1]))
    if edge > 1e-10:
        raise TruncationError(f"ground state reaches |m| = M = {M} with weight {edge:.2e}; increase M")
    n = 2 * M + 1
    cos_phi = np.zeros((n, n))
    idx = np.arange(n - 1)
    cos_phi[idx, idx + 1] = cos_phi[idx + 1, idx] = 0.5
    eps = w[1] - w[0]
    d = ej * (v[:, :2].T @ cos_phi @ v[:, :2]) / eps
    return QubitSpectrum(
        epsilon_over_omegaJ=eps,
        d00=float(d[0, 0]),
        d01=float(d[0, 1]),
        d11=float(d[1, 1]),
        E_J_over_hbar_epsilon=ej / eps,
        levels=w,
    )
