"""Canonical experiments: priming, probing, band structure and the Rabi check."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import (
    InsufficientPeriodicity,
    chi_register,
    fit_chi_profile,
    interference_sites,
    modulation_period,
    transmission,
)
from .config import Config, ConfigError
from .dynamics import Integrator, Recorder, lattice_wavenumber
from .model import LatticeLayout, SimState
from .oracles import ChiProfile, bloch_bands, dispersion_perturbative, gap_estimates, rabi_frequency, rabi_detuning, rabi_profile
from .pulses import PulseSpec, add_pulse, check_validity

ENVELOPE_REACH = 4.0  # envelope widths beyond which a pulse counts as absent


# -- I/O -------------------------------------------------------------------

def _meta_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def write_csv(path: Path, header: list, rows, meta: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_meta_line(meta) + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def read_csv(path: Path) -> tuple[dict, list, list]:
    """Return (metadata, header, rows as float lists)."""
    meta = {}
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            meta.update(json.loads(ln[1:]))
        else:
            body.append(ln)
    reader = csv.reader(body)
    header = next(reader)
    rows = [[float(x) for x in r] for r in reader if r]
    return meta, header, rows


def write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(clean_json(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def clean_json(x):
    """Recursively convert numpy scalars/arrays to builtins and non-finite floats to None."""
    if isinstance(x, dict):
        return {k: clean_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean_json(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, np.ndarray):
        return [clean_json(v) for v in x.tolist()]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def save_state(path: Path, state: SimState, layout: LatticeLayout, meta: dict) -> None:
    """Persist a qubit register as rows (n, Re c0, Im c0, Re c1, Im c1); n is the lattice site."""
    meta = dict(meta, t=state.t, n_total=layout.n_total, active_start=layout.active_start,
                active_end=layout.active_end)
    n = np.arange(layout.active_start, layout.active_end)
    rows = zip(n, state.c0.real, state.c0.imag, state.c1.real, state.c1.imag)
    write_csv(path, ["n", "re_c0", "im_c0", "re_c1", "im_c1"], rows, meta)


def load_state(path: Path) -> tuple[np.ndarray, np.ndarray, dict]:
    try:
        meta, header, rows = read_csv(Path(path))
    except (OSError, ValueError, StopIteration) as exc:
        raise ConfigError(f"cannot read state file {path}: {exc}") from exc
    if header != ["n", "re_c0", "im_c0", "re_c1", "im_c1"] or not rows:
        raise ConfigError(f"state file {path} does not hold a qubit register")
    arr = np.array(rows)
    return arr[:, 1] + 1j * arr[:, 2], arr[:, 3] + 1j * arr[:, 4], meta


# -- priming ---------------------------------------------------------------------

def priming_pulses(cfg: Config, layout: LatticeLayout) -> tuple[PulseSpec, PulseSpec]:
    p = cfg.pulses
    k = p.k
    omega = p.omega if p.omega is not None else cfg.medium.v_tilde * k
    right = PulseSpec(p.A, k, omega, p.l, layout.active_start - p.offset, 0.0, "right")
    left = PulseSpec(p.A, k, omega, p.l, layout.active_end - 1 + p.offset, p.phi0, "left")
    return right, left


def priming_exit_time(cfg: Config, layout: LatticeLayout) -> float:
    """Time for both envelopes (to three widths) to clear the far edge of the active region."""
    right, _ = priming_pulses(cfg, layout)
    return (cfg.pulses.offset + layout.n_active + 3.0 * cfg.pulses.l) / right.speed


@dataclass
class PrimeResult:
    layout: LatticeLayout
    initial: SimState
    final: SimState
    summary: dict
    recorder: Recorder = field(repr=False, default=None)


def scenario_prime(cfg: Config, out: Optional[Path] = None, t_end: Optional[float] = None) -> PrimeResult:
    layout = cfg.lattice.layout()
    right, left = priming_pulses(cfg, layout)
    warnings = [str(w) for spec in (right, left) for w in check_validity(spec, layout, cfg.medium, cfg.qubit)]
    state = add_pulse(add_pulse(SimState.ground(layout), right, layout), left, layout)
    if t_end is None:
        t_end = cfg.run.t_end if cfg.run.t_end is not None else priming_exit_time(cfg, layout)
    integ = Integrator(layout, cfg.medium, cfg.qubit, cfg.run.dt, order=cfg.run.order,
                       frozen=cfg.run.mode == "frozen")
    rec = Recorder(cfg.run.stride)
    t0 = time.perf_counter()
    final = integ.run(state, t_end, rec)
    elapsed = time.perf_counter() - t0

    p1 = final.populations
    summary = {
        "t_end": final.t,
        "runtime_s": elapsed,
        "norm_error": final.norm_error(),
        "max_population": float(p1.max()),
        "max_abs_c1": float(np.sqrt(p1.max())),
        "warnings": warnings,
        "target_period": math.pi / right.k,
    }
    try:
        est = modulation_period(p1)
        fit = fit_chi_profile(final, cfg.qubit, cfg.medium)
        summary.update(
            period=est.period,
            period_uncertainty=est.uncertainty,
            n_peaks=est.n_peaks,
            fft_period=est.fft_period,
            chi0=fit.profile.chi0,
            chi_tilde=fit.profile.chi_tilde,
            L_m=fit.profile.L_m,
            neglected_coherence=fit.neglected,
            period_error=None,
        )
    except InsufficientPeriodicity as exc:
        summary.update(period=None, period_error=str(exc))

    k_active = lattice_wavenumber(right.omega, cfg.medium.v_tilde, cfg.qubit.d00 * cfg.medium.r / cfg.qubit.E_J)
    nodes, antinodes = interference_sites(layout, right.k, cfg.pulses.phi0, k_active)
    c1abs = np.abs(final.c1)
    summary["node_max_abs_c1"] = float(c1abs[nodes].max()) if len(nodes) else None
    summary["antinode_min_abs_c1"] = float(c1abs[antinodes].min()) if len(antinodes) else None

    if out is not None:
        out = Path(out)
        meta = cfg.flat()
        write_csv(out / "populations.csv", ["n", "p1", "abs_c1"],
                  zip(layout.z_active.astype(int), p1, c1abs), meta)
        write_csv(out / "fields.csv", ["t", "n", "a", "p1"], rec.rows(layout), meta)
        save_state(out / "state.csv", final, layout, meta)
        write_json(out / "summary.json", summary)
    return PrimeResult(layout, state, final, summary, rec)


# -- probe -------------------------------------------------------------------------

def in_gap_period(omega: float, chi0: float, chi_tilde: float, v: float) -> float:
    """L_m placing the first lattice gap of chi0 + chi_tilde(1 + cos) at ``omega``."""
    s2 = (omega * omega - chi0 - chi_tilde) / (4 * v * v)
    if not 0 < s2 < 1:
        raise ConfigError(f"no modulation period centres the gap at omega={omega}")
    return math.pi / (2 * math.asin(math.sqrt(s2)))


def synthetic_register(cfg: Config) -> tuple[np.ndarray, np.ndarray, ChiProfile]:
    q, m = cfg.qubit, cfg.medium
    scale = m.r / q.E_J
    chi0 = scale * q.d00
    chi_tilde = scale * (q.d11 - q.d00) * cfg.probe.p_max / 2
    L_m = cfg.probe.L_m or in_gap_period(cfg.probe.omegas[0], chi0, chi_tilde, m.v_tilde)
    chi = ChiProfile(chi0, chi_tilde, L_m)
    c0, c1 = chi_register(chi, cfg.lattice.n_active, q, m)
    return c0, c1, chi


def probe_layout(cfg: Config) -> tuple[LatticeLayout, float, float]:
    """Lattice wide enough to hold the incident, reflected and transmitted pulse; returns (layout, z0, t_end)."""
    pr = cfg.probe
    reach = ENVELOPE_REACH * pr.l
    z0 = reach + 40.0
    start = int(math.ceil(z0 + reach + 40.0))
    end = start + cfg.lattice.n_active
    speed = cfg.medium.u_tilde
    t_end = pr.t_end if pr.t_end is not None else 1.25 * (end - (z0 - reach)) / speed
    n_total = int(math.ceil(z0 + speed * t_end + reach + 40.0))
    return LatticeLayout(n_total, start, end), z0, t_end


@dataclass
class ProbeRun:
    omega: float
    T: float
    R: float
    loss: float
    active_fraction: float
    snapshot_t: float
    snapshot: np.ndarray = field(repr=False)
    initial: np.ndarray = field(repr=False)


def run_probe(cfg: Config, layout: LatticeLayout, z0: float, t_end: float, c0, c1, omega: float, mode: str) -> ProbeRun:
    m, q = cfg.medium, cfg.qubit
    k = lattice_wavenumber(omega, m.u_tilde)
    spec = PulseSpec(cfg.probe.A, k, omega, cfg.probe.l, z0, 0.0, "right")
    state = SimState.ground(layout)
    state.c0 = np.array(c0, dtype=complex)
    state.c1 = np.array(c1, dtype=complex)
    state = add_pulse(state, spec, layout)
    integ = Integrator(layout, m, q, cfg.run.dt, order=cfg.run.order, frozen=mode == "frozen")
    t_snap = min(cfg.probe.t_snapshot, t_end)
    snap = integ.run(state, t_snap)
    final = integ.run(snap, t_end)
    tr = transmission(state, final, layout, m)
    return ProbeRun(omega, tr.T, tr.R, tr.loss, tr.active_fraction, snap.t, snap.a.copy(), state.a.copy())


def scenario_probe(cfg: Config, out: Optional[Path] = None, mode: Optional[str] = None) -> dict:
    mode = mode or cfg.run.mode
    if mode not in ("live", "frozen"):
        raise ConfigError(f"mode must be 'live' or 'frozen', got {mode!r}")
    layout, z0, t_end = probe_layout(cfg)
    if cfg.probe.state == "synthetic":
        c0, c1, chi = synthetic_register(cfg)
        source = {"register": "synthetic", "chi0": chi.chi0, "chi_tilde": chi.chi_tilde, "L_m": chi.L_m}
    else:
        c0, c1, _ = load_state(Path(cfg.probe.state))
        if len(c0) != layout.n_active:
            raise ConfigError(
                f"state file holds {len(c0)} qubits but lattice.n_active is {layout.n_active}"
            )
        source = {"register": str(cfg.probe.state)}
    runs = [run_probe(cfg, layout, z0, t_end, c0, c1, w, mode) for w in cfg.probe.omegas]
    summary = dict(source, mode=mode, t_end=t_end, n_total=layout.n_total,
                   runs=[{"omega": r.omega, "T": r.T, "R": r.R, "loss": r.loss,
                          "active_fraction": r.active_fraction} for r in runs])
    if len(runs) >= 2 and runs[0].T > 0:
        summary["contrast"] = runs[-1].T / runs[0].T
    if out is not None:
        out = Path(out)
        meta = dict(cfg.flat(), mode=mode)
        rows = []
        for r in runs:
            for n in range(layout.n_total):
                rows.append((r.omega, 0.0, n, r.initial[n]))
            for n in range(layout.n_total):
                rows.append((r.omega, r.snapshot_t, n, r.snapshot[n]))
        write_csv(out / "probe_fields.csv", ["omega", "t", "n", "a"], rows, meta)
        write_json(out / "transmission.json", summary)
    return summary


# -- bands ---------------------------------------------------------------------

def bands_profile(cfg: Config) -> ChiProfile:
    b, q, m = cfg.bands, cfg.qubit, cfg.medium
    if b.state:
        c0, c1, meta = load_state(Path(b.state))
        fit = fit_chi_profile(SimState(0.0, np.zeros(1), np.zeros(1), c0, c1), q, m)
        return fit.profile
    chi0 = b.chi0 if b.chi0 is not None else m.r / q.E_J * q.d00
    chi_tilde = b.chi_tilde if b.chi_tilde is not None else 0.02
    return ChiProfile(chi0, chi_tilde, b.L_m)


def scenario_bands(cfg: Config, out: Optional[Path] = None, chi: Optional[ChiProfile] = None) -> dict:
    chi = chi or bands_profile(cfg)
    m = cfg.medium
    if not math.isfinite(chi.L_m):
        raise ConfigError("band structure needs a finite modulation period")
    ks = np.linspace(0.0, 2 * math.pi / chi.L_m, cfg.bands.n_k)
    bs = bloch_bands(ks, chi, m, cfg.bands.M)
    gaps = []
    for n, center, width in bs.gaps:
        est = gap_estimates(n, chi, m)
        gaps.append({"n": n, "center": center, "width": width, "k": math.pi * n / chi.L_m,
                     "perturbative_width": est.width, "literal_width": est.width_literal,
                     "validity_ratio": est.validity_ratio, "perturbative_center": est.center})
    summary = {"chi0": chi.chi0, "chi_tilde": chi.chi_tilde, "L_m": chi.L_m, "gaps": gaps}
    if out is not None:
        out = Path(out)
        n_br = 4
        rows = []
        for k, w in bs.samples:
            lo, hi = dispersion_perturbative(float(k), chi, m)
            rows.append([k, *w[:n_br], lo, hi])
        header = ["k"] + [f"omega_{i}" for i in range(n_br)] + ["pert_minus", "pert_plus"]
        write_csv(out / "bands.csv", header, rows, cfg.flat())
        write_json(out / "gaps.json", summary)
    return summary


# -- Rabi check ----------------------------------------------------------------

def rabi_layout(cfg: Config, t_max: float) -> LatticeLayout:
    """Active region wide enough that edge disturbances cannot reach the compared window by ``t_max``."""
    reach = int(math.ceil(cfg.medium.v_tilde * t_max)) + 40
    n_active = max(cfg.lattice.n_active, cfg.rabi.window + 2 * reach)
    pad = max(200, (cfg.lattice.n_total - cfg.lattice.n_active) // 2)
    return LatticeLayout(n_active + 2 * pad, pad, pad + n_active)


def scenario_rabi_check(cfg: Config, out: Optional[Path] = None) -> dict:
    """Two wide counter-propagating waves overlapped on the active region, compared with the Rabi oracle.

    The carrier is tuned so that its frequency inside the active region is
    epsilon/2 (two-photon resonance, zero detuning).
    """
    q, m, rc = cfg.qubit, cfg.medium, cfg.rabi
    omega = 0.5 * q.epsilon
    chi0 = m.r / q.E_J * q.d00
    k = lattice_wavenumber(omega, m.v_tilde, chi0)

    peak_omega = float(rabi_frequency(0.0, rc.A, k, 0.0, q))
    peak_gamma = float(rabi_detuning(0.0, rc.A, k, 0.0, 0.0, q))
    generalized = math.sqrt(peak_omega**2 + 0.25 * peak_gamma**2)
    period = 2 * math.pi / generalized
    times = np.linspace(0.0, rc.periods * period, rc.samples + 1)[1:]

    layout = rabi_layout(cfg, times[-1])
    zc = layout.center
    right = PulseSpec(rc.A, k, omega, rc.l, zc, 0.0, "right")
    left = PulseSpec(rc.A, k, omega, rc.l, zc, cfg.pulses.phi0, "left")
    state = add_pulse(add_pulse(SimState.ground(layout), right, layout), left, layout)

    integ = Integrator(layout, m, q, cfg.run.dt, order=cfg.run.order)
    half = rc.window // 2
    idx = np.arange(int(round(zc)) - half, int(round(zc)) - half + rc.window) - layout.active_start
    z = layout.z_active[idx]
    nodes, _ = interference_sites(layout, k, cfg.pulses.phi0)
    nodes = np.intersect1d(nodes, idx)
    err = 0.0
    node_max = 0.0
    rows = []
    for t in times:
        state = integ.run(state, t)
        sim = np.abs(state.c1[idx])
        ref = rabi_profile(z, state.t, rc.A, k, cfg.pulses.phi0, 0.0, q)
        err = max(err, float(np.max(np.abs(sim - ref))))
        if len(nodes):
            node_max = max(node_max, float(np.abs(state.c1[nodes]).max()))
        rows.extend(zip([state.t] * len(z), z, sim, ref))
    summary = {"max_abs_error": err, "node_max_abs_c1": node_max, "rabi_period": period,
               "peak_rabi_frequency": peak_omega, "peak_detuning": peak_gamma, "k": k,
               "n_total": layout.n_total, "n_active": layout.n_active,
               "times": times.tolist(), "norm_error": state.norm_error()}
    if out is not None:
        out = Path(out)
        write_csv(out / "rabi.csv", ["t", "z", "sim_abs_c1", "oracle_abs_c1"], rows, cfg.flat())
        write_json(out / "rabi.json", summary)
    return summary
