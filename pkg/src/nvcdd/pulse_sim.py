"""Quasi-static Monte-Carlo simulation of the CDD pulse sequences.

Sequences are propagated as piecewise-constant Hamiltonians in the doubly
rotating frame: the mechanical drive rotates the +-1 manifold at
omega_mech/2 and the magnetic carrier absorbs the nominal zero-field
splitting, so the |0> level sits at (carrier detuning) - (dD/dT)*deltaT.
Spectral abscissae are detunings from the nominal undressed 0<->-1 line.

One environment sample is drawn per shot and held constant across the
whole sequence.  Shot RNG streams are counter-based (Philox keyed by
(seed, shot), counter positioned by the abscissa index), so execution
order never changes results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .dephasing import NoiseSpec
from .spin_model import (EnvironmentSample, NonHermitianError, SystemParams,
                         dressed_transition_offsets)
from .units import angular_to_khz

NORM_TOL = 1e-9

# Paper-grade default pulse strengths (angular rad/us).
DEFAULT_OMEGA_MAG_SQ = 2.0 * math.pi * 0.696   # {0,p} pi/2 pulses, 696 kHz
DEFAULT_OMEGA_MAG_DQ = 2.0 * math.pi * 1.513   # {m,p} DQ pi pulses, 1513 kHz
# Phase-advance rate of the closing {0,p} pulse; a visualization aid, not a
# measured quantity.
DEFAULT_OMEGA_ROT = 2.0 * math.pi * 0.250

RAMSEY_KINDS = ("undressed_0m1", "dressed_0p", "dressed_mp", "max_protection")


class SequenceError(ValueError):
    """Malformed pulse sequence; carries the offending segment index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"segment {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class Reset:
    """Optical initialization into |0> with the given 13C weights."""

    weights: tuple = (0.5, 0.5)

    def __post_init__(self):
        w = self.weights
        if len(w) != 2 or min(w) < 0 or abs(w[0] + w[1] - 1.0) > 1e-12:
            raise ValueError("carbon weights must be two non-negatives summing to 1")


@dataclass(frozen=True)
class MagneticPulse:
    """Magnetic drive segment.

    coupling 'sq' is a pulse near the undressed 0<->-1 line; 'dq' is the
    stronger single-tone pulse at the dressed-line midpoint that addresses
    both the 0<->m and 0<->p transitions through their |-1> components.
    Either way the drive couples |0> to |-1> only: the 0<->+1 matrix
    element of a tone near the 0<->-1 splitting is detuned by the full
    Zeeman splitting and is dropped, like every other counter-rotating
    term in this frame.
    """

    omega_mag: float            # Rabi strength, rad/us
    duration: float             # us
    phase: float = 0.0          # rad
    detuning_mag: float | None = None  # rad/us; None -> sequence frame value
    coupling: str = "sq"        # 'sq' or 'dq'

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")
        if self.coupling not in ("sq", "dq"):
            raise ValueError(f"unknown coupling {self.coupling!r}")


@dataclass(frozen=True)
class FreeEvolution:
    duration: float  # us

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class Readout:
    pass


@dataclass(frozen=True)
class PulseSequence:
    """Ordered segments plus the carrier frame detuning shared by all
    free-evolution segments (and pulses that do not override it)."""

    segments: tuple
    frame_detuning: float = 0.0  # rad/us


@dataclass(frozen=True)
class SimConfig:
    n_shots: int = 1000
    seed: int = 0
    carbon_weights: tuple = (0.5, 0.5)
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        w = self.carbon_weights
        if len(w) != 2 or min(w) < 0 or abs(w[0] + w[1] - 1.0) > 1e-12:
            raise ValueError("carbon weights must be two non-negatives summing to 1")


@dataclass
class Trace:
    """Simulated measurement record: mean |0> population per grid point."""

    abscissa: np.ndarray      # tau in us, or detuning in kHz
    mean_p0: np.ndarray
    stderr: np.ndarray
    n_shots: int
    metadata: dict

    def __post_init__(self):
        self.abscissa = np.asarray(self.abscissa, dtype=float)
        self.mean_p0 = np.asarray(self.mean_p0, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(self.mean_p0 < -1e-9) or np.any(self.mean_p0 > 1 + 1e-9):
            raise ValueError("mean_p0 must lie in [0, 1]")
        if np.any(self.stderr < 0):
            raise ValueError("stderr must be >= 0")


def shot_rng(seed: int, shot_index: int, point_index: int) -> np.random.Generator:
    """Counter-based per-shot RNG stream, independent of execution order."""
    bitgen = np.random.Philox(key=np.array([seed, shot_index], dtype=np.uint64),
                              counter=np.array([0, point_index, 0, 0],
                                               dtype=np.uint64))
    return np.random.Generator(bitgen)


def sample_environment(noise: NoiseSpec, rng: np.random.Generator,
                       mean_omega: float = 0.0) -> EnvironmentSample:
    """Draw one quasi-static environment sample (db, dOmega, dT)."""
    draws = rng.standard_normal(3)
    return EnvironmentSample(
        delta_b=draws[0] * noise.sigma_b,
        delta_omega=draws[1] * noise.sigma_omega(mean_omega),
        delta_t=draws[2] * noise.sigma_t,
    )


def _frame_hamiltonians(params: SystemParams, db, dom, dt,
                        detuning_mag, omega_mag=0.0, phase=0.0,
                        coupling="sq") -> np.ndarray:
    """Stacked doubly-rotating-frame Hamiltonians, shape (n, 6, 6).

    db, dom, dt are environment arrays of shape (n,).
    """
    db = np.atleast_1d(np.asarray(db, dtype=float))
    dom = np.broadcast_to(np.asarray(dom, dtype=float), db.shape)
    dt = np.broadcast_to(np.asarray(dt, dtype=float), db.shape)
    n = db.shape[0]
    h = np.zeros((n, 6, 6), dtype=complex)
    gdb = params.gamma * db
    a = params.a_par
    h[:, 0, 0] = gdb + 0.5 * (params.delta + a)
    h[:, 1, 1] = gdb + 0.5 * (params.delta - a)
    h[:, 2, 2] = detuning_mag - params.dd_dt * dt
    h[:, 3, 3] = h[:, 2, 2]
    h[:, 4, 4] = -gdb - 0.5 * (params.delta + a)
    h[:, 5, 5] = -gdb - 0.5 * (params.delta - a)
    om2 = 0.5 * (params.omega + dom)
    h[:, 0, 4] = h[:, 4, 0] = om2
    h[:, 1, 5] = h[:, 5, 1] = om2
    if omega_mag:
        # Both pulse flavours drive 0<->-1; the 0<->+1 element sits a full
        # Zeeman splitting off resonance and is dropped with the other
        # counter-rotating terms.
        g = 0.5 * omega_mag * np.exp(1j * phase)
        h[:, 2, 4] = g
        h[:, 4, 2] = np.conj(g)
        h[:, 3, 5] = g
        h[:, 5, 3] = np.conj(g)
    return h


def drive_hamiltonian(params: SystemParams, env: EnvironmentSample,
                      pulse: MagneticPulse) -> np.ndarray:
    """Rotating-frame Hamiltonian during a magnetic pulse (6x6)."""
    det = pulse.detuning_mag if pulse.detuning_mag is not None else 0.0
    return _frame_hamiltonians(params, [env.delta_b], env.delta_omega,
                               env.delta_t, det, pulse.omega_mag,
                               pulse.phase, pulse.coupling)[0]


def free_hamiltonian(params: SystemParams, env: EnvironmentSample,
                     frame_detuning: float = 0.0) -> np.ndarray:
    """Rotating-frame Hamiltonian with the magnetic drive off (6x6)."""
    return _frame_hamiltonians(params, [env.delta_b], env.delta_omega,
                               env.delta_t, frame_detuning)[0]


def _propagate_batch(states: np.ndarray, h: np.ndarray,
                     duration: float) -> np.ndarray:
    """exp(-i h t) applied to stacked states via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    coeff = np.einsum("nij,nj->ni", vecs.conj().transpose(0, 2, 1), states)
    coeff = coeff * np.exp(-1j * vals * duration)
    return np.einsum("nij,nj->ni", vecs, coeff)


def propagate(state: np.ndarray, h: np.ndarray, duration: float) -> np.ndarray:
    """Evolve a 6-component state under a constant Hermitian Hamiltonian."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    h = np.asarray(h, dtype=complex)
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > 1e-10 * scale:
        raise NonHermitianError("propagation Hamiltonian is not Hermitian")
    out = _propagate_batch(np.asarray(state, dtype=complex)[None, :],
                           h[None, :, :], duration)[0]
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > NORM_TOL and abs(np.linalg.norm(state) - 1.0) < NORM_TOL:
        raise RuntimeError("propagation lost norm")
    return out


def _validate_sequence(seq: PulseSequence) -> None:
    segs = seq.segments
    if not segs or not isinstance(segs[0], Reset):
        raise SequenceError(0, "sequence must begin with Reset")
    if not isinstance(segs[-1], Readout):
        raise SequenceError(len(segs) - 1, "sequence must end with Readout")
    for i, seg in enumerate(segs[1:-1], start=1):
        if not isinstance(seg, (MagneticPulse, FreeEvolution)):
            raise SequenceError(i, f"unexpected segment {type(seg).__name__}")


def _run_batch(seq: PulseSequence, params: SystemParams,
               db, dom, dt) -> np.ndarray:
    """Run the sequence for stacked environment samples; returns P0 (n,)."""
    _validate_sequence(seq)
    db = np.atleast_1d(np.asarray(db, dtype=float))
    n = db.shape[0]
    states = np.zeros((n, 6), dtype=complex)
    w = seq.segments[0].weights
    states[:, 2] = math.sqrt(w[0])
    states[:, 3] = math.sqrt(w[1])
    for seg in seq.segments[1:-1]:
        if isinstance(seg, FreeEvolution):
            h = _frame_hamiltonians(params, db, dom, dt, seq.frame_detuning)
            states = _propagate_batch(states, h, seg.duration)
        else:
            det = seg.detuning_mag if seg.detuning_mag is not None \
                else seq.frame_detuning
            h = _frame_hamiltonians(params, db, dom, dt, det, seg.omega_mag,
                                    seg.phase, seg.coupling)
            states = _propagate_batch(states, h, seg.duration)
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise RuntimeError("propagation lost norm")
    return np.abs(states[:, 2]) ** 2 + np.abs(states[:, 3]) ** 2


def run_sequence(seq: PulseSequence, params: SystemParams,
                 env: EnvironmentSample) -> float:
    """Population remaining in |0> after one shot of the sequence."""
    return float(_run_batch(seq, params, [env.delta_b], env.delta_omega,
                            env.delta_t)[0])


def _sample_block(noise: NoiseSpec, mean_omega: float, seed: int,
                  point_index: int, n_shots: int):
    """Per-shot environment draws for one grid point, shape (n_shots,) each."""
    db = np.empty(n_shots)
    dom = np.empty(n_shots)
    dt = np.empty(n_shots)
    sigma_om = noise.sigma_omega(mean_omega)
    for shot in range(n_shots):
        draws = shot_rng(seed, shot, point_index).standard_normal(3)
        db[shot] = draws[0] * noise.sigma_b
        dom[shot] = draws[1] * sigma_om
        dt[shot] = draws[2] * noise.sigma_t
    return db, dom, dt


def _mean_p_line(params: SystemParams) -> float:
    """Frame position of the 0<->p line, averaged over 13C sublevels."""
    up = 0.5 * math.hypot(params.omega, params.delta + params.a_par)
    dn = 0.5 * math.hypot(params.omega, params.delta - params.a_par)
    return 0.5 * (up + dn)


def _ramsey_sequence(kind: str, tau: float, params: SystemParams,
                     weights, omega_mag: float, omega_rot: float,
                     closing_phase: float) -> PulseSequence:
    if kind == "undressed_0m1":
        frame = -0.5 * params.delta
        t_half = 0.5 * math.pi / omega_mag
        open_pulse = MagneticPulse(omega_mag, t_half, coupling="sq")
        close_pulse = MagneticPulse(omega_mag, t_half,
                                    phase=omega_rot * tau + closing_phase,
                                    coupling="sq")
    elif kind == "dressed_0p":
        frame = _mean_p_line(params)
        t_half = 0.5 * math.pi / omega_mag
        open_pulse = MagneticPulse(omega_mag, t_half, coupling="sq")
        close_pulse = MagneticPulse(omega_mag, t_half,
                                    phase=omega_rot * tau + closing_phase,
                                    coupling="sq")
    else:  # dressed_mp, max_protection
        frame = 0.0
        t_pi = math.pi / omega_mag
        open_pulse = MagneticPulse(omega_mag, t_pi, coupling="dq")
        close_pulse = MagneticPulse(omega_mag, t_pi, phase=closing_phase,
                                    coupling="dq")
    return PulseSequence(
        segments=(Reset(weights), open_pulse, FreeEvolution(tau),
                  close_pulse, Readout()),
        frame_detuning=frame,
    )


def simulate_ramsey(kind: str, tau_grid, params: SystemParams,
                    config: SimConfig, *, omega_mag: float | None = None,
                    omega_rot: float = DEFAULT_OMEGA_ROT,
                    closing_phase: float = 0.0) -> Trace:
    """Monte-Carlo Ramsey trace: mean P0 +- stderr over n_shots per tau."""
    if kind not in RAMSEY_KINDS:
        raise ValueError(f"unknown Ramsey kind {kind!r}")
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(np.diff(tau_grid) <= 0):
        raise ValueError("tau_grid must be strictly ascending")
    if kind == "undressed_0m1":
        params = params.with_omega(0.0)
    elif params.omega <= 0:
        raise ValueError(f"kind {kind!r} requires a nonzero mechanical drive")
    if kind == "max_protection":
        params = params.with_delta(-abs(params.a_par))
    if omega_mag is None:
        omega_mag = DEFAULT_OMEGA_MAG_DQ if kind in ("dressed_mp", "max_protection") \
            else DEFAULT_OMEGA_MAG_SQ

    mean = np.empty_like(tau_grid)
    stderr = np.empty_like(tau_grid)
    for i, tau in enumerate(tau_grid):
        seq = _ramsey_sequence(kind, tau, params, config.carbon_weights,
                               omega_mag, omega_rot, closing_phase)
        db, dom, dt = _sample_block(config.noise, params.omega,
                                    config.seed, i, config.n_shots)
        p0 = _run_batch(seq, params, db, dom, dt)
        mean[i] = p0.mean()
        stderr[i] = p0.std(ddof=1) / math.sqrt(config.n_shots) \
            if config.n_shots > 1 else 0.0
    metadata = {
        "kind": kind,
        "abscissa_unit": "us",
        "seed": config.seed,
        "n_shots": config.n_shots,
        "omega_mag_khz": angular_to_khz(omega_mag),
        "omega_rot_khz": angular_to_khz(omega_rot),
        "omega_khz": angular_to_khz(params.omega),
        "delta_khz": angular_to_khz(params.delta),
        "a_par_khz": angular_to_khz(params.a_par),
    }
    return Trace(tau_grid, np.clip(mean, 0.0, 1.0), stderr,
                 config.n_shots, metadata)


def simulate_spectrum(detuning_grid, params: SystemParams, config: SimConfig,
                      *, omega_mag: float = 2.0 * math.pi * 0.080,
                      pulse_area: float = math.pi) -> Trace:
    """Spectroscopy scan: P0 versus magnetic drive detuning.

    detuning_grid is angular (rad/us), measured from the nominal undressed
    0<->-1 line; the returned Trace abscissa is in kHz.
    """
    detuning_grid = np.asarray(detuning_grid, dtype=float)
    if np.any(np.diff(detuning_grid) <= 0):
        raise ValueError("detuning grid must be strictly ascending")
    duration = pulse_area / omega_mag
    mean = np.empty_like(detuning_grid)
    stderr = np.empty_like(detuning_grid)
    for i, det_axis in enumerate(detuning_grid):
        drive = det_axis - 0.5 * params.delta
        seq = PulseSequence(
            segments=(Reset(config.carbon_weights),
                      MagneticPulse(omega_mag, duration, coupling="sq"),
                      Readout()),
            frame_detuning=drive,
        )
        db, dom, dt = _sample_block(config.noise, params.omega,
                                    config.seed, i, config.n_shots)
        p0 = _run_batch(seq, params, db, dom, dt)
        mean[i] = p0.mean()
        stderr[i] = p0.std(ddof=1) / math.sqrt(config.n_shots) \
            if config.n_shots > 1 else 0.0
    offsets = dressed_transition_offsets(params.omega, params.delta)
    metadata = {
        "kind": "spectrum",
        "abscissa_unit": "khz",
        "seed": config.seed,
        "n_shots": config.n_shots,
        "omega_mag_khz": angular_to_khz(omega_mag),
        "omega_khz": angular_to_khz(params.omega),
        "delta_khz": angular_to_khz(params.delta),
        "a_par_khz": angular_to_khz(params.a_par),
        "expected_dips_khz": [angular_to_khz(o) for o in offsets],
    }
    return Trace(np.array([angular_to_khz(w) for w in detuning_grid]),
                 np.clip(mean, 0.0, 1.0), stderr, config.n_shots, metadata)


def fourier_magnitude(trace: Trace) -> tuple[np.ndarray, np.ndarray]:
    """DFT magnitude of the mean-subtracted signal; frequency axis in kHz.

    Requires a uniform tau grid (in us).
    """
    tau = trace.abscissa
    if len(tau) < 2:
        raise ValueError("need at least two points")
    steps = np.diff(tau)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-12):
        raise ValueError("fourier_magnitude requires a uniform grid")
    signal = trace.mean_p0 - trace.mean_p0.mean()
    mag = np.abs(np.fft.rfft(signal))
    freq_khz = np.fft.rfftfreq(len(tau), d=steps[0]) * 1e3
    return freq_khz, mag


def write_trace_csv(trace: Trace, path) -> None:
    """CSV body plus a JSON metadata sidecar at <path>.meta.json."""
    lines = ["abscissa,mean_p0,stderr,n_shots"]
    for x, m, s in zip(trace.abscissa, trace.mean_p0, trace.stderr):
        lines.append(f"{float(x)!r},{float(m)!r},{float(s)!r},{trace.n_shots}")
    path = str(path)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(path + ".meta.json", "w") as fh:
        json.dump(trace.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_trace_csv(path) -> Trace:
    """Re-ingest a trace CSV (and its sidecar, if present)."""
    path = str(path)
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "abscissa,mean_p0,stderr,n_shots":
        raise ValueError(f"{path}:1: expected header "
                         "'abscissa,mean_p0,stderr,n_shots'")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            rows.append(tuple(float(p) for p in parts))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    metadata = {}
    try:
        with open(path + ".meta.json") as fh:
            metadata = json.load(fh)
    except FileNotFoundError:
        pass
    arr = np.array(rows)
    return Trace(arr[:, 0], arr[:, 1], arr[:, 2], int(arr[0, 3]), metadata)
