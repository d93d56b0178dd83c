"""Command-line pipelines composing the simulator, analytics, and fitting.

Every command is driven by a JSON config (see configs/schema.json and the
nv1/nv2 examples) plus a few override flags; all frequencies in configs
and reports are ordinary kHz, converted to angular units at the boundary.
Outputs are plottable CSV artifacts plus text fit reports, deterministic
for a given (config, seed).

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from pathlib import Path

import click
import jsonschema
import numpy as np

from .dephasing import (
    FixedAmplitudeNoise,
    HorizonExceeded,
    NoiseSpec,
    RateBudget,
    ReflectometerNoise,
    ZeroRateError,
    envelope_max_protection,
    envelope_second_order,
    gaussian_envelope,
    predicted_t2_mp,
    rate_amplitude_mp,
    rate_magnetic_mp,
    sigma_b_from_t2,
)
from .fitting import FitOptions, format_fit_report, nlls_fit
from .models import (
    guess_envelope_t2_us,
    guess_ramsey_frequency_khz,
    model_max_protection,
    model_ramsey_0p,
    model_ramsey_mp,
    model_spectrum_joint,
    model_undressed_ramsey,
    stack_spectra,
)
from .presets import PRESETS
from .pulse_sim import (
    RAMSEY_KINDS,
    SimConfig,
    Trace,
    fourier_magnitude,
    read_trace_csv,
    simulate_ramsey,
    simulate_spectrum,
    write_trace_csv,
)
from .spin_model import SystemParams, mechanical_cutoff
from .units import GAMMA, DD_DT, angular_to_khz, khz_to_angular, mhz_to_angular

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_AMPLITUDE_SCHEMA = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["fixed", "reflectometer"]},
        "sigma_omega_khz": {"type": "number", "minimum": 0},
        "eta": {"type": "number", "minimum": 0},
        "alpha_khz": {"type": "number"},
    },
    "required": ["mode"],
    "additionalProperties": False,
}

_GRID_KEYS = {
    "tau_start_us": {"type": "number", "minimum": 0},
    "tau_stop_us": {"type": "number", "exclusiveMinimum": 0},
    "tau_step_us": {"type": "number", "exclusiveMinimum": 0},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nvcdd scenario config",
    "type": "object",
    "properties": {
        "preset": {"enum": sorted(PRESETS)},
        "out_dir": {"type": "string"},
        "system": {
            "type": "object",
            "properties": {
                "omega_khz": {"type": "number", "minimum": 0},
                "delta_khz": {"type": "number"},
                "a_par_khz": {"type": "number", "minimum": 0},
                "omega_mech_mhz": {"type": "number", "exclusiveMinimum": 0},
                "q_factor": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "noise": {
            "type": "object",
            "properties": {
                "sigma_b_mg": {"type": "number", "minimum": 0},
                "gamma_sigma_b_khz": {"type": "number", "minimum": 0},
                "t2_0m1_us": {"type": "number", "exclusiveMinimum": 0},
                "sigma_t_c": {"type": "number", "minimum": 0},
                "amplitude": _AMPLITUDE_SCHEMA,
            },
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "shots": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "ramsey": {
            "type": "object",
            "properties": {
                "kind": {"enum": list(RAMSEY_KINDS)},
                **_GRID_KEYS,
                "omega_mag_khz": {"type": "number", "exclusiveMinimum": 0},
                "omega_rot_khz": {"type": "number"},
                "closing_phase_rad": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "spectra": {
            "type": "object",
            "properties": {
                "omega_list_khz": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                },
                "detuning_start_khz": {"type": "number"},
                "detuning_stop_khz": {"type": "number"},
                "detuning_step_khz": {"type": "number", "exclusiveMinimum": 0},
                "omega_mag_khz": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "t2scan": {
            "type": "object",
            "properties": {
                "omega_list_khz": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                },
                "power_leveled": {"type": "boolean"},
                "mc": {"type": "boolean"},
                **_GRID_KEYS,
            },
            "additionalProperties": False,
        },
        "envelope": {
            "type": "object",
            "properties": _GRID_KEYS,
            "additionalProperties": False,
        },
        "fit": {
            "type": "object",
            "properties": {
                "model": {
                    "enum": [
                        "undressed_ramsey",
                        "ramsey_0p",
                        "ramsey_mp",
                        "max_protection",
                        "spectrum_joint",
                    ]
                },
                "input_csv": {"type": "string"},
                "undressed_csv": {"type": "string"},
                "p0_ud": {"type": "number", "exclusiveMinimum": 0},
                "use_stderr_weights": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(Exception):
    pass


def load_config(path) -> dict:
    """Read and schema-validate a JSON scenario config."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config key {exc.json_path}: {exc.message}") from exc


def resolve_config(cfg: dict) -> dict:
    """Fill preset defaults and convert units; returns plain runtime values.

    Resulting dict holds a SystemParams factory input (angular units), a
    NoiseSpec, shot/seed counts, and the raw per-command sections.
    """
    preset = PRESETS.get(cfg.get("preset", "nv2"))
    if preset is None:
        raise ConfigError(f"unknown preset {cfg.get('preset')!r}")
    system = {**cfg.get("system", {})}
    omega_khz = system.get("omega_khz", preset["default_omega_khz"])
    delta_khz = system.get("delta_khz", 0.0)
    a_par_khz = system.get("a_par_khz", preset["a_par_khz"])
    omega_mech_mhz = system.get("omega_mech_mhz", preset["omega_mech_mhz"])
    q_factor = system.get("q_factor", preset["q_factor"])

    noise_cfg = cfg.get("noise", {})
    if "sigma_b_mg" in noise_cfg:
        sigma_b = noise_cfg["sigma_b_mg"]
    elif "gamma_sigma_b_khz" in noise_cfg:
        sigma_b = khz_to_angular(noise_cfg["gamma_sigma_b_khz"]) / GAMMA
    elif "t2_0m1_us" in noise_cfg:
        sigma_b = sigma_b_from_t2(noise_cfg["t2_0m1_us"])
    elif preset["gamma_sigma_b_khz"] is not None:
        sigma_b = khz_to_angular(preset["gamma_sigma_b_khz"]) / GAMMA
    else:
        sigma_b = sigma_b_from_t2(preset["t2_0m1_us"])
    sigma_t = noise_cfg.get("sigma_t_c", preset["sigma_t_c"])
    amp_cfg = noise_cfg.get("amplitude", {"mode": "fixed", "sigma_omega_khz": 0.0})
    if amp_cfg["mode"] == "fixed":
        amplitude = FixedAmplitudeNoise(
            khz_to_angular(amp_cfg.get("sigma_omega_khz", 0.0)))
    else:
        if "eta" not in amp_cfg or "alpha_khz" not in amp_cfg:
            raise ConfigError(
                "config key $.noise.amplitude: reflectometer mode needs "
                "'eta' and 'alpha_khz'")
        amplitude = ReflectometerNoise(
            eta=amp_cfg["eta"],
            alpha_diode=khz_to_angular(amp_cfg["alpha_khz"]))
    noise = NoiseSpec(sigma_b=sigma_b, sigma_t=sigma_t, amplitude_noise=amplitude)

    sim = cfg.get("sim", {})
    return {
        "omega": khz_to_angular(omega_khz),
        "delta": khz_to_angular(delta_khz),
        "a_par": khz_to_angular(a_par_khz),
        "omega_mech": mhz_to_angular(omega_mech_mhz),
        "q_factor": q_factor,
        "t2_0m1_us": noise_cfg.get("t2_0m1_us", preset["t2_0m1_us"]),
        "noise": noise,
        "shots": sim.get("shots", 1000),
        "seed": sim.get("seed", 0),
        "out_dir": cfg.get("out_dir", "out"),
        "raw": cfg,
    }


def build_params(res: dict, *, omega=None, delta=None) -> SystemParams:
    return SystemParams.create(
        omega=res["omega"] if omega is None else omega,
        delta=res["delta"] if delta is None else delta,
        a_par=res["a_par"],
        omega_mech=res["omega_mech"],
        q_factor=res["q_factor"],
    )


def _tau_grid(section: dict, stop_default: float, step_default: float):
    start = section.get("tau_start_us", 0.0)
    stop = section.get("tau_stop_us", stop_default)
    step = section.get("tau_step_us", step_default)
    if stop <= start:
        raise ConfigError("tau_stop_us must exceed tau_start_us")
    return np.arange(start, stop + 0.5 * step, step)


def _mean_contrast(params: SystemParams) -> float:
    """Sublevel-averaged fringe contrast of the {m,p} qubit."""
    out = 0.0
    for s in (+1.0, -1.0):
        w = math.hypot(params.omega, params.delta + s * params.a_par)
        out += (params.omega / w) ** 2 if w else 1.0
    return 0.5 * out


def _write_rows(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(f"{v:.10g}" for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def pipeline(fn):
    """Map domain failures onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (HorizonExceeded, ZeroRateError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON scenario config; defaults to the nv2 preset.")
@click.option("--seed", type=int, default=None, help="Override RNG seed.")
@click.option("--shots", type=int, default=None, help="Override shots per point.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Override output directory.")
@click.pass_context
@pipeline
def main(ctx, config_path, seed, shots, out_dir):
    """Continuous-dynamical-decoupling simulation and analysis pipelines."""
    cfg = load_config(config_path) if config_path else {"preset": "nv2"}
    res = resolve_config(cfg)
    if seed is not None:
        res["seed"] = seed
    if shots is not None:
        res["shots"] = shots
    if out_dir is not None:
        res["out_dir"] = out_dir
    ctx.obj = res


def _out_dir(res: dict) -> Path:
    path = Path(res["out_dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sim_config(res: dict) -> SimConfig:
    return SimConfig(n_shots=res["shots"], seed=res["seed"], noise=res["noise"])


@main.command()
@click.pass_obj
@pipeline
def rates(res):
    """Print the dephasing-rate budget and predicted coherence times."""
    params = build_params(res)
    noise = res["noise"]
    sigma_omega = noise.sigma_omega(params.omega)
    gsb_khz = angular_to_khz(GAMMA * noise.sigma_b)
    thermal_t2 = math.sqrt(2.0) / (abs(DD_DT) * noise.sigma_t) \
        if noise.sigma_t else math.inf
    cutoff = mechanical_cutoff(params.omega_mech, params.q_factor)
    budget = RateBudget((
        ("magnetic", rate_magnetic_mp(params.omega, params.a_par, noise.sigma_b)),
        ("amplitude", rate_amplitude_mp(params.omega, params.a_par, sigma_omega)),
    ))
    t2_first = predicted_t2_mp(params.omega, params.a_par, noise.sigma_b,
                               sigma_omega, order="first")
    t2_second = predicted_t2_mp(params.omega, params.a_par, noise.sigma_b,
                                sigma_omega, order="second")
    lines = [
        f"omega/2pi           : {angular_to_khz(params.omega):10.2f} kHz",
        f"a_par/2pi           : {angular_to_khz(params.a_par):10.2f} kHz",
        f"gamma*sigma_b/2pi   : {gsb_khz:10.2f} kHz  (sigma_b = {noise.sigma_b:.2f} mG)",
        f"sigma_Omega/2pi     : {angular_to_khz(sigma_omega):10.2f} kHz",
        f"thermal-limit T2*   : {thermal_t2:10.2f} us  (sigma_T = {noise.sigma_t:.2f} C)",
        f"mech cutoff w_c/2pi : {angular_to_khz(cutoff):10.2f} kHz",
    ]
    for name, rate in budget.entries:
        lines.append(f"Gamma_{name:<13}: {rate:10.4f} rad/us")
    lines += [
        f"T2*_mp (first)      : {t2_first:10.2f} us",
        f"T2*_mp (second)     : {t2_second:10.2f} us",
    ]
    report = "\n".join(lines)
    click.echo(report)
    (_out_dir(res) / "rates.txt").write_text(report + "\n", encoding="utf-8")


@main.command()
@click.option("--omega-khz", "omega_list", type=float, multiple=True,
              help="Override the mechanical Rabi scan list.")
@click.option("--mc/--no-mc", "mc_flag", default=None,
              help="Toggle the Monte-Carlo simulate-and-fit column.")
@click.pass_obj
@pipeline
def t2scan(res, omega_list, mc_flag):
    """Scan T2* of the {m,p} qubit against the mechanical drive strength."""
    section = res["raw"].get("t2scan", {})
    omegas = list(omega_list) or section.get("omega_list_khz",
                                             [230.0, 348.0, 470.0, 581.0])
    if not omegas:
        raise ConfigError("t2scan omega list is empty")
    power_leveled = section.get("power_leveled", True)
    run_mc = section.get("mc", False) if mc_flag is None else mc_flag
    tau = _tau_grid(section, stop_default=25.0, step_default=0.1)
    noise = res["noise"]
    if power_leveled:
        noise = NoiseSpec(noise.sigma_b, noise.sigma_t, FixedAmplitudeNoise(0.0))
    rows = []
    for om_khz in omegas:
        omega = khz_to_angular(om_khz)
        sigma_omega = noise.sigma_omega(omega)
        t2_first = predicted_t2_mp(omega, res["a_par"], noise.sigma_b,
                                   sigma_omega, order="first")
        t2_second = predicted_t2_mp(omega, res["a_par"], noise.sigma_b,
                                    sigma_omega, order="second")
        t2_mc, mc_err = math.nan, math.nan
        if run_mc:
            params = build_params(res, omega=omega)
            cfg = SimConfig(n_shots=res["shots"], seed=res["seed"], noise=noise)
            trace = simulate_ramsey("dressed_mp", tau, params, cfg)
            outcome = _fit_ramsey_mp(trace, res, params)
            t2_mc = outcome.params["t2_us"]
            mc_err = outcome.ci_halfwidth("t2_us")
        rows.append((om_khz, t2_first, t2_second, t2_mc, mc_err))
    path = _out_dir(res) / "t2scan.csv"
    _write_rows(path, "omega_khz,t2_first_us,t2_second_us,t2_mc_us,mc_err_us",
                rows)
    click.echo(f"wrote {path}")


def _fit_ramsey_mp(trace: Trace, res: dict, params: SystemParams):
    model = model_ramsey_mp(angular_to_khz(res["a_par"]),
                            p0_ud=_mean_contrast(params))
    model = model.with_initials(
        omega_khz=max(
            math.sqrt(max(guess_ramsey_frequency_khz(trace) ** 2
                          - angular_to_khz(res["a_par"]) ** 2, 1.0)), 1.0),
        t2_us=guess_envelope_t2_us(trace),
        c=float(trace.mean_p0.mean()),
    )
    return nlls_fit(model, trace)


@main.command()
@click.option("--kind", type=click.Choice(RAMSEY_KINDS), default=None)
@click.option("--tau-stop-us", type=float, default=None)
@click.option("--tau-step-us", type=float, default=None)
@click.option("--omega-mag-khz", type=float, default=None)
@click.pass_obj
@pipeline
def ramsey(res, kind, tau_stop_us, tau_step_us, omega_mag_khz):
    """Simulate a Ramsey trace; writes the trace and its Fourier magnitude."""
    section = dict(res["raw"].get("ramsey", {}))
    if tau_stop_us is not None:
        section["tau_stop_us"] = tau_stop_us
    if tau_step_us is not None:
        section["tau_step_us"] = tau_step_us
    kind = kind or section.get("kind", "dressed_mp")
    tau = _tau_grid(section, stop_default=20.0, step_default=0.05)
    params = build_params(res)
    cfg = _sim_config(res)
    kwargs = {}
    om_mag_khz = omega_mag_khz if omega_mag_khz is not None \
        else section.get("omega_mag_khz")
    if om_mag_khz is not None:
        kwargs["omega_mag"] = khz_to_angular(om_mag_khz)
    if "omega_rot_khz" in section:
        kwargs["omega_rot"] = khz_to_angular(section["omega_rot_khz"])
    if "closing_phase_rad" in section:
        kwargs["closing_phase"] = section["closing_phase_rad"]
    trace = simulate_ramsey(kind, tau, params, cfg, **kwargs)
    out = _out_dir(res)
    trace_path = out / f"ramsey_{kind}.csv"
    write_trace_csv(trace, trace_path)
    freq, mag = fourier_magnitude(trace)
    _write_rows(out / f"ramsey_{kind}_fft.csv", "freq_khz,magnitude",
                zip(freq, mag))
    click.echo(f"wrote {trace_path}")


@main.command()
@click.option("--omega-khz", "omega_list", type=float, multiple=True,
              help="Override the drive list; 0 means undressed.")
@click.pass_obj
@pipeline
def spectra(res, omega_list):
    """Simulate pulsed spectra across a list of mechanical drive strengths."""
    section = res["raw"].get("spectra", {})
    omegas = list(omega_list) or section.get("omega_list_khz",
                                             [0.0, 230.0, 470.0, 670.0])
    if not omegas:
        raise ConfigError("spectra omega list is empty")
    start = section.get("detuning_start_khz", -600.0)
    stop = section.get("detuning_stop_khz", 600.0)
    step = section.get("detuning_step_khz", 4.0)
    if stop <= start:
        raise ConfigError("detuning_stop_khz must exceed detuning_start_khz")
    grid = khz_to_angular(np.arange(start, stop + 0.5 * step, step))
    kwargs = {}
    if "omega_mag_khz" in section:
        kwargs["omega_mag"] = khz_to_angular(section["omega_mag_khz"])
    cfg = _sim_config(res)
    out = _out_dir(res)
    for om_khz in omegas:
        params = build_params(res, omega=khz_to_angular(om_khz))
        trace = simulate_spectrum(grid, params, cfg, **kwargs)
        path = out / f"spectrum_omega{om_khz:g}khz.csv"
        write_trace_csv(trace, path)
        click.echo(f"wrote {path}")


@main.command()
@click.option("--tau-stop-us", type=float, default=None)
@click.pass_obj
@pipeline
def envelope(res, tau_stop_us):
    """Tabulate the analytic envelopes against their Gaussian references."""
    section = dict(res["raw"].get("envelope", {}))
    if tau_stop_us is not None:
        section["tau_stop_us"] = tau_stop_us
    tau = _tau_grid(section, stop_default=30.0, step_default=0.05)
    noise = res["noise"]
    f = envelope_second_order(tau, res["omega"], noise.sigma_b, res["a_par"])
    h = envelope_max_protection(tau, res["omega"], noise.sigma_b)
    t2_first = predicted_t2_mp(res["omega"], res["a_par"], noise.sigma_b,
                               order="first")
    g = gaussian_envelope(tau, t2_first)
    path = _out_dir(res) / "envelope.csv"
    _write_rows(path, "tau_us,second_order,max_protection,gaussian_first",
                zip(tau, f, h, g))
    click.echo(f"wrote {path}")


@main.command()
@click.option("--model", "model_name", default=None,
              type=click.Choice(["undressed_ramsey", "ramsey_0p", "ramsey_mp",
                                 "max_protection", "spectrum_joint"]))
@click.option("--input", "input_csv", type=click.Path(), default=None,
              help="Trace CSV to fit (dressed spectrum for spectrum_joint).")
@click.option("--undressed", "undressed_csv", type=click.Path(), default=None,
              help="Undressed spectrum CSV (spectrum_joint only).")
@click.pass_obj
@pipeline
def fit(res, model_name, input_csv, undressed_csv):
    """Fit a signal model to a trace CSV and write the report."""
    section = res["raw"].get("fit", {})
    model_name = model_name or section.get("model")
    input_csv = input_csv or section.get("input_csv")
    undressed_csv = undressed_csv or section.get("undressed_csv")
    if not model_name or not input_csv:
        raise ConfigError("fit needs a model name and an input CSV")
    trace = read_trace_csv(input_csv)
    a_par_khz = angular_to_khz(res["a_par"])
    options = FitOptions(
        use_stderr_weights=section.get("use_stderr_weights", False))
    params = build_params(res)

    if model_name == "spectrum_joint":
        if not undressed_csv:
            raise ConfigError("spectrum_joint needs an undressed CSV too")
        undressed = read_trace_csv(undressed_csv)
        x, y, n_dressed = stack_spectra(trace, undressed)
        model = model_spectrum_joint(n_dressed)
        from .models import guess_spectrum_dips_khz
        lo, hi = guess_spectrum_dips_khz(trace)
        model = model.with_initials(
            omega_khz=max(hi - lo, 10.0),
            delta_khz=0.0,
            w01_khz=float(undressed.abscissa[np.argmin(undressed.mean_p0)]),
            c_d=float(trace.mean_p0.max()),
            c_ud=float(undressed.mean_p0.max()),
            a_d1=float(trace.mean_p0.max() - trace.mean_p0.min()),
            a_d2=float(trace.mean_p0.max() - trace.mean_p0.min()),
            a_ud=float(undressed.mean_p0.max() - undressed.mean_p0.min()),
        )
        outcome = nlls_fit(model, (x, y), options)
    else:
        p0_ud = section.get("p0_ud", _mean_contrast(params))
        if model_name == "undressed_ramsey":
            model = model_undressed_ramsey().with_initials(
                c=float(trace.mean_p0.mean()),
                t2_us=guess_envelope_t2_us(trace))
        elif model_name == "ramsey_0p":
            model = model_ramsey_0p(a_par_khz).with_initials(
                c=float(trace.mean_p0.mean()),
                t2_us=guess_envelope_t2_us(trace))
        elif model_name == "ramsey_mp":
            model = model_ramsey_mp(a_par_khz, p0_ud).with_initials(
                c=float(trace.mean_p0.mean()),
                omega_khz=max(math.sqrt(max(
                    guess_ramsey_frequency_khz(trace) ** 2 - a_par_khz ** 2,
                    1.0)), 1.0),
                t2_us=guess_envelope_t2_us(trace))
        else:
            gsb_khz = angular_to_khz(GAMMA * res["noise"].sigma_b)
            model = model_max_protection(a_par_khz, gsb_khz, p0_ud) \
                .with_initials(
                    c=float(trace.mean_p0.mean()),
                    omega_khz=max(guess_ramsey_frequency_khz(trace), 10.0))
        outcome = nlls_fit(model, trace, options)

    report = format_fit_report(model, outcome)
    click.echo(report)
    path = _out_dir(res) / f"fit_{model_name}.txt"
    path.write_text(report + "\n", encoding="utf-8")
    if not outcome.converged:
        click.echo("fit did not converge", err=True)
        sys.exit(EXIT_NUMERICAL)


if __name__ == "__main__":
    main()
