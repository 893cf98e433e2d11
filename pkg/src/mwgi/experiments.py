"""Experiment drivers.  Each writes into ``<out>/<experiment>/`` and returns the files written.

All randomness derives from ``cfg.output.seed`` and ``cfg.noise.seeds``, so
re-running a driver with the same config reproduces its files byte for byte.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from .chaos import ChaoticPulseTrain
from .coherence import (
    coherence_report,
    correlation_profile,
    correlation_width,
    spatial_correlation_map,
)
from .config import ExperimentConfig
from .errors import DomainError, WidthUnresolvedError
from .forward import (
    SamplingPlan,
    add_noise,
    autocorrelate,
    build_measurement_set,
    detection_times,
    field_matrix,
    mean_offpeak,
    pulses_needed,
)
from .geometry import Scene, pixel_centers
from .io import (
    save_measurements,
    write_csv,
    write_matrix_csv,
    write_metadata,
    write_pgm,
)
from .reconstruction import Method, mse, solve_direct, solve_with_fallback

__all__ = [
    "mse_sweep",
    "received_signal",
    "run_coherence_report",
    "run_mse_sweep",
    "run_reconstruction_experiment",
    "run_sampling_experiment",
    "run_spatial_experiment",
]

log = logging.getLogger(__name__)


def _outdir(cfg: ExperimentConfig, out, name) -> Path:
    path = Path(cfg.output.directory if out is None else out) / name
    path.mkdir(parents=True, exist_ok=True)
    return path


def _plan(cfg: ExperimentConfig, scene: Scene) -> SamplingPlan:
    return SamplingPlan.from_rate(
        cfg.sampling.sampling_frequency_hz,
        cfg.n_detections(scene),
        cfg.signal.bandwidth_hz,
        cfg.sampling.min_strictness,
    )


def _trains(cfg, n_tx, times):
    carrier = cfg.signal.carrier()
    n_pulses = pulses_needed(times, carrier)
    if n_pulses > cfg.sampling.max_pulses:
        raise DomainError(f"signal needs {n_pulses} pulses, budget is {cfg.sampling.max_pulses}")
    return ChaoticPulseTrain.from_seed(
        cfg.output.seed, n_tx, n_pulses, carrier, cfg.signal.chip_interval, cfg.signal.map_coefficient
    )


def _export_sequences(cfg, trains, directory: Path):
    written = []
    for i, train in enumerate(trains):
        written.append(write_csv(directory / f"sequence_tx{i}.csv", train.chips[0][:, None], ["x"]))
    return written


def received_signal(cfg: ExperimentConfig, scene: Scene, times, trains=None):
    """Continuous received signal of ``scene`` evaluated at ``times``."""
    geometry = cfg.geometry.build()
    if trains is None:
        trains = _trains(cfg, geometry.n_tx, times)
    coef = scene.coefficients.ravel()
    lit = np.flatnonzero(coef)
    points = pixel_centers(scene)[lit]
    E = field_matrix(trains, geometry, points, times, cfg.geometry.spreading_loss)
    return cfg.geometry.rho * (E @ coef[lit])


def run_sampling_experiment(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Autocorrelation of the received signal at the GI rate and the Nyquist-style rate.

    Both rates use the same number of samples, starting once every echo has arrived.
    """
    directory = _outdir(cfg, out, "sampling")
    scene = cfg.scene.build()
    geometry = cfg.geometry.build()
    n = cfg.n_detections(scene)
    max_lag = cfg.sampling.max_lag
    start = detection_times(scene, geometry, _plan(cfg, scene))[0]
    rates = {
        "gi": cfg.sampling.sampling_frequency_hz,
        "nyquist": cfg.sampling.nyquist_frequency_hz,
    }
    horizon = start + n / min(rates.values())
    trains = _trains(cfg, geometry.n_tx, np.array([horizon]))
    written = []
    offpeak = {}
    for name, rate in rates.items():
        times = start + np.arange(n) / rate
        acf = autocorrelate(received_signal(cfg, scene, times, trains), max_lag)
        offpeak[name] = mean_offpeak(acf)
        lags = np.arange(max_lag + 1)
        written.append(write_csv(
            directory / f"autocorr_{name}.csv",
            np.column_stack([lags, lags / rate, acf]),
            ["lag", "lag_s", "correlation"],
        ))
    if cfg.output.export_sequences:
        written += _export_sequences(cfg, trains, directory)
    summary = {
        "gi_rate_hz": rates["gi"],
        "nyquist_rate_hz": rates["nyquist"],
        "samples": n,
        "max_lag": max_lag,
        "seed": cfg.output.seed,
        "mean_offpeak_gi": offpeak["gi"],
        "mean_offpeak_nyquist": offpeak["nyquist"],
        "gi_less_correlated": offpeak["gi"] < offpeak["nyquist"],
    }
    written.append(write_metadata(directory / "summary.txt", summary))
    return written


def _side_tag(b) -> str:
    return format(b, "g")


def run_spatial_experiment(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Spatial correlation maps and FWHM widths for each configured array side."""
    directory = _outdir(cfg, out, "spatial")
    scene = cfg.scene.build()
    grid = Scene.empty(scene.rows, scene.cols, scene.pixel_size, scene.origin)
    sp = cfg.spatial
    ref = (
        scene.rows // 2 if sp.reference_row is None else sp.reference_row,
        scene.cols // 2 if sp.reference_col is None else sp.reference_col,
    )
    carrier = cfg.signal.carrier()
    seeds = [cfg.output.seed + k for k in range(sp.n_seeds)]
    written = []
    table = []
    for b in sp.array_sides_m:
        geometry = cfg.geometry.build(side=b)
        widths = []
        for seed in seeds:
            corr = spatial_correlation_map(
                geometry, carrier, grid, ref, sp.n_detections, seed,
                1.0 / cfg.sampling.sampling_frequency_hz, cfg.signal.chip_interval,
                cfg.signal.map_coefficient, cfg.sampling.max_pulses,
            )
            try:
                widths.append(correlation_width(corr, grid.pixel_size, ref))
            except WidthUnresolvedError:
                log.info("b=%g seed=%d: correlation width unresolved on this grid", b, seed)
                widths.append(math.nan)
            if seed == seeds[0]:
                tag = _side_tag(b)
                written.append(write_matrix_csv(directory / f"corr_b{tag}.csv", corr))
                written.append(write_pgm(directory / f"corr_b{tag}.pgm", corr, vmax=1.0))
                written.append(write_csv(
                    directory / f"profile_b{tag}.csv",
                    correlation_profile(corr, grid.pixel_size, ref),
                    ["position_m", "correlation"],
                ))
        rep = coherence_report(carrier, cfg.geometry.standoff_m, b)
        median = math.nan if np.all(np.isnan(widths)) else float(np.nanmedian(widths))
        table.append([b, rep.dc_lower, rep.dc_upper, median, *widths])
    header = ["array_side_m", "dc_lower_m", "dc_upper_m", "median_width_m"] + [f"width_seed{s}_m" for s in seeds]
    written.append(write_csv(directory / "widths.csv", table, header))

    order = np.argsort([row[0] for row in table])
    per_seed = np.array([table[i][4:] for i in order])
    decreasing = np.all(np.diff(per_seed, axis=0) < 0, axis=0) if len(order) > 1 else np.ones(len(seeds), bool)
    summary = {
        "array_sides_m": ",".join(_side_tag(b) for b in sp.array_sides_m),
        "detections": sp.n_detections,
        "seeds": len(seeds),
        "reference_pixel": f"{ref[0]},{ref[1]}",
        "seeds_strictly_decreasing": int(decreasing.sum()),
        "majority_decreasing": bool(decreasing.sum() * 2 > len(seeds)),
    }
    for row in table:
        tag = _side_tag(row[0])
        summary[f"median_width_b{tag}_m"] = row[3]
        summary[f"band_b{tag}_m"] = f"{row[1]:.6g}..{row[2]:.6g}"
    written.append(write_metadata(directory / "summary.txt", summary))
    return written


def _solve(cfg: ExperimentConfig, ms):
    method = Method(cfg.solver.method)
    if method is Method.DIRECT and not cfg.solver.fallback:
        return solve_direct(ms, cfg.solver.condition_ceiling)
    return solve_with_fallback(ms, method, cfg.solver.gp(), cfg.solver.condition_ceiling)


def _measurements(cfg: ExperimentConfig):
    scene = cfg.scene.build()
    geometry = cfg.geometry.build()
    ms = build_measurement_set(
        scene, geometry, cfg.signal.carrier(), _plan(cfg, scene), cfg.output.seed,
        rho=cfg.geometry.rho, chip_interval=cfg.signal.chip_interval,
        a=cfg.signal.map_coefficient, max_pulses=cfg.sampling.max_pulses,
        spreading_loss=cfg.geometry.spreading_loss,
    )
    return scene, ms


def _snr_tag(snr) -> str:
    return "noiseless" if snr is None else f"snr{format(snr, 'g')}"


def run_reconstruction_experiment(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Reconstruct the scene once per configured SNR (plus noiseless) and score each run."""
    directory = _outdir(cfg, out, "reconstruct")
    scene, ms = _measurements(cfg)
    written = [
        write_matrix_csv(directory / "truth.csv", scene.coefficients),
        write_pgm(directory / "truth.pgm", scene.coefficients),
    ]
    if cfg.output.export_measurements:
        written += save_measurements(ms, directory)
    levels = ([None] if cfg.noise.include_noiseless else []) + list(cfg.noise.snr_db)
    noise_seed = cfg.noise.seeds[0]
    rows = []
    summary = {"seed": cfg.output.seed, "noise_seed": noise_seed, "method": cfg.solver.method}
    for snr in levels:
        data = ms if snr is None else add_noise(ms, snr, noise_seed)
        result = _solve(cfg, data)
        err = mse(result.coefficients, scene.coefficients)
        tag = _snr_tag(snr)
        written.append(write_matrix_csv(directory / f"estimate_{tag}.csv", result.coefficients))
        written.append(write_pgm(directory / f"estimate_{tag}.pgm", result.coefficients))
        written.append(write_metadata(directory / f"result_{tag}.txt", {
            "method": result.method.value,
            "fallback_from": result.fallback_from.value if result.fallback_from else "none",
            "iterations": result.iterations,
            "converged": result.converged,
            "residual_norm": result.residual_norm,
            "condition_estimate": "none" if result.condition_estimate is None else result.condition_estimate,
            "mse": err,
        }))
        rows.append([math.inf if snr is None else snr, err])
        summary[f"mse_{tag}"] = err
    written.append(write_csv(directory / "mse_vs_snr.csv", rows, ["snr_db", "mse"]))
    written.append(write_metadata(directory / "summary.txt", summary))
    return written


def mse_sweep(cfg: ExperimentConfig, ms, truth):
    """MSE for every (SNR, noise seed) pair, shape (len(snr_db), len(seeds))."""
    out = np.empty((len(cfg.noise.snr_db), len(cfg.noise.seeds)))
    for i, snr in enumerate(cfg.noise.snr_db):
        for j, seed in enumerate(cfg.noise.seeds):
            result = _solve(cfg, add_noise(ms, snr, seed))
            out[i, j] = mse(result.coefficients, truth)
    return out


def run_mse_sweep(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Mean reconstruction MSE across noise seeds for each SNR level."""
    directory = _outdir(cfg, out, "mse_sweep")
    scene, ms = _measurements(cfg)
    errs = mse_sweep(cfg, ms, scene.coefficients)
    snrs = np.array(cfg.noise.snr_db, dtype=float)
    means = errs.mean(axis=1)
    table = np.column_stack([snrs, means, errs.std(axis=1), errs])
    header = ["snr_db", "mean_mse", "std_mse"] + [f"mse_seed{s}" for s in cfg.noise.seeds]
    written = [write_csv(directory / "mse_sweep.csv", table, header)]
    order = np.argsort(snrs)
    sorted_means = means[order]
    summary = {
        "method": cfg.solver.method,
        "seed": cfg.output.seed,
        "noise_seeds": ",".join(str(s) for s in cfg.noise.seeds),
        "monotone_non_increasing": bool(np.all(np.diff(sorted_means) <= 0)),
        "ratio_high_to_low_snr": float(sorted_means[-1] / sorted_means[0]) if sorted_means[0] > 0 else math.nan,
    }
    for snr, m in zip(snrs, means):
        summary[f"mean_mse_snr{format(snr, 'g')}"] = float(m)
    written.append(write_metadata(directory / "summary.txt", summary))
    return written


def run_coherence_report(cfg: ExperimentConfig, out=None) -> list[Path]:
    """Coherence time, coherence-size bounds and sampling strictness for the config."""
    directory = _outdir(cfg, out, "coherence")
    carrier = cfg.signal.carrier()
    rep = coherence_report(carrier, cfg.geometry.standoff_m, cfg.geometry.array_side_m)
    spacing = 1.0 / cfg.sampling.sampling_frequency_hz
    summary = {
        "bandwidth_hz": carrier.bandwidth,
        "center_frequency_hz": carrier.center_frequency,
        "chirp_rate_hz_per_s": carrier.chirp_rate,
        "coherence_time_s": rep.coherence_time,
        "wavelength_m": rep.wavelength,
        "standoff_m": cfg.geometry.standoff_m,
        "array_side_m": cfg.geometry.array_side_m,
        "dc_lower_m": rep.dc_lower,
        "dc_upper_m": rep.dc_upper,
        "detection_interval_s": spacing,
        "strictness": spacing / rep.coherence_time,
        "nyquist_interval_s": 1.0 / cfg.sampling.nyquist_frequency_hz,
        "pixel_size_m": cfg.scene.pixel_size_m,
        "pixels_per_coherence_upper": rep.dc_upper / cfg.scene.pixel_size_m,
    }
    rows = []
    for b in cfg.spatial.array_sides_m:
        r = coherence_report(carrier, cfg.geometry.standoff_m, b)
        rows.append([b, r.dc_lower, r.dc_upper])
    written = [write_csv(directory / "coherence_bounds.csv", rows, ["array_side_m", "dc_lower_m", "dc_upper_m"])]
    written.append(write_metadata(directory / "summary.txt", summary))
    return written

