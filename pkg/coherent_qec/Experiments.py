# coherent_qec/Experiments.py

import itertools
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from coherent_qec.Analysis.EffectiveError import (PEFF_SLOPE_INCOHERENT, coherence_alpha, estimate_peff,
                                                  fit_peff_slope)
from coherent_qec.Analysis.ThresholdFit import ansatz_threshold, decay_prediction, decay_rate, fit_threshold
from coherent_qec.Chronicle.ResultWriter import ResultWriter, read_sweep
from coherent_qec.Config import ExperimentConfig, RunSettings, config_hash
from coherent_qec.Decoder.MatchingDecoder import decode
from coherent_qec.Errors import FitDiverged, InvalidArgument
from coherent_qec.Fermion.GaussianState import UpdatePath, apply_fgo, make_ghz_plus
from coherent_qec.Fermion.KrausCatalog import NoiseModel
from coherent_qec.Repetition.CircuitSchedule import CircuitConfig, NoiseAllocation, build_schedule
from coherent_qec.Repetition.TrajectorySampler import SamplerOptions, estimate_logical_error, sample_trajectory
from coherent_qec.Runtime.Seeding import point_seed, sample_rng
from coherent_qec.Runtime.WorkerPool import WorkerPool
from coherent_qec.Surface.SurfaceSimulator import SurfaceConfig, SurfaceNoise, run_and_reconstruct

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ["model", "c", "p", "n", "T", "samples", "p_L", "stderr", "degenerate", "degenerate_exceeded"]
PEFF_COLUMNS = ["c", "p", "n", "T", "x", "y", "samples", "p_eff", "stderr", "degenerate", "degenerate_exceeded"]
DECAY_COLUMNS = ["model", "c", "p", "d", "p_L_d", "p_L_d2", "lambda", "lambda_stderr", "prediction"]


@dataclass
class ExperimentContext:
    """Everything a command needs besides its own config section."""

    config: ExperimentConfig
    settings: RunSettings
    out: Path
    progress: bool = True

    @property
    def seed(self) -> int:
        return self.config.seed

    def pool(self, workers: Optional[int] = None) -> WorkerPool:
        return WorkerPool(workers=workers or self.config.workers, chunk_size=self.settings.chunk_size,
                          progress=self.progress and self.settings.progress, max_attempts=self.settings.max_attempts)

    def sampler_options(self, path: UpdatePath = UpdatePath.FAST) -> SamplerOptions:
        return SamplerOptions(path=path, purify_tolerance=self.settings.purify_tolerance,
                              purify_interval=self.settings.purify_interval)

    def writer(self) -> ResultWriter:
        return ResultWriter(self.out, config_hash(self.config), self.seed)


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{suffix}")


def run_sweep(ctx: ExperimentContext) -> pd.DataFrame:
    """p_L over the (model, c, p, n) grid; point k is seeded with point_seed(seed, k)."""
    sweep = ctx.config.section("sweep")
    pool = ctx.pool()
    options = ctx.sampler_options()
    rows: List[Dict[str, Any]] = []
    grid = itertools.product(sweep.models, sweep.c_values, sweep.p_values, sweep.n_values)
    for point, (model, c, p, n) in enumerate(grid):
        noise = NoiseModel(p=p, c=c, two_qubit_weights=sweep.two_qubit_weights)
        config = CircuitConfig(model=model, n=n, T=sweep.T, noise=noise, decoder_weighting=sweep.decoder_weighting)
        estimate = estimate_logical_error(config, sweep.samples, point_seed(ctx.seed, point), options=options, pool=pool)
        rows.append(dict(model=model.value, c=c, p=p, n=n, T=config.T, samples=estimate.samples, p_L=estimate.p_L,
                         stderr=estimate.stderr, degenerate=estimate.degenerate_count,
                         degenerate_exceeded=estimate.degenerate_exceeded))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def cmd_pl_sweep(ctx: ExperimentContext) -> Path:
    """CSV rows model,c,p,n,T,samples,p_L,stderr,degenerate,degenerate_exceeded,seed,config_hash."""
    frame = run_sweep(ctx)
    return ctx.writer().write_csv(frame.to_dict("records"), SWEEP_COLUMNS)


def fit_groups(frame: pd.DataFrame, window: float, bootstrap: int) -> List[Dict[str, Any]]:
    """One threshold fit per (model, c) group, with the coherence ansatz where c = 0 is present."""
    reports: List[Dict[str, Any]] = []
    for (model, c), group in frame.groupby(["model", "c"], sort=True):
        entry: Dict[str, Any] = dict(model=model, c=float(c), window=window)
        try:
            fit = fit_threshold(group[["p", "n", "p_L", "stderr"]], window=window, bootstrap=bootstrap)
        except FitDiverged as e:
            log.error(f"Threshold fit for model={model} c={c} diverged: {e}")
            entry.update(error=str(e), diagnostics={k: str(v) for k, v in e.diagnostics.items()})
            reports.append(entry)
            continue
        entry.update(p_th=fit.p_th, p_th_err=fit.p_th_err, p_th_err_curvature=fit.p_th_err_curvature,
                     p_th_err_bootstrap=fit.p_th_err_bootstrap, a=fit.a, b=fit.b, d=fit.d,
                     residual=fit.residual, rows_used=fit.rows_used)
        reports.append(entry)
    baseline = {r["model"]: r["p_th"] for r in reports if r["c"] == 0.0 and "p_th" in r}
    for r in reports:
        if r["model"] in baseline and "p_th" in r:
            r["ansatz_p_th"] = ansatz_threshold(baseline[r["model"]], r["c"])
            r["ansatz_relative_deviation"] = (r["p_th"] - r["ansatz_p_th"]) / r["ansatz_p_th"]
    return reports


def cmd_threshold(ctx: ExperimentContext, sweep_csv: Optional[Path] = None) -> Path:
    """
    JSON report {fits: [{model,c,p_th,p_th_err,a,b,d,residual,window,...}]}. The
    sweep is run unless `sweep_csv` supplies one; its rows are also written next to the report.
    """
    section = ctx.config.threshold
    window = section.window if section and section.window else ctx.settings.fit_window
    bootstrap = section.bootstrap if section and section.bootstrap is not None else ctx.settings.bootstrap
    writer = ctx.writer()
    if sweep_csv is not None:
        frame = read_sweep(sweep_csv)
    else:
        frame = run_sweep(ctx)
        writer.write_csv(frame.to_dict("records"), SWEEP_COLUMNS, _sibling(ctx.out, "sweep.csv"))
    fits = fit_groups(frame, window, bootstrap)
    target = writer.write_json({"fits": fits})
    failed = [f for f in fits if "error" in f]
    if failed:
        raise FitDiverged(f"{len(failed)} of {len(fits)} threshold fits diverged; see '{target}'.",
                          {"groups": [(f["model"], f["c"]) for f in failed]})
    return target


def cmd_peff(ctx: ExperimentContext) -> Path:
    """CSV rows c,p,n,T,x,y,samples,p_eff,stderr,degenerate,degenerate_exceeded; slopes per c in a sibling JSON."""
    section = ctx.config.section("peff")
    pool = ctx.pool()
    options = ctx.sampler_options()
    rows: List[Dict[str, Any]] = []
    for point, (c, p) in enumerate(itertools.product(section.c_values, section.p_values)):
        config = CircuitConfig(model=NoiseAllocation.CIRCUIT_BASED, n=section.n, T=section.T, noise=NoiseModel(p=p, c=c))
        estimate = estimate_peff(config, section.x, section.y, section.samples, point_seed(ctx.seed, point),
                                 options=options, pool=pool)
        rows.append(dict(c=c, p=p, n=section.n, T=section.T, x=section.x, y=section.y, samples=estimate.samples,
                         p_eff=estimate.p_eff, stderr=estimate.stderr, degenerate=estimate.degenerate_count,
                         degenerate_exceeded=estimate.degenerate_exceeded))
    writer = ctx.writer()
    target = writer.write_csv(rows, PEFF_COLUMNS)

    frame = pd.DataFrame(rows)
    slopes: Dict[str, Any] = {}
    for c, group in frame[frame["p"] > 0].groupby("c", sort=True):
        slope, stderr = fit_peff_slope(group[["p", "p_eff", "stderr"]].to_numpy())
        slopes[f"{c:g}"] = dict(c=float(c), slope=slope, stderr=stderr,
                                leading_order=PEFF_SLOPE_INCOHERENT * (1.0 + 11.0 / 6.0 * c * c))
    base = slopes.get("0")
    for key, entry in slopes.items():
        if base is not None and entry["c"] > 0:
            entry["alpha"] = coherence_alpha(base["slope"], entry["slope"], entry["c"])
    writer.write_json({"slopes": list(slopes.values())}, _sibling(ctx.out, "slopes.json"))
    return target


def cmd_decay(ctx: ExperimentContext) -> Path:
    """CSV rows model,c,p,d,p_L_d,p_L_d2,lambda,lambda_stderr,prediction for each d with d+2 in the grid."""
    section = ctx.config.section("decay")
    pool = ctx.pool()
    options = ctx.sampler_options()
    sizes = sorted(set(section.d_values))
    rows: List[Dict[str, Any]] = []
    point = 0
    for c, p in itertools.product(section.c_values, section.p_values):
        estimates = {}
        for d in sizes:
            config = CircuitConfig(model=section.model, n=d, noise=NoiseModel(p=p, c=c))
            estimates[d] = estimate_logical_error(config, section.samples, point_seed(ctx.seed, point),
                                                  options=options, pool=pool)
            point += 1
        for d in sizes:
            if d + 2 not in estimates:
                continue
            low, high = estimates[d], estimates[d + 2]
            try:
                lam = decay_rate(low.p_L, high.p_L)
                lam_err = lam * math.hypot(low.stderr / low.p_L, high.stderr / high.p_L)
            except InvalidArgument:
                log.warning(f"Decay rate undefined at c={c} p={p} d={d}: p_L is zero.")
                lam, lam_err = math.nan, math.nan
            prediction = decay_prediction(p, section.p_th) if section.p_th else math.nan
            rows.append(dict(model=section.model.value, c=c, p=p, d=d, p_L_d=low.p_L, p_L_d2=high.p_L,
                             **{"lambda": lam, "lambda_stderr": lam_err}, prediction=prediction))
    return ctx.writer().write_csv(rows, DECAY_COLUMNS)


def cmd_surface(ctx: ExperimentContext) -> Path:
    """JSON report {runs: [{p, F, F_stderr, rho_real, rho_imag, coefficients, samples, degenerate}]}."""
    section = ctx.config.section("surface")
    pool = ctx.pool()
    options = ctx.sampler_options()
    if section.p_values:
        points = [(p, SurfaceNoise.uniform(p, section.c)) for p in section.p_values]
    else:
        points = [(None, section.noise)]
    runs = []
    for k, (p, noise) in enumerate(points):
        config = SurfaceConfig(d=section.d, T=section.T, noise=noise, mode=section.mode)
        result = run_and_reconstruct(config, section.samples, point_seed(ctx.seed, k), options=options, pool=pool)
        runs.append(dict(p=p, d=config.d, T=config.T, mode=config.mode.value, noise=noise.model_dump(),
                         **result.model_dump()))
    return ctx.writer().write_json({"runs": runs})


def _time_samples(config: CircuitConfig, samples: int, seed: int, options: SamplerOptions) -> np.ndarray:
    times = np.empty(samples)
    for i in range(samples):
        rng = sample_rng(seed, i)
        start = time.perf_counter()
        traj = sample_trajectory(build_schedule(config, rng), rng, options)
        decode(traj.syndromes, config)
        times[i] = time.perf_counter() - start
    return times


def _time_updates(config: CircuitConfig, samples: int, seed: int) -> Dict[UpdatePath, float]:
    """Seconds per apply_fgo call on each path, replaying the same sampled descriptors."""
    totals = {UpdatePath.FAST: 0.0, UpdatePath.NAIVE: 0.0}
    calls = 0
    for i in range(samples):
        rng = sample_rng(seed, i)
        schedule = build_schedule(config, rng)
        m = schedule.n_modes
        ops = [spec.to_fgo(m) for spec in sample_trajectory(schedule, rng).outcomes]
        calls += len(ops)
        for path in totals:
            state = make_ghz_plus(m)
            start = time.perf_counter()
            for op in ops:
                state = apply_fgo(state, op, path)
            totals[path] += time.perf_counter() - start
    return {path: total / calls for path, total in totals.items()}


def cmd_bench(ctx: ExperimentContext) -> Path:
    """
    Per-sample sample_trajectory + decode time (mean, p50, p90, p99), the
    naive/fast ratio over the same seeds, the same ratio for the covariance
    update alone, and wall time per worker count.
    """
    section = ctx.config.section("bench")
    config = CircuitConfig(model=section.model, n=section.n, noise=NoiseModel(p=section.p, c=section.c))
    fast = _time_samples(config, section.samples, ctx.seed, ctx.sampler_options(UpdatePath.FAST))
    naive = _time_samples(config, section.samples, ctx.seed, ctx.sampler_options(UpdatePath.NAIVE))
    updates = _time_updates(config, section.samples, ctx.seed)
    scaling = []
    for workers in section.worker_counts:
        start = time.perf_counter()
        estimate_logical_error(config, section.samples, ctx.seed, options=ctx.sampler_options(),
                               pool=ctx.pool(workers))
        scaling.append(dict(workers=workers, wall_seconds=time.perf_counter() - start))
    report = dict(model=config.model.value, n=config.n, T=config.T, p=section.p, c=section.c, samples=section.samples,
                  mean_ms=1e3 * float(fast.mean()), p50_ms=1e3 * float(np.percentile(fast, 50)),
                  p90_ms=1e3 * float(np.percentile(fast, 90)), p99_ms=1e3 * float(np.percentile(fast, 99)),
                  naive_mean_ms=1e3 * float(naive.mean()), naive_over_fast=float(naive.sum() / fast.sum()),
                  update_fast_us=1e6 * updates[UpdatePath.FAST], update_naive_us=1e6 * updates[UpdatePath.NAIVE],
                  update_naive_over_fast=updates[UpdatePath.NAIVE] / updates[UpdatePath.FAST],
                  scaling=scaling)
    log.info(f"bench n={config.n}: {report['mean_ms']:.1f} ms/sample, naive/fast = {report['naive_over_fast']:.2f} "
             f"(update only {report['update_naive_over_fast']:.2f})")
    return ctx.writer().write_json(report)


COMMANDS = {
    "pl-sweep": cmd_pl_sweep,
    "threshold": cmd_threshold,
    "peff": cmd_peff,
    "decay": cmd_decay,
    "surface": cmd_surface,
    "bench": cmd_bench,
}
