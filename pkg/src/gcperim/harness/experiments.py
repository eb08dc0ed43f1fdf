"""Monte Carlo experiments. Each returns an :class:`ExperimentResult` holding
one summary row per cell plus the checks ``--assert`` enforces."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import inference
from ..constants import rate_f, surface_tension, variance_constant, z_quantile
from ..diagnostics import decompose
from ..geometry import Shape
from ..nonlocal_functional import NonlocalEstimate, nonlocal_perimeter
from ..sampling import make_cloud, spawn_trial_seed
from .config import ExperimentConfig
from .runner import map_trials, simulate_cuts
from .stats import (
    adjusted_skewness,
    binomial_se,
    fmean,
    ks_critical,
    ks_distance,
    loglog_slope,
    sample_variance,
    variance_standard_error,
)

__all__ = [
    "Check",
    "ExperimentResult",
    "EXPERIMENTS",
    "run_unbiasedness",
    "run_variance",
    "run_clt",
    "run_test_errors",
    "run_sharpness",
    "run_coverage",
    "run_moment_scaling",
    "run_decompose",
    "p_eps_for",
]

COMMON_COLUMNS = [
    "experiment",
    "cell",
    "n",
    "eps",
    "d",
    "regime",
    "f_value",
    "trials",
    "mean_gper",
    "se_gper",
    "var_gper",
    "var_se",
    "skewness",
    "ks_distance",
    "coverage",
    "rejection_rate",
    "zero_cut_fraction",
    "mean_edges",
    "p_eps",
    "p_eps_error",
    "sigma_per",
]
TRAILING_COLUMNS = ["seed", "config_hash"]
P_EPS_TOL = 1e-8
P_EPS_SAMPLES = 8_000_000


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentResult:
    experiment: str
    config: ExperimentConfig
    rows: list
    extra_columns: list
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    common: bool = True

    @property
    def columns(self) -> list:
        head = COMMON_COLUMNS if self.common else []
        return head + self.extra_columns + TRAILING_COLUMNS

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@lru_cache(maxsize=256)
def p_eps_for(shape: Shape, eps: float) -> NonlocalEstimate:
    """Exact mean of GPer for (shape, eps); memoised across cells and experiments."""
    return nonlocal_perimeter(shape, eps, tol=P_EPS_TOL, samples=P_EPS_SAMPLES, seed=0)


def _clt_scale(n: int, eps: float, d: int, per: float) -> float:
    return math.sqrt(n * eps / (4.0 * variance_constant(d) * per))


class _Cell:
    """Simulated cell: trial arrays plus the summary row shared by all experiments."""

    def __init__(self, cfg: ExperimentConfig, experiment: str, index: int, shape: Shape, n: int, eps: float):
        self.cfg, self.shape, self.n, self.eps, self.index = cfg, shape, n, eps, index
        self.d = shape.d
        self.seed = spawn_trial_seed(cfg.seed, index)
        self.edges, self.gper = simulate_cuts(shape, n, eps, self.seed, cfg.trials, cfg.workers)
        self.p = p_eps_for(shape, eps)
        self.per = shape.exact_perimeter
        self.rate = rate_f(n, eps, self.d)
        self.sigma = surface_tension(self.d)
        self.z = (
            _clt_scale(n, eps, self.d, self.per) * (self.gper - self.p.value)
            if self.per > 0
            else np.full(len(self.gper), math.nan)
        )
        trials = len(self.gper)
        self.row = {
            "experiment": experiment,
            "cell": index,
            "n": n,
            "eps": eps,
            "d": self.d,
            "regime": self.rate.regime,
            "f_value": self.rate.f_value,
            "trials": trials,
            "mean_gper": fmean(self.gper),
            "se_gper": math.sqrt(sample_variance(self.gper) / trials) if trials > 1 else math.nan,
            "var_gper": sample_variance(self.gper),
            "var_se": variance_standard_error(self.gper),
            "skewness": adjusted_skewness(self.gper),
            "ks_distance": ks_distance(self.z),
            "coverage": math.nan,
            "rejection_rate": math.nan,
            "zero_cut_fraction": float(np.count_nonzero(self.edges == 0)) / trials,
            "mean_edges": fmean(self.edges),
            "p_eps": self.p.value,
            "p_eps_error": self.p.error_bound,
            "sigma_per": self.sigma * self.per,
        }

    def finish(self, **extra) -> dict:
        row = dict(self.row)
        row.update(extra)
        row["seed"] = self.seed
        row["config_hash"] = self.cfg.config_hash
        return row


def _cells(cfg: ExperimentConfig, experiment: str, shape: Shape | None = None, offset: int = 0):
    shape = cfg.shape_obj if shape is None else shape
    for i, (n, eps) in enumerate(cfg.cells()):
        yield _Cell(cfg, experiment, offset + i, shape, n, eps)


def run_unbiasedness(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks = [], []
    for cell in _cells(cfg, "unbiasedness"):
        mean = cell.row["mean_gper"]
        diff = mean - cell.p.value
        if cell.per == 0:
            ok = mean == 0.0
            tol = 0.0
        else:
            tol = 3.0 * cell.row["se_gper"] + cell.p.error_bound
            ok = abs(diff) <= tol
        rows.append(cell.finish(mean_minus_p=diff, tolerance=tol))
        checks.append(Check(f"cell {cell.index} |mean - P_eps| <= 3 SE", ok, f"diff={diff:.4g} tol={tol:.4g}"))
    return ExperimentResult("unbiasedness", cfg, rows, ["mean_minus_p", "tolerance"], checks)


def _slope_checks(rows: list, x_key: str, y_key: str, label: str, target: float, tol: float, meta: dict, checks: list):
    for regime in ("dense", "sparse"):
        sel = [r for r in rows if r["regime"] == regime and r[y_key] > 0]
        if len(sel) < 3:
            continue
        slope = loglog_slope([r[x_key] for r in sel], [r[y_key] for r in sel])
        meta[f"{label}_slope_{regime}"] = slope
        checks.append(
            Check(f"{regime} {label} slope {target} +/- {tol}", abs(slope - target) <= tol, f"slope={slope:.4f}")
        )


def run_variance(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks, meta = [], [], {}
    interior = cfg.shape_obj.dist_to_domain_boundary > 0
    for cell in _cells(cfg, "variance"):
        var = cell.row["var_gper"]
        ratio = math.nan
        if cell.rate.regime == "dense" and cell.per > 0:
            ratio = var * cell.n * cell.eps / (4.0 * variance_constant(cell.d) * cell.per)
            if interior:
                checks.append(
                    Check(f"cell {cell.index} variance ratio in [0.85, 1.15]", 0.85 <= ratio <= 1.15, f"ratio={ratio:.4f}")
                )
        rows.append(cell.finish(sd_gper=math.sqrt(var), variance_ratio=ratio))
    _slope_checks(rows, "f_value", "sd_gper", "sd_vs_f", 1.0, 0.25, meta, checks)
    return ExperimentResult("variance", cfg, rows, ["sd_gper", "variance_ratio"], checks, meta)


def run_clt(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks = [], []
    for cell in _cells(cfg, "clt"):
        m = len(cell.z)
        z_mean = fmean(cell.z)
        z_skew = adjusted_skewness(cell.z)
        ks = cell.row["ks_distance"]
        crit = ks_critical(m, 0.01)
        rows.append(cell.finish(z_mean=z_mean, z_sd=math.sqrt(sample_variance(cell.z)), ks_critical=crit))
        if cell.rate.regime != "dense" or cell.per == 0:
            continue
        skew_bound = 0.2 * math.sqrt(2000.0 / m)
        checks.append(Check(f"cell {cell.index} KS < {crit:.4f}", ks < crit, f"ks={ks:.4f}"))
        checks.append(Check(f"cell {cell.index} |skewness| < {skew_bound:.3f}", abs(z_skew) < skew_bound, f"skew={z_skew:.4f}"))
        checks.append(Check(f"cell {cell.index} |standardised mean| <= 3/sqrt(m)", abs(z_mean) <= 3 / math.sqrt(m), f"mean={z_mean:.4f}"))
    return ExperimentResult("clt", cfg, rows, ["z_mean", "z_sd", "ks_critical"], checks)


def _rejections(cell: _Cell, rho: float, alpha: float) -> np.ndarray:
    # same decision rule as inference.hypothesis_test, vectorised over trials
    scale = math.sqrt(cell.n * cell.eps / (4.0 * variance_constant(cell.d) * rho))
    l_n = scale * (cell.gper - cell.sigma * rho)
    return l_n > z_quantile(alpha)


def run_test_errors(cfg: ExperimentConfig) -> ExperimentResult:
    null = cfg.shape_obj
    rho = cfg.rho if cfg.rho is not None else null.exact_perimeter
    alt = cfg.alt_shape_obj
    rows, checks, meta = [], [], {"rho": rho}
    n_cells = len(cfg.cells())
    alt_points = []
    for label, shape, offset in (("null", null, 0), ("alt", alt, n_cells)):
        if shape is None:
            continue
        for cell in _cells(cfg, "testerrors", shape, offset):
            rate = float(np.mean(_rejections(cell, rho, cfg.alpha)))
            rows.append(cell.finish(rejection_rate=rate, hypothesis=label, true_per=cell.per, rho=rho, n_eps=cell.n * cell.eps))
            m = len(cell.gper)
            if label == "null":
                bound = cfg.alpha + 2.0 * binomial_se(cfg.alpha, m)
                if cell.per <= rho:
                    checks.append(Check(f"cell {cell.index} type I <= {bound:.4f}", rate <= bound, f"rate={rate:.4f}"))
            else:
                alt_points.append((cell.n * cell.eps, 1.0 - rate))
                if cell.n * cell.eps >= 1e3 and cell.per >= 1.5 * rho:
                    checks.append(Check(f"cell {cell.index} power >= 0.9", rate >= 0.9, f"rate={rate:.4f}"))
    usable = [(x, y) for x, y in alt_points if 0 < y < 1]
    if len(usable) >= 2:
        meta["type2_slope_vs_neps"] = loglog_slope(*zip(*usable))
    return ExperimentResult("testerrors", cfg, rows, ["hypothesis", "true_per", "rho", "n_eps"], checks, meta)


def run_sharpness(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks = [], []
    fractions = []
    for cell in _cells(cfg, "sharpness"):
        m = len(cell.edges)
        predicted = cell.n * (cell.n - 1) * cell.eps ** (cell.d + 1) / 2.0 * cell.p.value
        predicted_err = cell.n * (cell.n - 1) * cell.eps ** (cell.d + 1) / 2.0 * cell.p.error_bound
        se = math.sqrt(sample_variance(cell.edges) / m) if m > 1 else math.nan
        gap = cell.row["mean_edges"] - predicted
        rows.append(cell.finish(predicted_edges=predicted, se_edges=se, n2_eps_d1=cell.n**2 * cell.eps ** (cell.d + 1)))
        fractions.append((cell.n, cell.row["zero_cut_fraction"]))
        ok = abs(gap) <= 3.0 * se + predicted_err if se > 0 else abs(gap) <= predicted_err + 1e-12
        checks.append(Check(f"cell {cell.index} E(e_n) within 3 SE", ok, f"mean={cell.row['mean_edges']:.4g} predicted={predicted:.4g}"))
    fractions.sort()
    if len(fractions) >= 2:
        increasing = all(b[1] > a[1] for a, b in zip(fractions, fractions[1:]))
        checks.append(Check("zero-cut fraction increases with n", increasing, " ".join(f"{f:.3f}" for _, f in fractions)))
    return ExperimentResult("sharpness", cfg, rows, ["predicted_edges", "se_edges", "n2_eps_d1"], checks)


def run_coverage(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks = [], []
    for cell in _cells(cfg, "coverage"):
        in_window = inference.in_clt_window(cell.n, cell.eps, cell.d)
        covered = {"true": [], "plugin": []}
        clamped = 0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", inference.WindowWarning)
            for g in cell.gper:
                est = inference.PerimeterEstimate(float(g), cell.n, cell.eps, cell.d)
                if cfg.width in ("true", "both"):
                    ci = inference.confidence_interval(est, cfg.alpha, cell.per)
                    covered["true"].append(cell.per in ci)
                    clamped += ci.clamped
                if cfg.width in ("plugin", "both"):
                    ci = inference.confidence_interval(est, cfg.alpha)
                    covered["plugin"].append(cell.per in ci)
        cov_true = float(np.mean(covered["true"])) if covered["true"] else math.nan
        cov_plug = float(np.mean(covered["plugin"])) if covered["plugin"] else math.nan
        primary = cov_true if covered["true"] else cov_plug
        rows.append(
            cell.finish(
                coverage=primary,
                coverage_true=cov_true,
                coverage_plugin=cov_plug,
                in_window=int(in_window),
                clamped_fraction=clamped / len(cell.gper),
            )
        )
        target = 1.0 - cfg.alpha
        checks.append(Check(f"cell {cell.index} coverage within 0.03 of {target:.2f}", abs(primary - target) <= 0.03, f"coverage={primary:.4f}"))
        if covered["true"] and covered["plugin"]:
            checks.append(
                Check(f"cell {cell.index} plug-in coverage within 0.03", abs(cov_plug - cov_true) <= 0.03, f"plugin={cov_plug:.4f}")
            )
    return ExperimentResult(
        "coverage", cfg, rows, ["coverage_true", "coverage_plugin", "in_window", "clamped_fraction"], checks
    )


def run_moment_scaling(cfg: ExperimentConfig) -> ExperimentResult:
    rows, checks, meta = [], [], {}
    orders = tuple(sorted(set(cfg.p)))
    for cell in _cells(cfg, "moments"):
        dev = np.abs(cell.gper - cell.row["mean_gper"])
        extra = {}
        for p in orders:
            moment = fmean(dev**p)
            extra[f"moment_{p}"] = moment
            extra[f"ratio_{p}"] = moment / cell.rate.f_value**p
        rows.append(cell.finish(**extra))
        if 1 in orders and 2 in orders:
            ok = extra["moment_1"] <= math.sqrt(extra["moment_2"]) * (1 + 1e-12)
            checks.append(Check(f"cell {cell.index} Jensen m1 <= sqrt(m2)", ok))
    for p in orders:
        for regime in ("dense", "sparse"):
            sel = [r for r in rows if r["regime"] == regime and r[f"ratio_{p}"] > 0]
            if len({r["n"] for r in sel}) < 2:
                continue
            slope = loglog_slope([r["n"] for r in sel], [r[f"ratio_{p}"] for r in sel])
            meta[f"ratio_{p}_slope_{regime}"] = slope
            checks.append(Check(f"p={p} {regime} ratio trend 0 +/- 0.25", abs(slope) <= 0.25, f"slope={slope:.4f}"))
    extra_cols = [f"{k}_{p}" for p in orders for k in ("moment", "ratio")]
    return ExperimentResult("moments", cfg, rows, extra_cols, checks, meta)


def run_decompose(cfg: ExperimentConfig) -> ExperimentResult:
    """Per-trial Hoeffding terms; one output row per trial."""
    shape = cfg.shape_obj
    rows, checks, meta = [], [], {}
    for index, (n, eps) in enumerate(cfg.cells()):
        cell_seed = spawn_trial_seed(cfg.seed, index)
        p_eps = p_eps_for(shape, eps).value

        def trial(t: int, n=n, eps=eps, cell_seed=cell_seed):
            seed = spawn_trial_seed(cell_seed, t)
            return seed, decompose(make_cloud(shape, n, seed), shape, eps, p_eps)

        results = map_trials(trial, cfg.trials, cfg.workers)
        worst = 0.0
        for t, (seed, terms) in enumerate(results):
            residual = terms.identity_residual
            worst = max(worst, abs(residual) / max(1.0, abs(terms.gper)))
            rows.append(
                {
                    "cell": index,
                    "trial": t,
                    "n": n,
                    "eps": eps,
                    "gper": terms.gper,
                    "p_eps": terms.p_eps,
                    "u1": terms.u1,
                    "u2": terms.u2,
                    "identity_residual": residual,
                    "seed": seed,
                    "config_hash": cfg.config_hash,
                }
            )
        if len(results) > 1:
            meta[f"cell{index}_var_2u1"] = sample_variance([2 * r[1].u1 for r in results])
            meta[f"cell{index}_var_u2"] = sample_variance([r[1].u2 for r in results])
        checks.append(Check(f"cell {index} identity residual <= 1e-10", worst <= 1e-10, f"worst={worst:.3g}"))
    cols = ["cell", "trial", "n", "eps", "gper", "p_eps", "u1", "u2", "identity_residual"]
    return ExperimentResult("decompose", cfg, rows, cols, checks, meta, common=False)


EXPERIMENTS = {
    "unbiasedness": run_unbiasedness,
    "variance": run_variance,
    "clt": run_clt,
    "testerrors": run_test_errors,
    "sharpness": run_sharpness,
    "coverage": run_coverage,
    "moments": run_moment_scaling,
    "decompose": run_decompose,
}
