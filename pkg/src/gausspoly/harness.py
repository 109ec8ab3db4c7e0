"""Monte Carlo experiment campaigns at desk scale.

Each experiment kind draws replicate samples, computes a hull functional per
replicate, and reduces the raw values into a summary that is recomputable
from the raw table.  Replicates are independent work items keyed by
(master seed, kind, grid index, replicate); the reduction is order-fixed by
those keys, so the raw table is byte-identical regardless of how many worker
processes computed it.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.stats import norm

from . import bounds as _bounds
from . import cumulants as _cumulants
from . import functionals as _functionals
from . import hull as _hull
from . import rescale as _rescale
from . import sampler as _sampler
from .errors import (
    ConfigError,
    DegenerateInputError,
    GeneralPositionError,
    InsufficientDataError,
    InvalidParameterError,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "ExponentFit",
    "run_experiment",
    "ks_distance",
    "exponent_fit",
    "agreement_audit",
]

EXPERIMENT_KINDS = (
    "clt",
    "variance-exponent",
    "slln-path",
    "concentration",
    "moments",
    "mdp-curve",
    "agreement-audit",
    "identities",
)

_DEFAULT_Y_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass
class ExperimentConfig:
    """Validated description of one experiment campaign."""

    kind: str
    d: int
    lam_grid: list = field(default_factory=list)
    lam: float | None = None
    a: float | None = None
    k_min: int | None = None
    k_max: int | None = None
    xi: str = "f0"
    f: str = "one"
    replicates: int = 200
    master_seed: int = 0
    workers: int = 1
    tolerances: dict = field(default_factory=dict)
    y_grid: list = field(default_factory=lambda: list(_DEFAULT_Y_GRID))
    kmax: int = 4
    a_exponent: float | None = None
    synthetic_variance_exponent: float | None = None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"unknown experiment kind {self.kind!r}; "
                f"choose one of {', '.join(EXPERIMENT_KINDS)}")
        if int(self.replicates) < 2:
            raise ConfigError(
                f"replicate count must be >= 2, got {self.replicates}")
        self.replicates = int(self.replicates)
        self.d = int(self.d)
        if not self.lam_grid:
            if self.lam is not None:
                self.lam_grid = [float(self.lam)]
            elif self.a is not None and self.k_max is not None:
                k0 = 1 if self.k_min is None else int(self.k_min)
                self.lam_grid = [float(self.a) ** k
                                 for k in range(k0, int(self.k_max) + 1)]
            else:
                raise ConfigError(
                    "config must give lam, lam_grid, or (a, k_max)")
        self.lam_grid = [float(x) for x in self.lam_grid]
        for lam in self.lam_grid:
            # Inadmissible intensities are rejected before any sampling.
            _rescale.critical_radius(lam, self.d)
        if self.kind == "mdp-curve" and self.a_exponent is None:
            self.a_exponent = _bounds.mdp_theta(self.xi, self.d) / 2.0
        _bounds.weights(self.xi, self.d)  # validates the functional tag

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    columns: list
    raw: list                # list of dicts, one per raw row
    summary: dict
    config_hash: str
    master_seed: int

    def raw_values(self, column: str = "statistic_value") -> np.ndarray:
        return np.array([row[column] for row in self.raw], dtype=float)


def ks_distance(values) -> float:
    """Sup distance between the empirical CDF of ``values`` and Phi."""
    values = np.sort(np.asarray(values, dtype=float).ravel())
    n = values.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 values, got {n}")
    cdf = norm.cdf(values)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    ci_low: float
    ci_high: float


def exponent_fit(pairs, n_boot: int = 1000, seed: int = 0) -> ExponentFit:
    """Least-squares slope of log var against log log lambda, bootstrap CI."""
    pairs = [(float(l), float(v)) for l, v in pairs]
    if len(pairs) < 4:
        raise InsufficientDataError(
            f"need at least 4 grid points, got {len(pairs)}")
    for lam, var in pairs:
        if not var > 0:
            raise InvalidParameterError(
                f"variance must be positive, got {var} at lambda={lam:g}")
    x = np.log(np.log([l for l, _ in pairs]))
    y = np.log([v for _, v in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    rng = _sampler.substream((seed, 0xF17))
    n = len(pairs)
    slopes = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        while np.unique(x[idx]).size < 2:
            idx = rng.integers(0, n, size=n)
        slopes[b] = np.polyfit(x[idx], y[idx], 1)[0]
    lo, hi = np.percentile(slopes, [2.5, 97.5])
    return ExponentFit(float(slope), float(intercept), float(lo), float(hi))


def _vertex_index_set(points: np.ndarray) -> set:
    """Hull vertex indices, with an LP fallback for degenerate micro-samples."""
    n = points.shape[0]
    if n == 0:
        return set()
    try:
        p = _hull.convex_hull(points)
        return {int(i) for i in p.vertex_indices}
    except (DegenerateInputError, GeneralPositionError):
        return {i for i in range(n) if _hull.is_vertex_oracle(points, i)}


def agreement_audit(d: int, lam_grid, replicates: int, seed: int) -> list:
    """Per-lambda extreme-vs-vertex comparison.

    Returns dicts with the count of inclusion violations (extreme points that
    are not hull vertices, expected exactly zero) and the mean agreement rate
    |extreme intersect vertex| / |vertex| over replicates.
    """
    out = []
    for gi, lam in enumerate(lam_grid):
        _rescale.critical_radius(lam, d)
        violations = 0
        rates = []
        for rep in range(replicates):
            sample = _sampler.sample_poisson_gaussian(
                lam, d, (seed, 6, gi, rep))
            extreme = set(int(i) for i in _rescale.extreme_points(sample))
            vertices = _vertex_index_set(sample.points)
            violations += len(extreme - vertices)
            rates.append(len(extreme & vertices) / len(vertices)
                         if vertices else 1.0)
        out.append({
            "lam": float(lam),
            "violations": violations,
            "agreement_rate": float(np.mean(rates)) if rates else 1.0,
        })
    return out


_KIND_ID = {kind: i for i, kind in enumerate(EXPERIMENT_KINDS)}


def _statistic_row(cfg: ExperimentConfig, lam: float, seed_path) -> dict:
    """One replicate: sample, hull, functional pairing.

    Rows with too few points for a full-dimensional hull carry NaNs; at the
    admissible intensities this is a vanishing-probability corner.
    """
    sample = _sampler.sample_poisson_gaussian(lam, cfg.d, seed_path)
    row = {"lambda": float(lam), "n_points": sample.count}
    try:
        p = _hull.convex_hull(sample.points)
    except (DegenerateInputError, GeneralPositionError):
        for j in range(cfg.d):
            row[f"f{j}"] = float("nan")
        row["vol"] = 0.0
        row["statistic_value"] = float("nan")
        return row
    fv = _hull.f_vector(p)
    for j in range(cfg.d):
        row[f"f{j}"] = float(fv[j])
    row["vol"] = _hull.polytope_volume(p)
    r = _rescale.critical_radius(lam, cfg.d)
    if cfg.xi in ("V", "volume"):
        rng = _sampler.substream(tuple(seed_path) + (0xA,))
        atoms = _functionals.xi_volume(sample, p, rng=rng)
    else:
        atoms = _functionals.xi_face(sample, p, int(cfg.xi[1:]))
    if cfg.f == "one" or not atoms.per_vertex_available:
        value = float(atoms.total_mass())
    else:
        fn = _functionals.test_function_library(cfg.d)[cfg.f]
        value = _functionals.pair(atoms, fn, r)
    row["statistic_value"] = value
    return row


def _synthetic_row(cfg: ExperimentConfig, gi: int, lam: float) -> list:
    """Variance-injection self-test: replicate values whose sample variance
    equals (log lam)^g exactly, bypassing all geometry."""
    g = cfg.synthetic_variance_exponent
    rng = _sampler.substream((cfg.master_seed, _KIND_ID[cfg.kind], gi))
    z = rng.standard_normal(cfg.replicates)
    z = (z - z.mean()) / z.std(ddof=1) * math.sqrt(math.log(lam) ** g)
    return [
        {"lambda": float(lam), "n_points": 0, "vol": float("nan"),
         "statistic_value": float(v),
         **{f"f{j}": float("nan") for j in range(cfg.d)}}
        for v in z
    ]


def _slln_rows(cfg: ExperimentConfig, arm: int, rep: int) -> list:
    """One coupled trajectory (arm 0 = main, arm 1 = pilot for centering)."""
    base_seed = (cfg.master_seed, _KIND_ID[cfg.kind], arm, rep)
    grid = cfg.lam_grid
    path = _sampler.sample_poisson_gaussian(grid[0], cfg.d, base_seed + (0,))
    for k, lam in enumerate(grid[1:], start=1):
        path = _sampler.extend_sample(path, lam, base_seed + (k,))
    rows = []
    for k, lam in enumerate(grid):
        sample = path if isinstance(path, _sampler.GaussianSample) \
            else path.sample_at(k)
        try:
            vol = _hull.polytope_volume(_hull.convex_hull(sample.points))
        except (DegenerateInputError, GeneralPositionError):
            vol = 0.0
        r = _rescale.critical_radius(lam, cfg.d)
        norm_vol = vol / (_hull.unit_ball_volume(cfg.d) * r ** cfg.d)
        rows.append({"lambda": float(lam), "level": k, "arm": arm,
                     "n_points": sample.count, "vol": vol,
                     "statistic_value": norm_vol})
    return rows


def _identity_row(cfg: ExperimentConfig, lam: float, seed_path) -> dict:
    """Batched exact-identity checks on one replicate."""
    d = cfg.d
    sample = _sampler.sample_poisson_gaussian(lam, d, seed_path)
    p = _hull.convex_hull(sample.points)
    r = _rescale.critical_radius(lam, d)
    ball_vol = _hull.unit_ball_volume(d) * r ** d
    vol = _hull.polytope_volume(p)
    rng = _sampler.substream(tuple(seed_path) + (0xA,))
    atoms = _functionals.xi_volume(sample, p, rng=rng)
    defect_residual = abs(sum(atoms.weights) / r - (ball_vol - vol)) \
        if atoms.per_vertex_available else abs(atoms.total / r - (ball_vol - vol))
    fv = _hull.f_vector(p)
    face_sum_exact = all(
        _functionals.xi_face(sample, p, j).total == fv[j] for j in range(d))
    euler = sum((-1) ** j * fv[j] for j in range(d))
    euler_exact = euler == 1 + (-1) ** (d - 1)

    aux = _sampler.substream(tuple(seed_path) + (0xB,))
    u = aux.standard_normal(d)
    u /= np.linalg.norm(u)
    h = float(aux.uniform(-5.0, r * r))
    left, right = _rescale.radius_identity_sides(u, h, lam, d)
    radius_rel = abs(left - right) / max(abs(left), abs(right))
    x = aux.standard_normal(d)
    back = _rescale.unscale_point(_rescale.scale_point(x, lam))
    roundtrip = float(np.linalg.norm(back - x) / max(np.linalg.norm(x), 1.0))
    return {
        "lambda": float(lam), "n_points": sample.count, "vol": vol,
        **{f"f{j}": float(fv[j]) for j in range(d)},
        "defect_residual": float(defect_residual),
        "face_sum_exact": int(face_sum_exact),
        "euler_exact": int(euler_exact),
        "radius_identity_relerr": float(radius_rel),
        "roundtrip_relerr": roundtrip,
        "statistic_value": float(defect_residual),
    }


def _run_task(args):
    cfg, gi, rep = args
    seed_path = (cfg.master_seed, _KIND_ID[cfg.kind], gi, rep)
    if cfg.kind == "identities":
        return gi, rep, [_identity_row(cfg, cfg.lam_grid[gi], seed_path)]
    if cfg.kind == "slln-path":
        return gi, rep, _slln_rows(cfg, gi, rep)
    if cfg.kind == "agreement-audit":
        lam = cfg.lam_grid[gi]
        sample = _sampler.sample_poisson_gaussian(lam, cfg.d, seed_path)
        extreme = set(int(i) for i in _rescale.extreme_points(sample))
        vertices = _vertex_index_set(sample.points)
        return gi, rep, [{
            "lambda": float(lam), "n_points": sample.count,
            "violations": len(extreme - vertices),
            "agreement_rate": (len(extreme & vertices) / len(vertices)
                               if vertices else 1.0),
            "statistic_value": float(len(extreme - vertices)),
        }]
    return gi, rep, [_statistic_row(cfg, cfg.lam_grid[gi], seed_path)]


def _task_grid(cfg: ExperimentConfig):
    if cfg.kind == "slln-path":
        # arm 0 = main run, arm 1 = pilot run for centering
        return [(cfg, arm, rep) for arm in (0, 1)
                for rep in range(cfg.replicates)]
    return [(cfg, gi, rep) for gi in range(len(cfg.lam_grid))
            for rep in range(cfg.replicates)]


def _standardized(values: np.ndarray) -> np.ndarray:
    sd = values.std(ddof=1)
    if not sd > 0:
        raise InsufficientDataError("degenerate replicate values (zero SD)")
    return (values - values.mean()) / sd


def _bootstrap_se(values: np.ndarray, stat, n_boot: int, rng) -> float:
    n = values.size
    reps = np.empty(n_boot)
    for b in range(n_boot):
        reps[b] = stat(values[rng.integers(0, n, size=n)])
    return float(reps.std(ddof=1))


def _summarize(cfg: ExperimentConfig, rows: list) -> dict:
    kind = cfg.kind
    summary: dict = {"kind": kind, "d": cfg.d, "xi": cfg.xi, "f": cfg.f,
                     "replicates": cfg.replicates}
    constants = _bounds.BoundConstants(dict(cfg.constants))
    rng = _sampler.substream((cfg.master_seed, 0xB00, _KIND_ID[kind]))

    if kind == "clt":
        values = np.array([r["statistic_value"] for r in rows])
        z = _standardized(values)
        kstats = _cumulants.k_statistics(z, 2)
        summary.update({
            "mean": float(values.mean()),
            "sd": float(values.std(ddof=1)),
            "ks_statistic": ks_distance(z),
            "k1_standardized": kstats[1],
            "k1_se": _bootstrap_se(z, np.mean, 400, rng),
            "k2_standardized": kstats[2],
            "k2_se": _bootstrap_se(z, lambda v: v.var(ddof=1), 400, rng),
        })
        return summary

    if kind == "variance-exponent":
        per_lam = []
        for gi, lam in enumerate(cfg.lam_grid):
            vals = np.array([r["statistic_value"] for r in rows
                             if r["lambda"] == lam])
            per_lam.append((lam, float(vals.var(ddof=1))))
        fit = exponent_fit(per_lam, seed=cfg.master_seed)
        summary.update({
            "variances": [{"lam": l, "var": v} for l, v in per_lam],
            "slope": fit.slope,
            "intercept": fit.intercept,
            "ci": [fit.ci_low, fit.ci_high],
        })
        return summary

    if kind == "slln-path":
        traj = []
        for k, lam in enumerate(cfg.lam_grid):
            main = np.array([r["statistic_value"] for r in rows
                             if r["level"] == k and r["arm"] == 0])
            pilot = np.array([r["statistic_value"] for r in rows
                              if r["level"] == k and r["arm"] == 1])
            traj.append({
                "lam": float(lam), "level": k,
                "mean": float(main.mean()),
                "pilot_mean": float(pilot.mean()),
                "centered_mean": float(main.mean() - pilot.mean()),
                "sd": float(main.std(ddof=1)),
            })
        summary["trajectory"] = traj
        return summary

    if kind == "concentration":
        values = np.array([r["statistic_value"] for r in rows])
        z = np.abs(_standardized(values))
        lam = cfg.lam_grid[0]
        e = _bounds.statistic_exponent(cfg.xi, cfg.d)
        logp = math.log(lam) ** ((cfg.d - 1) / (4.0 * e))
        points, tight = [], []
        for y in cfg.y_grid:
            freq = float(np.mean(z >= y))
            bound = _bounds.concentration_bound(
                cfg.xi, y, lam, cfg.d, constants)
            points.append({"y": y, "empirical": freq, "bound_c1": bound})
            if freq > 0.0 and y > 0:
                # constant making the c-branch reproduce this frequency
                tight.append(-4.0 * math.log(freq / 2.0)
                             / (logp * y ** (1.0 / e)))
        summary["tail"] = points
        # the most binding constant; the bound evaluated there dominates
        # every empirical frequency (the min over branches only grows)
        summary["tight_constant"] = min(tight) if tight else None
        return summary

    if kind == "moments":
        values = np.array([r["statistic_value"] for r in rows])
        kstats = _cumulants.k_statistics(values, cfg.kmax)
        lam = cfg.lam_grid[0]
        moments = []
        for k in range(1, cfg.kmax + 1):
            mk = float(np.mean(values ** k))
            lo, hi = _bounds.envelope_bounds(
                "moment", lam, cfg.d, cfg.xi, k=k, constants=constants)
            moments.append({"k": k, "moment": mk, "k_statistic": kstats[k],
                            "envelope": [lo, hi]})
        summary["moments"] = moments
        return summary

    if kind == "mdp-curve":
        curves = []
        for gi, lam in enumerate(cfg.lam_grid):
            vals = np.array([r["statistic_value"] for r in rows
                             if r["lambda"] == lam])
            z = _standardized(vals)
            a = math.log(lam) ** cfg.a_exponent
            pts = []
            for y in cfg.y_grid:
                freq = float(np.mean(z >= a * y))
                lhs = math.log(freq) / (a * a) if freq > 0 else None
                pts.append({"y": y, "empirical": lhs,
                            "rate": -_bounds.rate_function(y)})
            curves.append({"lam": float(lam), "a": a, "points": pts})
        summary["curves"] = curves
        summary["qualitative"] = True
        return summary

    if kind == "agreement-audit":
        per_lam = []
        for lam in cfg.lam_grid:
            sub = [r for r in rows if r["lambda"] == lam]
            per_lam.append({
                "lam": float(lam),
                "violations": int(sum(r["violations"] for r in sub)),
                "agreement_rate": float(np.mean(
                    [r["agreement_rate"] for r in sub])),
            })
        summary["audit"] = per_lam
        return summary

    # identities
    summary.update({
        "max_defect_residual": max(r["defect_residual"] for r in rows),
        "face_sum_all_exact": all(r["face_sum_exact"] for r in rows),
        "euler_all_exact": all(r["euler_exact"] for r in rows),
        "max_radius_identity_relerr": max(
            r["radius_identity_relerr"] for r in rows),
        "max_roundtrip_relerr": max(r["roundtrip_relerr"] for r in rows),
    })
    return summary


def run_experiment(config: ExperimentConfig,
                   workers: int | None = None) -> ExperimentReport:
    """Run one campaign; the raw table is deterministic in the master seed
    and independent of the worker count."""
    workers = int(workers if workers is not None else config.workers)
    if config.kind == "variance-exponent" and \
            config.synthetic_variance_exponent is not None:
        keyed = {}
        for gi, lam in enumerate(config.lam_grid):
            for rep, row in enumerate(_synthetic_row(config, gi, lam)):
                keyed[(gi, rep)] = [dict(row, replicate=rep)]
    else:
        tasks = _task_grid(config)
        keyed = {}
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for gi, rep, rows in pool.map(_run_task, tasks, chunksize=8):
                    keyed[(gi, rep)] = rows
        else:
            for task in tasks:
                gi, rep, rows = _run_task(task)
                keyed[(gi, rep)] = rows
        for (gi, rep), rows in keyed.items():
            for row in rows:
                row["replicate"] = rep

    raw = []
    for key in sorted(keyed):
        raw.extend(keyed[key])
    summary = _summarize(config, raw)
    lead = ["replicate", "lambda"]
    tail = [c for c in raw[0] if c not in lead]
    return ExperimentReport(
        config=config,
        columns=lead + tail,
        raw=raw,
        summary=summary,
        config_hash=config.config_hash(),
        master_seed=config.master_seed,
    )
