"""Monte Carlo harness: sample G(n, p), solve, compare against predicted windows.

Reports are canonical JSON (sorted keys, floats at 12 significant digits)
so reruns can be compared byte for byte.  Wall-clock time is kept out of
the report body for the same reason; see :func:`run_experiment`.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import platform
import statistics
import struct
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from . import predictor as pr
from . import solvers
from .errors import CapacityError, DomainError, ValidationError
from .graph import RngSpec, gen_gnp
from .predictor import EdgeBudgetFn, ModelParams, PredictionWindow

STATISTICS = ("tree", "path", "cycle", "independent_set", "exact_edges")
WINDOW_METHODS = (pr.CLOSED_FORM, pr.ROOT_BASED, pr.MOMENT_BASED)
SIG_DIGITS = 12


def derive_stream(master_seed: int, n: int, trial: int) -> int:
    """Stable 64-bit stream id for one (n, trial) cell."""
    payload = struct.pack("<QQQ", master_seed & (2**64 - 1), n, trial)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8, person=b"gnp-trial").digest(), "little")


def trial_rng(master_seed: int, n: int, trial: int) -> RngSpec:
    return RngSpec(master_seed, derive_stream(master_seed, n, trial))


@dataclass(frozen=True)
class ExperimentConfig:
    statistic: str
    n_list: tuple[int, ...]
    p: float
    trials: int
    master_seed: int
    eps: float | None = pr.DEFAULT_TREE_EPS
    eps1: float = pr.DEFAULT_EPS1
    tfn: EdgeBudgetFn | None = None
    budget: solvers.Budget = field(default_factory=solvers.Budget)
    window_method: str = pr.CLOSED_FORM
    # k range over which t(k) must pass validation; None means [3, scan limit]
    t_check: tuple[int, int] | None = None

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValidationError(f"statistic must be one of {STATISTICS}")
        if self.window_method not in WINDOW_METHODS:
            raise ValidationError(f"window_method must be one of {WINDOW_METHODS}")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if not self.n_list:
            raise ValidationError("n_list is empty")
        if self.statistic == "exact_edges" and self.tfn is None:
            raise ValidationError("exact_edges requires tfn")
        if self.statistic == "tree" and self.eps is None:
            raise ValidationError("tree requires eps")
        if not 0 < self.p < 1:
            raise ValidationError("p must lie in (0, 1)")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if self.t_check is not None:
            object.__setattr__(self, "t_check", tuple(int(k) for k in self.t_check))

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "n_list": list(self.n_list),
            "p": self.p,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "eps": self.eps,
            "eps1": self.eps1,
            "tfn": None if self.tfn is None else self.tfn.to_dict(),
            "budget": self.budget.to_dict(),
            "window_method": self.window_method,
            "t_check": None if self.t_check is None else list(self.t_check),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if d.get("tfn") is not None:
            d["tfn"] = EdgeBudgetFn.from_dict(d["tfn"])
        d["budget"] = solvers.Budget.from_dict(d.get("budget"))
        try:
            return cls(**d)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None


@dataclass
class ReportRow:
    n: int
    predicted_window: PredictionWindow
    histogram: dict[int, int]
    in_window_fraction: float | None
    inexact_trials: int
    mean_value: float | None
    analytic_logE_at_window_lo: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "predicted_window": self.predicted_window.to_dict(),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "in_window_fraction": self.in_window_fraction,
            "inexact_trials": self.inexact_trials,
            "mean_value": self.mean_value,
            "analytic_logE_at_window_lo": self.analytic_logE_at_window_lo,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ReportRow]
    t_violations: list = field(default_factory=list)
    wall_time: float = 0.0  # seconds; not part of the canonical JSON

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "metadata": {
                "config": self.config.to_dict(),
                "versions": versions(),
                "t_informational": [v.to_dict() for v in self.t_violations],
            },
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "count"])
        for row in self.rows:
            for value, count in sorted(row.histogram.items()):
                w.writerow([row.n, value, count])
        return buf.getvalue()


def versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "numpy": np.__version__, "python": platform.python_version()}


def _round_floats(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2) + "\n"


# ------------------------------------------------------------- windows

def predicted_window(cfg: ExperimentConfig, n: int) -> PredictionWindow:
    mp = ModelParams(n, cfg.p)
    stat, method = cfg.statistic, cfg.window_method
    if stat == "tree":
        if method == pr.MOMENT_BASED:
            raise DomainError("tree windows are closed_form or root_based")
        return pr.window_tree(mp, cfg.eps, method)
    if stat in ("path", "cycle"):
        return pr.window_path_cycle(mp)
    if stat == "independent_set":
        if method == pr.MOMENT_BASED:
            return pr.k0_edges(mp, EdgeBudgetFn.constant(0), cfg.eps1)[1]
        return pr.window_independence(mp)
    return pr.k0_edges(mp, cfg.tfn, cfg.eps1)[1]


def analytic_log_expectation(cfg: ExperimentConfig, n: int, k: int) -> float:
    mp = ModelParams(n, cfg.p)
    if cfg.statistic == "tree":
        return pr.log_expected_tree_count(mp, k).ln_mag
    if cfg.statistic == "path":
        return pr.log_expected_path_count(mp, k).ln_mag
    if cfg.statistic == "cycle":
        return pr.log_expected_cycle_count(mp, k).ln_mag
    t = 0 if cfg.statistic == "independent_set" else cfg.tfn(k)
    if t > k * (k - 1) // 2:
        return -math.inf
    return pr.log_expected_exact_edges_count(mp, k, t).ln_mag


# ------------------------------------------------------------- trials

def solve_statistic(g, statistic: str, budget: solvers.Budget, tfn=None) -> solvers.SolveResult:
    if statistic == "tree":
        return solvers.max_induced_tree(g, budget)
    if statistic in ("path", "cycle"):
        return solvers.max_induced_path_or_cycle(g, statistic, budget)
    if statistic == "independent_set":
        return solvers.max_independent_set(g, budget)
    return solvers.max_exact_edges_subset(g, tfn, budget)


def _run_trial(task) -> tuple[int, int, int, bool]:
    cfg, n, trial = task
    try:
        g = gen_gnp(n, cfg.p, trial_rng(cfg.master_seed, n, trial))
        res = solve_statistic(g, cfg.statistic, cfg.budget, cfg.tfn)
    except CapacityError:
        return n, trial, 0, False
    return n, trial, res.value, res.exact


def check_t_sequence(cfg: ExperimentConfig) -> list:
    """Validate t(k) for exact_edges configs; returns informational records, raises on violations."""
    if cfg.statistic != "exact_edges":
        return []
    if cfg.t_check is not None:
        k_lo, k_hi = cfg.t_check
    else:
        k_lo, k_hi = 3, max(pr.k_scan_max(ModelParams(n, cfg.p)) for n in cfg.n_list)
    found = pr.validate_t_sequence(cfg.tfn, k_lo, k_hi)
    bad = [v for v in found if not v.informational]
    if bad:
        raise ValidationError(f"t(k) fails validation on [{k_lo}, {k_hi}]: {[v.to_dict() for v in bad[:10]]}")
    return found


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run every (n, trial) cell and aggregate in (n, trial) order.

    ``workers`` only changes scheduling; results are reduced in a fixed
    order, so the report is the same for any worker count.  A time budget
    can still make the inexact count load dependent; node budgets do not.
    """
    started = time.perf_counter()
    informational = check_t_sequence(cfg)
    windows = {n: predicted_window(cfg, n) for n in cfg.n_list}
    tasks = [(cfg, n, i) for n in cfg.n_list for i in range(cfg.trials)]
    if workers <= 1:
        results = [_run_trial(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=1))
    results.sort(key=lambda r: (r[0], r[1]))

    rows = []
    for n in cfg.n_list:
        win = windows[n]
        values = [v for m, _, v, exact in results if m == n and exact]
        inexact = sum(1 for m, _, _, exact in results if m == n and not exact)
        hist = Counter(values)
        rows.append(ReportRow(
            n=n,
            predicted_window=win,
            histogram=dict(hist),
            in_window_fraction=(sum(v in win for v in values) / len(values)) if values else None,
            inexact_trials=inexact,
            mean_value=statistics.fmean(values) if values else None,
            analytic_logE_at_window_lo=analytic_log_expectation(cfg, n, win.lo),
        ))
    return ExperimentReport(cfg, rows, informational, time.perf_counter() - started)


# ------------------------------------------------------------- audit

@dataclass(frozen=True)
class AuditRow:
    n: int
    p: float
    statistic: str
    k: int
    t: int | None
    trials: int
    mc_mean: float
    std_error: float
    analytic: float
    z: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def expectation_audit(mp: ModelParams, statistic: str, k: int, t: int | None = None, trials: int = 10_000,
                      master_seed: int = 0) -> AuditRow:
    """Compare the Monte Carlo mean of X_k with its analytic expectation."""
    if statistic not in ("tree", "exact_edges"):
        raise DomainError("audit supports tree and exact_edges")
    if mp.n > solvers.ORACLE_MAX_N:
        raise CapacityError(f"audit uses exhaustive counting, n <= {solvers.ORACLE_MAX_N}")
    if trials < 2:
        raise DomainError("need at least 2 trials for a standard error")
    if statistic == "exact_edges" and t is None:
        raise DomainError("exact_edges audit needs t")
    counts = np.empty(trials)
    for i in range(trials):
        g = gen_gnp(mp.n, mp.p, trial_rng(master_seed, mp.n, i))
        if statistic == "tree":
            counts[i] = solvers.count_induced_trees(g, k)
        else:
            counts[i] = solvers.count_exact_edge_sets(g, k, t)
    if statistic == "tree":
        analytic = pr.log_expected_tree_count(mp, k).value
    else:
        analytic = pr.log_expected_exact_edges_count(mp, k, t).value
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(trials))
    if se == 0:
        z = 0.0 if math.isclose(mean, analytic, rel_tol=1e-9) else math.copysign(math.inf, mean - analytic)
    else:
        z = (mean - analytic) / se
    return AuditRow(mp.n, mp.p, statistic, k, t, trials, mean, se, analytic, z)
