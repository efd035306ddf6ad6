"""Monte Carlo harness: bias/precision/size tables and power curves.

Replications are addressed by counter-based substreams keyed on the master
seed, so serial and parallel runs (and reruns) produce identical reports.
Per-design estimation follows the simulation protocol of the source tables:
the lagged outcome is controlled for under the AR design and first
differences are applied under the unit-root design; estimators otherwise
run untransformed with uniform weights.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .dgp import DgpSpec, generate, preset, substream, true_att
from .errors import NumericError, ValidationError
from .fitting import fit_estimate
from .inference import NOMINAL_LEVELS, HacSpec, t_test
from .multicontrol import pretrends_test
from .panel import Panel
from .weights import WeightingScheme

SCHEMA_VERSION = 1

FAILURE_BUDGET = 0.001

DEFAULT_TRANSFORMS = {"ar1": "ar1-augment", "u-r": "first-difference"}

_TEST_PREFIXES = ("t", "id", "pt")

_ESTIMATOR_ALIASES = {"did": "tdid", "tdid": "tdid", "sc": "sc", "ba": "ba"}


def default_transform(spec: DgpSpec) -> str:
    return DEFAULT_TRANSFORMS.get(spec.name, "none")


@dataclass(frozen=True)
class McConfig:
    """Configuration of one Monte Carlo run."""

    spec: DgpSpec
    sizes: tuple[int, ...] = (100,)
    reps: int = 2000
    seed: int = 0
    estimators: tuple[str, ...] = ("tdid", "sc", "ba")
    tests: tuple[str, ...] = ()
    null_value: float | None = None
    power_grid: tuple[float, ...] = ()
    power_parameter: str = "att"
    transform: str | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ValidationError("replication count must be >= 1")
        if any(s < 4 for s in self.sizes):
            raise ValidationError("sample sizes must be >= 4")
        if not self.estimators and not self.tests:
            raise ValidationError("nothing to run: empty estimator and test sets")
        if self.power_parameter not in ("att", "h"):
            raise ValidationError("power_parameter must be 'att' or 'h'")
        object.__setattr__(
            self,
            "estimators",
            tuple(_ESTIMATOR_ALIASES.get(e, e) for e in self.estimators),
        )
        unknown = set(self.estimators) - {"tdid", "sc", "ba"}
        if unknown:
            raise ValidationError(f"unknown estimators: {sorted(unknown)}")
        for test in self.tests:
            _parse_test(test)

    def resolved_transform(self) -> str:
        return self.transform if self.transform is not None else default_transform(self.spec)


def _parse_test(name: str) -> tuple[str, str]:
    kind, _, est = name.partition(".")
    if kind == "t" and not est:
        est = "tdid"
    est = _ESTIMATOR_ALIASES.get(est, est)
    if kind not in _TEST_PREFIXES or est not in ("tdid", "sc", "ba"):
        raise ValidationError(
            f"unknown test {name!r}; use e.g. 't.tdid', 'id.tdid', 'pt.sc'"
        )
    return kind, est


@dataclass(frozen=True)
class McRow:
    """Per (sample size, estimator) summary of a table run."""

    size: int
    estimator: str
    transform: str
    mb: float
    mad: float
    rmse: float
    rejections: dict
    rejection_se: dict
    reps: int
    failures: int


@dataclass(frozen=True)
class McReport:
    spec: DgpSpec
    seed: int
    rows: tuple[McRow, ...] = ()
    power: tuple[dict, ...] = ()

    def row(self, size: int, estimator: str) -> McRow:
        for r in self.rows:
            if r.size == size and r.estimator == estimator:
                return r
        raise KeyError((size, estimator))


def _estimate_once(panel: Panel, estimator: str, transform: str, hac: HacSpec):
    return fit_estimate(panel, estimator=estimator, transform=transform, spec=hac)


def _table_chunk(config: McConfig, size_index: int, size: int, rep_range, transform, hac):
    spec = config.spec
    ests = config.estimators
    truth_w = WeightingScheme.uniform()
    out = {e: [] for e in ests}
    rejs = {e: [] for e in ests}
    failures = 0
    for rep in rep_range:
        rng = substream(config.seed, size_index, rep)
        sim = generate(spec, size, size, rng)
        truth = sim.true_att(truth_w)
        null = config.null_value if config.null_value is not None else truth
        try:
            fits = {
                e: _estimate_once(sim.panel, e, transform, hac) for e in ests
            }
        except NumericError:
            failures += 1
            for e in ests:
                out[e].append(np.nan)
                rejs[e].append([np.nan] * len(NOMINAL_LEVELS))
            continue
        for e, fit in fits.items():
            out[e].append(fit.point - truth)
            result = t_test(fit, null)
            rejs[e].append([float(result.reject(lv)) for lv in NOMINAL_LEVELS])
    return out, rejs, failures


def _run_chunks(config: McConfig, worker, chunk_args):
    if config.n_jobs > 1:
        from joblib import Parallel, delayed

        return Parallel(n_jobs=config.n_jobs)(
            delayed(worker)(*args) for args in chunk_args
        )
    return [worker(*args) for args in chunk_args]


def _chunk_ranges(reps: int, n_jobs: int):
    n_chunks = max(1, min(n_jobs, reps)) if n_jobs > 1 else 1
    bounds = np.linspace(0, reps, n_chunks + 1, dtype=int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]


def run_table(config: McConfig) -> McReport:
    """Bias, precision, and empirical rejection rates per sample size.

    Rejections are of two-sided t-tests of the true target (or an explicit
    null).  Replication failures beyond 0.1 percent of runs abort the table,
    since silently dropping failures biases the size estimates.
    """
    transform = config.resolved_transform()
    hac = HacSpec()
    rows = []
    for si, size in enumerate(config.sizes):
        chunk_args = [
            (config, si, size, rng, transform, hac)
            for rng in _chunk_ranges(config.reps, config.n_jobs)
        ]
        results = _run_chunks(config, _table_chunk, chunk_args)
        failures = sum(r[2] for r in results)
        if failures > FAILURE_BUDGET * config.reps:
            raise NumericError(
                f"{failures} of {config.reps} replications failed at size {size}; "
                "exceeds the 0.1% failure budget"
            )
        for e in config.estimators:
            errs = np.concatenate([np.asarray(r[0][e]) for r in results])
            rej = np.vstack([np.asarray(r[1][e]).reshape(-1, len(NOMINAL_LEVELS)) for r in results])
            ok = np.isfinite(errs)
            errs = errs[ok]
            rej = rej[ok]
            n_ok = errs.size
            rates = {lv: float(rej[:, i].mean()) for i, lv in enumerate(NOMINAL_LEVELS)}
            ses = {
                lv: math.sqrt(max(r * (1 - r), 0.0) / n_ok) for lv, r in rates.items()
            }
            rows.append(
                McRow(
                    size=size,
                    estimator=e,
                    transform=transform,
                    mb=float(errs.mean()),
                    mad=float(np.median(np.abs(errs))),
                    rmse=float(np.sqrt(np.mean(errs**2))),
                    rejections=rates,
                    rejection_se=ses,
                    reps=n_ok,
                    failures=failures,
                )
            )
    return McReport(spec=config.spec, seed=config.seed, rows=tuple(rows))


def _power_spec(config: McConfig, value: float) -> DgpSpec:
    if config.power_parameter == "att":
        return replace(config.spec, att=float(value))
    return replace(config.spec, violation_intensity=float(value))


def _pair_panel(sim_panel: Panel) -> Panel:
    """Two-candidate-control layout: both generated units act as controls;
    the treated series cancels from the identification statistic."""
    return Panel(
        treated=np.zeros(sim_panel.n_periods),
        controls=(sim_panel.treated, sim_panel.controls[0]),
        n_pre=sim_panel.n_pre,
        n_transition=sim_panel.n_transition,
        n_post=sim_panel.n_post,
        treated_label="cancelled",
        control_labels=("unit1", "unit0"),
    )


def _run_test(kind: str, est: str, sim_panel: Panel, transform: str, hac: HacSpec, null: float):
    if kind == "t":
        fit = _estimate_once(sim_panel, est, transform, hac)
        return t_test(fit, null)
    if kind == "id":
        # Identification test: the two generated units are candidate
        # controls; the estimator runs on their difference.
        fit = _estimate_once(sim_panel, est, transform, hac)
        return t_test(fit, 0.0)
    return pretrends_test(sim_panel, 0, None, None, None, hac, estimator=est)


def _power_chunk(config: McConfig, grid_index: int, value: float, rep_range, transform, hac):
    spec = _power_spec(config, value)
    tests = [(_parse_test(t), t) for t in config.tests]
    rej = {t: [] for _, t in tests}
    failures = 0
    for rep in rep_range:
        rng = substream(config.seed, grid_index, rep)
        sim = generate(spec, config.sizes[0], config.sizes[0], rng)
        null = config.null_value if config.null_value is not None else 0.0
        try:
            for (kind, est), name in tests:
                result = _run_test(kind, est, sim.panel, transform, hac, null)
                rej[name].append([float(result.reject(lv)) for lv in NOMINAL_LEVELS])
        except NumericError:
            failures += 1
            for _, name in tests:
                rej[name].append([np.nan] * len(NOMINAL_LEVELS))
    return rej, failures


def run_power_curve(config: McConfig) -> McReport:
    """Rejection rates along a grid of effect sizes or violation intensities.

    Uses the first entry of ``sizes`` as the (pre = post) horizon; emits one
    record per (grid value, test, level).
    """
    if not config.power_grid:
        raise ValidationError("power grid is empty")
    if not config.tests:
        raise ValidationError("no tests specified for the power curve")
    transform = config.resolved_transform()
    hac = HacSpec()
    records = []
    for gi, value in enumerate(config.power_grid):
        chunk_args = [
            (config, gi, value, rng, transform, hac)
            for rng in _chunk_ranges(config.reps, config.n_jobs)
        ]
        results = _run_chunks(config, _power_chunk, chunk_args)
        failures = sum(r[1] for r in results)
        if failures > FAILURE_BUDGET * config.reps:
            raise NumericError(
                f"{failures} of {config.reps} replications failed at grid value "
                f"{value}; exceeds the 0.1% failure budget"
            )
        for name in config.tests:
            rej = np.vstack([np.asarray(r[0][name]).reshape(-1, len(NOMINAL_LEVELS)) for r in results])
            rej = rej[np.isfinite(rej[:, 0])]
            for i, lv in enumerate(NOMINAL_LEVELS):
                rate = float(rej[:, i].mean())
                records.append(
                    {
                        "parameter": config.power_parameter,
                        "grid_value": float(value),
                        "test": name,
                        "level": lv,
                        "rate": rate,
                        "mc_se": math.sqrt(max(rate * (1 - rate), 0.0) / rej.shape[0]),
                        "reps": int(rej.shape[0]),
                        "size": config.sizes[0],
                    }
                )
    return McReport(spec=config.spec, seed=config.seed, power=tuple(records))


# -- serialization ----------------------------------------------------------

TABLE_COLUMNS = (
    "preset",
    "att",
    "size",
    "estimator",
    "transform",
    "mb",
    "mad",
    "rmse",
    "rej_1pct",
    "rej_5pct",
    "rej_10pct",
    "mc_se_5pct",
    "reps",
    "failures",
)

POWER_COLUMNS = (
    "preset",
    "size",
    "parameter",
    "grid_value",
    "test",
    "level",
    "rate",
    "mc_se",
    "reps",
)


def _table_record(report: McReport, row: McRow) -> dict:
    return {
        "preset": report.spec.name or "custom",
        "att": report.spec.att,
        "size": row.size,
        "estimator": row.estimator,
        "transform": row.transform,
        "mb": row.mb,
        "mad": row.mad,
        "rmse": row.rmse,
        "rej_1pct": row.rejections[0.01],
        "rej_5pct": row.rejections[0.05],
        "rej_10pct": row.rejections[0.10],
        "mc_se_5pct": row.rejection_se[0.05],
        "reps": row.reps,
        "failures": row.failures,
    }


def report_to_dict(report: McReport) -> dict:
    from .dgp import spec_to_dict

    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "mc_report",
        "spec": spec_to_dict(report.spec),
        "seed": report.seed,
        "table": [_table_record(report, row) for row in report.rows],
        "power": [
            {"preset": report.spec.name or "custom", **rec} for rec in report.power
        ],
    }


def write_report_json(report: McReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2, default=float)
        fh.write("\n")


def write_report_csv(report: McReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS)
        writer.writeheader()
        for row in report.rows:
            writer.writerow(_table_record(report, row))


def write_power_csv(report: McReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=POWER_COLUMNS)
        writer.writeheader()
        for rec in report.power:
            writer.writerow(
                {
                    "preset": report.spec.name or "custom",
                    "size": rec["size"],
                    "parameter": rec["parameter"],
                    "grid_value": rec["grid_value"],
                    "test": rec["test"],
                    "level": rec["level"],
                    "rate": rec["rate"],
                    "mc_se": rec["mc_se"],
                    "reps": rec["reps"],
                }
            )


# -- reference anchors ------------------------------------------------------

# Reference table values for spot-checking harness output: keyed by
# (preset, att, size, estimator, metric) -> (target, tolerance).  Tolerances
# are sized for 2,000-replication runs.
ANCHORS = {
    ("sc-ba", 0.0, 100, "tdid", "mb"): (0.000, 0.005),
    ("sc-ba", 0.0, 100, "tdid", "rmse"): (0.108, 0.010),
    ("sc-ba", 0.0, 100, "tdid", "rej_5pct"): (0.050, 0.015),
    ("ba", 0.0, 100, "sc", "mb"): (-1.000, 0.02),
    ("sc", 0.0, 100, "ba", "mb"): (1.371, 0.05),
    ("pt-na-b", 0.0, 400, "tdid", "rej_5pct"): (0.048, 0.015),
    ("pt-na-b", 0.0, 400, "sc", "rej_5pct"): (0.648, 0.05),
    ("sc-ba", "sin", 100, "tdid", "mb"): (0.000, 0.005),
    ("sc-ba", "sin", 100, "tdid", "rej_5pct"): (0.042, 0.015),
}


def compare_to_anchors(report: McReport) -> list[dict]:
    """Match report rows against embedded reference values.

    Returns one record per matched (size, estimator, metric) anchor with the
    achieved value and whether it falls inside the tolerance.
    """
    out = []
    for row in report.rows:
        rec = _table_record(report, row)
        for metric in ("mb", "mad", "rmse", "rej_1pct", "rej_5pct", "rej_10pct"):
            key = (rec["preset"], rec["att"], row.size, row.estimator, metric)
            if key in ANCHORS:
                target, tol = ANCHORS[key]
                value = rec[metric]
                out.append(
                    {
                        "preset": rec["preset"],
                        "size": row.size,
                        "estimator": row.estimator,
                        "metric": metric,
                        "value": value,
                        "target": target,
                        "tolerance": tol,
                        "ok": abs(value - target) <= tol,
                    }
                )
    return out
