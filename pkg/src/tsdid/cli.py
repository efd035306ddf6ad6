"""Command-line interface.

Subcommands
-----------
estimate         Estimate treatment effects from a panel CSV.
simulate         Generate a simulated panel CSV from a named design.
mc               Run a Monte Carlo table / power curve from a JSON config.
scan-trend       Emit minimum eigenvalues of the trend-regression matrices.
fetch-worldbank  Download an indicator panel from the World Bank API.

Exit codes: 0 success, 1 validation error, 2 numeric error, 3 IO/network
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .dgp import generate, preset, spec_from_dict, substream
from .diagnostics import adf_test, dw_test, kpss_test
from .errors import DataSourceError, NumericError, TsdidError, ValidationError
from .estimators import weighted_least_squares
from .fitting import fit_estimate
from .inference import HacSpec
from .io import panel_from_file, panel_to_csv, parse_window, read_panel_csv
from .montecarlo import (
    McConfig,
    compare_to_anchors,
    report_to_dict,
    run_power_curve,
    run_table,
    write_power_csv,
    write_report_csv,
    write_report_json,
)
from .multicontrol import estimate_vector, overid_test
from .transforms import ar1_augment_design, first_difference, min_eig_scan
from .weights import WeightingScheme
from .worldbank import fetch_worldbank

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _parse_scheme(text: str) -> WeightingScheme:
    text = text.strip().lower()
    if text == "uniform":
        return WeightingScheme.uniform()
    for prefix in ("linear-decay:", "linear:"):
        if text.startswith(prefix):
            return WeightingScheme.linear_decay(float(text[len(prefix):]))
    raise ValidationError(
        f"unknown weighting scheme {text!r}; use 'uniform' or 'linear-decay:A'"
    )


def _parse_weight_flags(tokens) -> tuple[WeightingScheme, WeightingScheme]:
    wpost = WeightingScheme.uniform()
    wpre = WeightingScheme.uniform()
    for token in tokens or ():
        for part in token.split(","):
            part = part.strip()
            if not part:
                continue
            key, _, value = part.partition("=")
            if key == "post":
                wpost = _parse_scheme(value)
            elif key == "pre":
                wpre = _parse_scheme(value)
            else:
                raise ValidationError(
                    f"weight assignment must be post=... or pre=..., got {part!r}"
                )
    return wpost, wpre


def _add_common_estimation_flags(p):
    p.add_argument("--window", required=True, help="treatment window START:END (inclusive)")
    p.add_argument(
        "--estimators",
        default="tdid,sc,ba",
        help="comma-separated subset of tdid,sc,ba,demeaned_sc",
    )
    p.add_argument(
        "--transform",
        default="none",
        choices=["none", "first-difference", "ar1-augment", "detrend"],
    )
    p.add_argument(
        "--weights",
        action="append",
        metavar="SIDE=SCHEME",
        help="post=SCHEME and/or pre=SCHEME (default uniform); e.g. "
        "--weights post=linear-decay:0.25,pre=uniform",
    )
    p.add_argument("--hac-lag", type=int, default=None, help="Bartlett lag (default: automatic)")
    p.add_argument("--log", action="store_true", help="estimate on log outcomes")
    p.add_argument("--control", default=None, help="control unit label or index (default: first)")
    p.add_argument("--format", default="table", choices=["table", "csv", "json"])
    p.add_argument("--out", default=None, help="write machine-readable output to this file")


def _estimate_records(panel, args, wpost, wpre, hac):
    names = [e.strip() for e in args.estimators.split(",") if e.strip()]
    if not names:
        raise ValidationError("empty estimator set")
    control = 0 if args.control is None else args.control
    try:
        control = int(control)
    except (TypeError, ValueError):
        pass
    records = []
    for name in names:
        est = fit_estimate(
            panel,
            estimator=name,
            transform=args.transform,
            control=control,
            wpost=wpost,
            wpre=wpre,
            spec=hac,
        )
        rec = {
            "estimator": name,
            "transform": est.transform,
            "point": est.point,
            "hac_se": est.hac_se,
            "t_stat": est.t_stat,
            "p_value": est.p_value,
        }
        for coef, (value, se) in est.coefficients.items():
            rec[f"coef_{coef}"] = value
            rec[f"coef_{coef}_se"] = se
        records.append(rec)
    return records, control


def _estimate_diagnostics(panel, args, wpost, wpre, hac, control):
    """Diagnostics on the estimation series: ADF/KPSS on (quasi-)differenced
    X, Durbin-Watson on the fitted residuals."""
    work = first_difference(panel) if args.transform == "first-difference" else panel
    x = work.difference(control)
    if args.transform == "ar1-augment":
        design = ar1_augment_design(work, control, wpost, wpre)
        beta, _, resid = weighted_least_squares(design.matrix, design.response, design.weights)
        series = design.response - beta[design.columns.index("lag")] * design.matrix[:, design.columns.index("lag")]
    else:
        series = x
        resid = x - x.mean()
    adf = adf_test(series)
    kpss = kpss_test(series)
    dw = dw_test(resid)
    return {
        "adf_p": adf.p_value,
        "adf_stat": adf.statistic,
        "adf_lags": adf.lags,
        "kpss_stat": kpss.statistic,
        "kpss_p": kpss.p_value,
        "kpss_bracket": kpss.bracket,
        "dw_stat": dw.statistic,
        "dw_p": dw.p_value,
    }


def _print_estimate_table(records, diag, overid, out=sys.stdout):
    header = f"{'estimator':<12}{'transform':<18}{'estimate':>12}{'se':>10}{'t':>9}{'p':>9}"
    print(header, file=out)
    print("-" * len(header), file=out)
    for rec in records:
        print(
            f"{rec['estimator']:<12}{rec['transform']:<18}"
            f"{rec['point']:>12.4f}{rec['hac_se']:>10.4f}"
            f"{rec['t_stat']:>9.3f}{rec['p_value']:>9.4f}",
            file=out,
        )
        coefs = [k[5:] for k in rec if k.startswith("coef_") and not k.endswith("_se")]
        for coef in coefs:
            print(
                f"    {coef:<8}{'':<18}{rec['coef_' + coef]:>12.4f}"
                f"{rec.get('coef_' + coef + '_se', float('nan')):>10.4f}",
                file=out,
            )
    if diag:
        print(
            f"diagnostics: ADF p={diag['adf_p']:.3f} (lags {diag['adf_lags']}), "
            f"KPSS stat={diag['kpss_stat']:.3f} ({diag['kpss_bracket']}), "
            f"DW={diag['dw_stat']:.3f} (p={diag['dw_p']:.3f})",
            file=out,
        )
    if overid is not None:
        print(
            f"over-identification: Q={overid['q_stat']:.4f} "
            f"(df {overid['df']}, p={overid['p_value']:.4f}), "
            f"efficient ATT={overid['point']:.4f} (se {overid['se']:.4f})",
            file=out,
        )


def cmd_estimate(args) -> int:
    pf = read_panel_csv(args.panel)
    window = parse_window(args.window)
    panel = panel_from_file(pf, window, log=args.log)
    wpost, wpre = _parse_weight_flags(args.weights)
    hac = HacSpec(lag=args.hac_lag)
    records, control = _estimate_records(panel, args, wpost, wpre, hac)
    diag = _estimate_diagnostics(panel, args, wpost, wpre, hac, control)
    overid = None
    if panel.n_controls >= 2 and args.transform == "none":
        result = overid_test(estimate_vector(panel, wpost, wpre, hac))
        overid = {
            "q_stat": result.q_stat,
            "df": result.df,
            "p_value": result.p_value,
            "point": result.point,
            "se": result.se,
            "weights": list(result.weights),
        }
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "estimate",
        "window": list(window),
        "log": bool(args.log),
        "estimates": records,
        "diagnostics": diag,
        "overid": overid,
    }
    if args.format == "table":
        _print_estimate_table(records, diag, overid)
    elif args.format == "json":
        json.dump(payload, sys.stdout, indent=2, default=float)
        print()
    else:
        _write_records_csv(sys.stdout, records)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, default=float)
            fh.write("\n")
    return 0


def _write_records_csv(fh, records):
    import csv as _csv

    keys = sorted({k for rec in records for k in rec}, key=lambda k: (k != "estimator", k))
    writer = _csv.DictWriter(fh, fieldnames=keys)
    writer.writeheader()
    for rec in records:
        writer.writerow(rec)


def cmd_simulate(args) -> int:
    spec = preset(args.preset, h=args.h)
    if args.att is not None:
        spec = replace(spec, att="sin" if args.att == "sin" else float(args.att))
    sim = generate(spec, args.t_pre, args.t_post, substream(args.seed))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        panel_to_csv(sim.panel, out)
    finally:
        if args.out:
            out.close()
    return 0


def _config_from_json(path) -> McConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("mc config must be a JSON object")
    spec_fields = dict(raw.get("spec") or {})
    if "preset" in raw:
        spec_fields.setdefault("preset", raw["preset"])
    if "att" in raw:
        spec_fields["att"] = raw["att"]
    if not spec_fields:
        raise ValidationError("mc config needs a 'preset' or 'spec' entry")
    spec = spec_from_dict(spec_fields)
    known = {
        "sizes",
        "reps",
        "seed",
        "estimators",
        "tests",
        "null",
        "power_grid",
        "power_parameter",
        "transform",
        "n_jobs",
    }
    unknown = set(raw) - known - {"preset", "spec", "att", "schema_version"}
    if unknown:
        raise ValidationError(f"unknown mc config keys: {sorted(unknown)}")
    return McConfig(
        spec=spec,
        sizes=tuple(int(s) for s in raw.get("sizes", [100])),
        reps=int(raw.get("reps", 2000)),
        seed=int(raw.get("seed", 0)),
        estimators=tuple(raw.get("estimators", ["tdid", "sc", "ba"])),
        tests=tuple(raw.get("tests", [])),
        null_value=raw.get("null"),
        power_grid=tuple(raw.get("power_grid", [])),
        power_parameter=raw.get("power_parameter", "att"),
        transform=raw.get("transform"),
        n_jobs=int(raw.get("n_jobs", 1)),
    )


def cmd_mc(args) -> int:
    config = _config_from_json(args.config)
    if args.reps is not None:
        config = replace(config, reps=args.reps)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    prefix = args.out_prefix
    wrote = []
    if config.estimators:
        report = run_table(config)
        write_report_csv(report, f"{prefix}_table.csv")
        write_report_json(report, f"{prefix}_table.json")
        wrote += [f"{prefix}_table.csv", f"{prefix}_table.json"]
        for check in compare_to_anchors(report):
            status = "ok" if check["ok"] else "OFF"
            print(
                f"anchor {check['preset']} n={check['size']} {check['estimator']} "
                f"{check['metric']}: {check['value']:.4f} vs {check['target']:.3f} "
                f"(tol {check['tolerance']:.3f}) [{status}]"
            )
    if config.power_grid:
        report = run_power_curve(config)
        write_power_csv(report, f"{prefix}_power.csv")
        with open(f"{prefix}_power.json", "w") as fh:
            json.dump(report_to_dict(report), fh, indent=2, default=float)
            fh.write("\n")
        wrote += [f"{prefix}_power.csv", f"{prefix}_power.json"]
    for path in wrote:
        print(f"wrote {path}")
    return 0


def cmd_scan_trend(args) -> int:
    grid = np.linspace(1e-6, 1 - 1e-6, args.points)
    table = min_eig_scan(grid)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out.write("lambda,mineig_qa,mineig_qb,mineig_q\n")
        for row in table:
            out.write("%.10g,%.10g,%.10g,%.10g\n" % tuple(row))
    finally:
        if args.out:
            out.close()
    return 0


def cmd_fetch_worldbank(args) -> int:
    countries = [c for c in args.countries.split(",") if c]
    pf = fetch_worldbank(
        countries,
        args.indicator,
        args.start,
        args.end,
        fixture=args.fixture,
    )
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out.write("period," + ",".join(pf.unit_labels) + "\n")
        for i, year in enumerate(pf.periods):
            cells = ",".join("%.17g" % v for v in pf.values[i])
            out.write(f"{int(year)},{cells}\n")
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsdid", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"tsdid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate treatment effects from a panel CSV")
    p_est.add_argument("panel", help="panel CSV path")
    _add_common_estimation_flags(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_sim = sub.add_parser("simulate", help="generate a simulated panel CSV")
    p_sim.add_argument("--preset", required=True)
    p_sim.add_argument("--t-pre", type=int, required=True)
    p_sim.add_argument("--t-post", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--h", type=float, default=0.0, help="violation intensity for idTest designs")
    p_sim.add_argument("--att", default=None, help="treatment effect: a constant or 'sin'")
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo study from a JSON config")
    p_mc.add_argument("config", help="JSON config path")
    p_mc.add_argument("--out-prefix", default="mc", help="output file prefix")
    p_mc.add_argument("--reps", type=int, default=None, help="override replication count")
    p_mc.add_argument("--seed", type=int, default=None, help="override master seed")
    p_mc.set_defaults(func=cmd_mc)

    p_scan = sub.add_parser("scan-trend", help="minimum-eigenvalue scan of the trend matrices")
    p_scan.add_argument("--points", type=int, default=1000)
    p_scan.add_argument("--out", default=None)
    p_scan.set_defaults(func=cmd_scan_trend)

    p_wb = sub.add_parser("fetch-worldbank", help="fetch an indicator panel (first country = treated)")
    p_wb.add_argument("--countries", required=True, help="comma-separated ISO3 codes, treated first")
    p_wb.add_argument("--indicator", required=True)
    p_wb.add_argument("--start", type=int, required=True)
    p_wb.add_argument("--end", type=int, required=True)
    p_wb.add_argument("--fixture", default=None, help="replay recorded responses instead of fetching")
    p_wb.add_argument("--out", default=None)
    p_wb.set_defaults(func=cmd_fetch_worldbank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except DataSourceError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except TsdidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
