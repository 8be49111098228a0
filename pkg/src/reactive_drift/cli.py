"""Command-line front end.

Every command resolves a flat configuration (built-in defaults, then the
``--config`` JSON file, then command-line flags), runs the corresponding
library call and writes CSV files plus ``manifest.json`` into ``--out``.
Passing a previous ``manifest.json`` as ``--config`` reproduces that run.

Exit codes: 0 success, 2 configuration error, 3 applicability error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytics, montecarlo, population
from .analytics import ApplicabilityError, ScenarioParams
from .dynamics import ConfigurationError, DynamicsParams
from .policies import Distribution, PlatformPolicyConfig

EXIT_CONFIG = 2
EXIT_APPLICABILITY = 3

SERIES_COLUMNS = ["k", "policy", "mean_opinion", "se_opinion", "mean_utility", "se_utility",
                  "mean_payoff", "se_payoff", "mean_gamma", "se_gamma"]
SWEEP_COLUMNS = ["sweep_param", "sweep_value", "lambda_star", "mean_utility_diff",
                 "se_utility_diff"]
POPULATION_COLUMNS = ["agent_index", "x0", "u0", "final_fixed", "final_adaptive"]

SCENARIO_DEFAULTS = {
    "alpha": 0.4, "beta": 0.2, "x0": -1.0, "u0": 1.0, "gamma0": 0.9, "kappa": 1.2,
    "delta": 0.3, "lambda": 0.5, "horizon": 100, "d": 0.1, "seed": 0, "trials": 1000,
    "workers": 1,
}
PLATFORM_DEFAULTS = {
    "platform": "fixed", "period": 5, "exploration_kind": "uniform",
    "exploration_low": -1.0, "exploration_high": 1.0, "exploration_loc": 0.0,
    "exploration_scale": 0.5, "exploration_truncation": "clip",
}
POPULATION_DEFAULTS = {
    "alpha": 0.3, "beta": 0.2, "gamma0": 0.6, "kappa": 1.2, "delta": 0.2, "horizon": 100,
    "num_agents": 10000, "seed": 0, "workers": 1, "bins": population.DEFAULT_BINS,
    "innate_kind": "uniform", "innate_low": -1.0, "innate_high": 1.0, "innate_loc": 0.0,
    "innate_scale": 0.5, "innate_value": 0.0, "innate_truncation": "clip",
    "recommendation_kind": "normal", "recommendation_low": -1.0, "recommendation_high": 1.0,
    "recommendation_loc": 0.0, "recommendation_scale": 0.5, "recommendation_value": 0.0,
    "recommendation_truncation": "clip",
}

DEFAULTS = {
    "analytic": {**SCENARIO_DEFAULTS, "k_values": [0, 1, 2, 5, 10, 100, 1000],
                 "require_prop3": False},
    "simulate": {**SCENARIO_DEFAULTS, **PLATFORM_DEFAULTS, "agent": "both"},
    "enumerate": {**SCENARIO_DEFAULTS, "horizon": 10, "agent": "both"},
    "couple": {**SCENARIO_DEFAULTS, "horizon": 20, "trials": 2000,
               "schedule_a": [3], "schedule_b": [3, 8]},
    "population": dict(POPULATION_DEFAULTS),
}

FIGURES = {
    "fig1": {**POPULATION_DEFAULTS, "horizons": [10, 100]},
    "fig2": {**SCENARIO_DEFAULTS, **PLATFORM_DEFAULTS, "alpha": 0.4, "beta": 0.2, "x0": -1.0,
             "u0": 1.0, "lambda": 0.5, "gamma0": 0.9, "kappa": 1.2, "delta": 0.3, "d": 0.1,
             "horizon": 1000, "trials": 1000},
    "fig3": {**SCENARIO_DEFAULTS, "alpha": 0.3, "beta": 0.2, "x0": -1.0, "u0": 1.0,
             "gamma0": 0.9, "kappa": 1.2, "delta": 0.3, "d": 0.0, "horizon": 5,
             "trials": 5000, "epsilon": 0.02, "sweep": ["alpha", "x0"],
             "alpha_points": 13, "x0_points": 21},
    "fig4": {**SCENARIO_DEFAULTS, **PLATFORM_DEFAULTS, "platform": "explore", "u0": None,
             "period": 5, "x0": -1.0, "alpha": 0.4, "beta": 0.2, "lambda": 0.2, "gamma0": 0.9,
             "kappa": 1.05, "delta": 0.3, "d": 0.1, "horizon": 40, "trials": 1000},
}


class CLIError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# configuration


def load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CLIError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise CLIError(f"{path}: top level must be a JSON object")
    # a manifest from an earlier run carries the resolved configuration
    if "resolved_config" in data:
        data = data["resolved_config"]
    return data


def resolve(defaults: dict, file_cfg: dict, flags: dict, source: str = "config") -> dict:
    cfg = dict(defaults)
    for key, value in file_cfg.items():
        if key not in defaults:
            raise CLIError(f"{source}: unknown field {key!r}")
        cfg[key] = value
    for key, value in flags.items():
        if value is not None and key in defaults:
            cfg[key] = value
    return cfg


def _num(cfg, key, kind=float):
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CLIError(f"field {key!r}: expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise CLIError(f"field {key!r}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _int_list(cfg, key):
    value = cfg[key]
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                               for v in value):
        raise CLIError(f"field {key!r}: expected a list of integers, got {value!r}")
    return value


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigurationError as exc:
        raise CLIError(f"invalid configuration: {exc}") from None


def build_scenario(cfg) -> ScenarioParams:
    u0 = cfg.get("u0")
    u0 = 0.0 if u0 is None else _num(cfg, "u0")
    params = _guard(DynamicsParams, _num(cfg, "alpha"), _num(cfg, "beta"))
    return _guard(ScenarioParams, params, _num(cfg, "x0"), u0, _num(cfg, "gamma0"),
                  _num(cfg, "kappa"), _num(cfg, "delta"), _num(cfg, "lambda"),
                  _num(cfg, "horizon", int))


def _distribution(cfg, prefix):
    fields = {}
    for name in ("low", "high", "loc", "scale", "value"):
        key = f"{prefix}_{name}"
        if key in cfg:
            fields[name] = _num(cfg, key)
    return _guard(Distribution, kind=cfg[f"{prefix}_kind"],
                  truncation=cfg.get(f"{prefix}_truncation", "clip"), **fields)


def build_platform(cfg, scenario) -> PlatformPolicyConfig:
    kind = cfg.get("platform", "fixed")
    if kind == "fixed":
        return _guard(PlatformPolicyConfig, kind="fixed", u0=scenario.u0)
    u0 = None if cfg.get("u0") is None else _num(cfg, "u0")
    return _guard(PlatformPolicyConfig, kind=kind, u0=u0, period=_num(cfg, "period", int),
                  exploration=_distribution(cfg, "exploration"))


def build_experiment(cfg, agent_kind, schedule=()):
    scenario = build_scenario(cfg)
    if scenario.horizon < 1:
        raise CLIError("field 'horizon': must be >= 1")
    platform = build_platform(cfg, scenario)
    trials, seed = _num(cfg, "trials", int), _num(cfg, "seed", int)
    return _guard(montecarlo.make_experiment, scenario, agent_kind, d=_num(cfg, "d"),
                  trials=trials, seed=seed, platform=platform, schedule=schedule)


def _agent_kinds(cfg):
    agent = cfg["agent"]
    if agent == "both":
        return ["fixed", "adaptive"]
    if agent not in ("fixed", "adaptive"):
        raise CLIError(f"field 'agent': expected fixed, adaptive or both, got {agent!r}")
    return [agent]


def build_population(cfg) -> population.PopulationConfig:
    params = _guard(DynamicsParams, _num(cfg, "alpha"), _num(cfg, "beta"))
    return _guard(population.PopulationConfig, _num(cfg, "num_agents", int), params,
                  _num(cfg, "gamma0"), _num(cfg, "kappa"), _num(cfg, "delta"),
                  _num(cfg, "horizon", int), _distribution(cfg, "innate"),
                  _distribution(cfg, "recommendation"), _num(cfg, "seed", int))


# --------------------------------------------------------------------------
# output


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (str, bool)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return format(v, ".12g")


class Output:
    def __init__(self, out_dir, command, cfg):
        self.dir = Path(out_dir)
        self.command = command
        self.cfg = cfg
        self.files = []
        self.extra = {}
        self.dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name, header, rows):
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) for v in row])
        self.files.append(name)
        return path

    def json(self, name, payload):
        path = self.dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.files.append(name)
        return path

    def manifest(self):
        manifest = {
            "tool": "reactive_drift", "version": __version__, "command": self.command,
            "resolved_config": self.cfg, "master_seed": self.cfg.get("seed"),
            "generator": montecarlo.GENERATOR_ID, "numpy_version": np.__version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "outputs": list(self.files), **self.extra,
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def series_rows(est: montecarlo.SeriesEstimate, policy: str):
    for k in range(est.horizon + 1):
        yield (k, policy, est.mean_opinion[k], est.se_opinion[k], est.mean_utility[k],
               est.se_utility[k], est.mean_payoff[k], est.se_payoff[k], est.mean_gamma[k],
               est.se_gamma[k])


# --------------------------------------------------------------------------
# commands


def analytic_report(cfg) -> dict:
    s = build_scenario(cfg)
    ks = _int_list(cfg, "k_values")
    if any(k < 0 for k in ks):
        raise CLIError("field 'k_values': entries must be non-negative")
    report = {
        "scenario": s.to_dict(),
        "expected_opinion_fixed": {str(k): analytics.expected_opinion_fixed(k, s) for k in ks},
        "limit_opinion_fixed": analytics.limit_opinion_fixed(s),
        "deviation_reachable": analytics.deviation_reachable(s),
        "literal_convergence_condition": analytics.literal_gamma_condition(s),
        "max_all_click_drift": analytics.max_all_click_drift(s),
        "degenerate": s.params.degenerate,
    }
    report["reachability_disagrees_with_literal_condition"] = (
        report["deviation_reachable"] != report["literal_convergence_condition"])
    try:
        report["limit_opinion_adaptive"] = analytics.limit_opinion_adaptive(s)
    except ApplicabilityError as exc:
        report["limit_opinion_adaptive"] = None
        report["adaptive_status"] = "coincides with fixed"
        report["adaptive_diagnostic"] = str(exc)
    fixed_u, adaptive_u = analytics.limit_utilities(s)
    if not report["deviation_reachable"]:
        # the adaptive policy never reduces, so its long-run utility is the fixed one
        adaptive_u = fixed_u
    report["limit_utilities"] = {"fixed": fixed_u, "adaptive": adaptive_u,
                                 "assumes_unit_reward": True}
    try:
        report["longrun_lambda_threshold"] = analytics.longrun_lambda_threshold(s)
    except ApplicabilityError as exc:
        report["longrun_lambda_threshold"] = None
        report["longrun_lambda_diagnostic"] = str(exc)
    report["min_clicks_to_deviate"] = analytics.min_clicks_to_deviate(s)
    report["min_skips_to_return"] = analytics.min_skips_to_return(s)
    try:
        bound = analytics.prop3_bound(s)
        report["prop3"] = {"applicable": True, **bound.to_dict()}
    except ApplicabilityError as exc:
        report["prop3"] = {"applicable": False, "reason": str(exc)}
    return report


def cmd_analytic(cfg, out: Output):
    report = analytic_report(cfg)
    out.csv("analytic_curve.csv", ["k", "expected_opinion_fixed"],
            [(int(k), v) for k, v in report["expected_opinion_fixed"].items()])
    out.json("analytic.json", report)
    print(json.dumps(report, indent=2))
    if cfg["require_prop3"] and not report["prop3"]["applicable"]:
        out.manifest()
        raise CLIError(f"finite-horizon bound inapplicable: {report['prop3']['reason']}",
                       EXIT_APPLICABILITY)


def cmd_simulate(cfg, out: Output, name="simulate.csv"):
    workers = _num(cfg, "workers", int)
    rows = []
    for kind in _agent_kinds(cfg) if "agent" in cfg else ["fixed", "adaptive"]:
        exp = build_experiment(cfg, kind)
        rows.extend(series_rows(montecarlo.run_experiment(exp, workers), kind))
    out.csv(name, SERIES_COLUMNS, rows)


def cmd_enumerate(cfg, out: Output):
    rows, summary = [], []
    for kind in _agent_kinds(cfg):
        exp = build_experiment(cfg, kind)
        if exp.horizon > montecarlo.ENUMERATION_CAP:
            raise CLIError(f"field 'horizon': enumeration is capped at K <= "
                           f"{montecarlo.ENUMERATION_CAP} (2^K paths), got {exp.horizon}")
        ex = _guard(montecarlo.enumerate_exact, exp)
        for k in range(exp.horizon + 1):
            rows.append((k, kind, ex.opinion[k], ex.utility[k], ex.payoff[k], ex.gamma[k]))
        if kind == "fixed":
            disc = montecarlo.enumeration_discrepancy(exp)
            summary.append(("fixed", disc))
            out.extra["max_abs_discrepancy_closed_form"] = disc
            print(f"max |exact - closed form| = {disc:.3e}")
    out.csv("enumerate.csv", ["k", "policy", "exact_opinion", "exact_utility",
                              "exact_payoff", "exact_gamma"], rows)
    if summary:
        out.csv("enumerate_summary.csv", ["policy", "max_abs_discrepancy_closed_form"], summary)


def cmd_couple(cfg, out: Output):
    sa, sb = _int_list(cfg, "schedule_a"), _int_list(cfg, "schedule_b")
    exp = build_experiment(cfg, "fixed")
    try:
        montecarlo._check_nested(sa, sb)
        a = montecarlo.simulate_trials(montecarlo._forced(exp, sa), _num(cfg, "workers", int))
        b = montecarlo.simulate_trials(montecarlo._forced(exp, sb), _num(cfg, "workers", int))
    except ConfigurationError as exc:
        raise CLIError(f"invalid configuration: {exc}") from None
    x0 = exp.scenario.x0
    da, db = np.abs(a.opinions[:, -1] - x0), np.abs(b.opinions[:, -1] - x0)
    cv = np.any(b.clicks > a.clicks, axis=1)
    dv = db > da
    out.csv("couple.csv", ["trial_index", "clicks_a", "clicks_b", "drift_a", "drift_b",
                           "click_violation", "drift_violation"],
            ((i, int(a.clicks[i].sum()), int(b.clicks[i].sum()), da[i], db[i], int(cv[i]),
              int(dv[i])) for i in range(exp.trials)))
    summary = [("G_a", a.clicks.mean()), ("G_b", b.clicks.mean()), ("D_a", da.mean()),
               ("D_b", db.mean()), ("click_violations", int(cv.sum())),
               ("drift_violations", int(dv.sum()))]
    out.csv("couple_summary.csv", ["metric", "value"], summary)
    print(f"dominance violations: clicks={int(cv.sum())} drift={int(dv.sum())}")


def _population_outputs(pcfg, res, out: Output, prefix, bins):
    out.csv(f"{prefix}population.csv", POPULATION_COLUMNS,
            ((i, res.innate[i], res.recommendations[i], res.final_fixed[i],
              res.final_adaptive[i]) for i in range(len(res.innate))))
    edges = np.linspace(-1.0, 1.0, bins + 1)
    mask = population.unreachable_mask(pcfg, res)
    summary = {
        "bins": bins,
        "bin_edges": [float(e) for e in edges],
        "histogram": {
            "innate": population.histogram(res.innate, bins).tolist(),
            "recommendation": population.histogram(res.recommendations, bins).tolist(),
            "final_fixed": population.histogram(res.final_fixed, bins).tolist(),
            "final_adaptive": population.histogram(res.final_adaptive, bins).tolist(),
        },
        "wasserstein1": {
            "fixed_vs_innate": population.wasserstein1(res.final_fixed, res.innate),
            "adaptive_vs_innate": population.wasserstein1(res.final_adaptive, res.innate),
        },
        "unreachable_agents": int(mask.sum()),
        "unreachable_agents_with_unequal_finals": int(
            np.sum(res.final_fixed[mask] != res.final_adaptive[mask])),
    }
    out.json(f"{prefix}population_summary.json", summary)
    return summary


def cmd_population(cfg, out: Output):
    pcfg = build_population(cfg)
    res = population.run_population(pcfg, _num(cfg, "workers", int))
    summary = _population_outputs(pcfg, res, out, "", _num(cfg, "bins", int))
    print(json.dumps(summary["wasserstein1"]))


def cmd_reproduce(figure, cfg, out: Output):
    if figure == "fig1":
        hs = _int_list(cfg, "horizons")
        for K in hs:
            pcfg = build_population({**cfg, "horizon": K})
            res = population.run_population(pcfg, _num(cfg, "workers", int))
            _population_outputs(pcfg, res, out, f"fig1_K{K}_", _num(cfg, "bins", int))
    elif figure in ("fig2", "fig4"):
        cmd_simulate(cfg, out, name=f"{figure}.csv")
    elif figure == "fig3":
        sweeps = cfg["sweep"]
        if isinstance(sweeps, str):
            sweeps = [sweeps]
        for param in sweeps:
            out.csv(f"fig3_{param}.csv", SWEEP_COLUMNS, fig3_sweep(cfg, param))


def fig3_sweep(cfg, param):
    beta = _num(cfg, "beta")
    if param == "alpha":
        values = np.linspace(beta, 1.0 - beta, _num(cfg, "alpha_points", int))
    elif param == "x0":
        values = np.linspace(-1.0, 1.0, _num(cfg, "x0_points", int))
    else:
        raise CLIError(f"field 'sweep': expected 'alpha' or 'x0', got {param!r}")
    eps = _num(cfg, "epsilon")
    rows = []
    for v in values:
        point = {**cfg, param: float(v)}
        s = build_scenario(point)
        try:
            lam_star = analytics.prop3_bound(s).lambda_star
        except ApplicabilityError:
            rows.append((param, float(v), math.nan, math.nan, math.nan))
            continue
        lam = max(0.0, lam_star - eps)
        exp = build_experiment({**point, "lambda": lam}, "adaptive")
        m, se = montecarlo.utility_difference(exp, _num(cfg, "workers", int))
        rows.append((param, float(v), lam_star, m, se))
    return rows


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (or a manifest.json of an earlier run)")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--trials", type=int)
    common.add_argument("--horizon", type=int)
    common.add_argument("--workers", type=int, help="worker processes; output is identical for any value")
    common.add_argument("--out", default="out", help="output directory")

    parser = argparse.ArgumentParser(prog="reactive-drift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analytic", parents=[common], help="closed-form report")
    p.add_argument("--require-prop3", action="store_true", default=None,
                   help="exit with code 3 if the finite-horizon bound is inapplicable")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo series")
    sub.add_parser("enumerate", parents=[common], help="exact expectations over all click paths")
    sub.add_parser("population", parents=[common], help="population of independent agents")
    sub.add_parser("couple", parents=[common], help="coupled forced-reduction schedules")
    p = sub.add_parser("reproduce", parents=[common], help="canned figure experiments")
    p.add_argument("figure", choices=sorted(FIGURES))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {"seed": args.seed, "trials": args.trials, "horizon": args.horizon,
             "workers": args.workers, "require_prop3": getattr(args, "require_prop3", None)}
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        if args.command == "reproduce":
            defaults = FIGURES[args.figure]
            if args.figure == "fig1" and args.horizon is not None:
                flags["horizons"] = [args.horizon]
                flags["horizon"] = None
            cfg = resolve(defaults, file_cfg, flags, args.config or "config")
            out = Output(args.out, f"reproduce {args.figure}", cfg)
            cmd_reproduce(args.figure, cfg, out)
        else:
            cfg = resolve(DEFAULTS[args.command], file_cfg, flags, args.config or "config")
            out = Output(args.out, args.command, cfg)
            {"analytic": cmd_analytic, "simulate": cmd_simulate, "enumerate": cmd_enumerate,
             "couple": cmd_couple, "population": cmd_population}[args.command](cfg, out)
        out.manifest()
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return 0


def main():
    sys.exit(run())
