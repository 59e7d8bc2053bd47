"""Config-driven experiment runner.

Subcommands: ``run <config.json>`` executes one experiment and writes a
JSON report (plus CSV series where applicable); ``selftest`` runs a fast
subset of the acceptance checks.  Config files are JSON objects::

    {
      "experiment": "price" | "sphere" | "bell-scan" | "market" | "convergence",
      "seed": 12345,            # optional, default 0
      "params": { ... }         # experiment-specific block, see README
    }

Exit codes: 0 success, 2 config parse error, 3 parameter validation error,
4 runtime error.  Reports echo the fully resolved configuration, so any
result is reproducible from its own output; the same config and seed
produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .geometry import UnitVector3, from_polar
from .kolmogorov_check import (
    AgreementTable,
    bell_facets_n3,
    facets_feasible,
    joint_feasibility,
    random_agreement_table,
    sphere_bell_scan,
)
from .market_sim import MarketConfig, compare_with_gbm, run_market, summary_stats, trades_to_csv
from .pricing import (
    GbmParams,
    OptionKind,
    OptionSpec,
    binomial_price,
    bs_price,
    mc_price,
    pricing_report,
)
from .sphere_model import (
    RhoDistribution,
    UniformRho,
    measurement_counts,
    transition_probabilities,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

EXPERIMENT_KINDS = ("price", "sphere", "bell-scan", "market", "convergence")


class ConfigParseError(Exception):
    """Malformed config: bad JSON, wrong types, unknown or missing keys."""


def _take(d: dict, context: str, required=(), optional=None) -> dict:
    """Key discipline for config blocks: reject unknown keys by name."""
    if not isinstance(d, dict):
        raise ConfigParseError(f"'{context}' must be an object")
    optional = dict(optional or {})
    out = {}
    remaining = dict(d)
    for key in required:
        if key not in remaining:
            raise ConfigParseError(f"missing key '{key}' in '{context}'")
        out[key] = remaining.pop(key)
    for key, default in optional.items():
        out[key] = remaining.pop(key, default)
    if remaining:
        offending = sorted(remaining)[0]
        raise ConfigParseError(f"unknown key '{offending}' in '{context}'")
    return out


def _as_direction(value, context: str) -> UnitVector3:
    if isinstance(value, dict):
        angles = _take(value, context, required=("theta",), optional={"phi": 0.0})
        return from_polar(float(angles["theta"]), float(angles["phi"]))
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return UnitVector3.normalized(*[float(c) for c in value])
    raise ConfigParseError(f"'{context}' must be [x, y, z] or {{\"theta\": ..., \"phi\": ...}}")


def _sanitize(obj):
    """NaN/inf are not valid JSON scalars; map them to null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_report(report: dict) -> str:
    return json.dumps(_sanitize(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


# --- experiment runners ----------------------------------------------------
# Each runner parses its params block (ConfigParseError on malformed input),
# builds domain objects (ValueError -> validation failure), computes, and
# returns (resolved_params, results, {filename: text}).


def _run_price(params: dict, seed: int):
    p = _take(params, "params", required=("spec",),
              optional={"methods": ["bs"], "binomial_steps": 1000, "mc_paths": 100_000})
    spec_block = _take(p["spec"], "params.spec",
                       required=("spot", "strike", "rate", "sigma", "tau"),
                       optional={"kind": "call", "style": "european"})
    methods = p["methods"]
    if not isinstance(methods, list) or not methods:
        raise ConfigParseError("'params.methods' must be a non-empty list")
    for m in methods:
        if m not in ("bs", "binomial", "mc"):
            raise ConfigParseError(f"unknown key '{m}' in 'params.methods'")
    spec = OptionSpec.from_dict(spec_block)

    results = []
    for m in methods:
        if m == "bs":
            results.append(pricing_report(spec, "black_scholes", bs_price(spec)))
        elif m == "binomial":
            steps = int(p["binomial_steps"])
            results.append(pricing_report(spec, "binomial", binomial_price(spec, steps),
                                          extra={"steps": steps}))
        else:
            n_paths = int(p["mc_paths"])
            value, stderr = mc_price(spec, n_paths, seed=seed)
            results.append(pricing_report(spec, "monte_carlo", value,
                                          error_estimate=stderr,
                                          extra={"n_paths": n_paths}))
    resolved = {"spec": spec.to_dict(), "methods": methods,
                "binomial_steps": int(p["binomial_steps"]),
                "mc_paths": int(p["mc_paths"])}
    return resolved, {"results": results, "value": results[0]["value"]}, {}


def _run_sphere(params: dict, seed: int):
    p = _take(params, "params", required=("rho", "state", "direction"),
              optional={"n_trials": 100_000, "workers": 1})
    rho = RhoDistribution.from_dict(p["rho"])
    state = _as_direction(p["state"], "params.state")
    direction = _as_direction(p["direction"], "params.direction")
    n_trials = int(p["n_trials"])
    workers = int(p["workers"])

    p1, p2 = transition_probabilities(rho, state, direction)
    n1, n2 = measurement_counts(rho, state, direction, n_trials, seed, n_workers=workers)
    results = {
        "analytic": {"p1": p1, "p2": p2},
        "monte_carlo": {"n_trials": n_trials, "count_o1": n1, "count_o2": n2,
                        "freq_o1": n1 / n_trials},
    }
    resolved = {"rho": rho.to_dict(),
                "state": [state.x, state.y, state.z],
                "direction": [direction.x, direction.y, direction.z],
                "n_trials": n_trials, "workers": workers}
    return resolved, results, {}


def _run_bell_scan(params: dict, seed: int):
    p = _take(params, "params", required=("rho",),
              optional={"theta": None, "theta_degrees": None,
                        "mode": "auto", "n_samples": 100_000})
    if (p["theta"] is None) == (p["theta_degrees"] is None):
        raise ConfigParseError(
            "exactly one of 'theta' (radians) or 'theta_degrees' is required in 'params'"
        )
    theta = float(p["theta"]) if p["theta"] is not None else math.radians(float(p["theta_degrees"]))
    rho = RhoDistribution.from_dict(p["rho"])
    scan = sphere_bell_scan(rho, theta, mode=p["mode"],
                            n_samples=int(p["n_samples"]), seed=seed)
    resolved = {"rho": rho.to_dict(), "theta": theta, "mode": scan.mode,
                "n_samples": int(p["n_samples"])}
    return resolved, scan.to_dict(), {}


def _run_market(params: dict, seed: int):
    p = _take(params, "params", required=("market",),
              optional={"compare_gbm": None, "write_trades": True})
    market_block = _take(p["market"], "params.market",
                         required=("rho", "n_steps", "regime"),
                         optional={"price_axis": [0.0, 0.0, 1.0],
                                   "price_min": 50.0, "price_max": 150.0})
    market_block["seed"] = seed
    cfg = MarketConfig.from_dict(market_block)

    files = {}
    if p["compare_gbm"] is not None:
        gbm = GbmParams.from_dict(
            _take(p["compare_gbm"], "params.compare_gbm",
                  required=("s0", "drift", "sigma", "horizon", "steps"))
        )
        results = compare_with_gbm(cfg, gbm)
    else:
        trades = run_market(cfg)
        results = {"config": cfg.to_dict(), "stats": summary_stats(trades).to_dict()}
    if p["write_trades"]:
        trades = run_market(cfg)  # deterministic: same seed, same history
        buf = io.StringIO()
        trades_to_csv(buf, trades)
        files["market_trades.csv"] = buf.getvalue()
    resolved = {"market": cfg.to_dict(),
                "compare_gbm": None if p["compare_gbm"] is None else dict(p["compare_gbm"]),
                "write_trades": bool(p["write_trades"])}
    return resolved, results, files


def _run_convergence(params: dict, seed: int):
    p = _take(params, "params", required=("spec",),
              optional={"steps": [50, 100, 200, 400, 800, 1600]})
    spec_block = _take(p["spec"], "params.spec",
                       required=("spot", "strike", "rate", "sigma", "tau"),
                       optional={"kind": "call", "style": "european"})
    steps = [int(s) for s in p["steps"]]
    if len(steps) < 2:
        raise ConfigParseError("'params.steps' needs at least two entries")
    spec = OptionSpec.from_dict(spec_block)

    reference = bs_price(spec)
    errors = [abs(binomial_price(spec, n) - reference) for n in steps]
    slope = float(np.polyfit(np.log(steps), np.log(errors), 1)[0]) if min(errors) > 0 else None
    rows = ["steps,abs_error"] + [f"{n},{e!r}" for n, e in zip(steps, errors)]
    files = {"convergence_errors.csv": "\r\n".join(rows) + "\r\n"}
    results = {"reference_value": reference, "steps": steps,
               "abs_errors": errors, "loglog_slope": slope}
    resolved = {"spec": spec.to_dict(), "steps": steps}
    return resolved, results, files


_RUNNERS = {
    "price": _run_price,
    "sphere": _run_sphere,
    "bell-scan": _run_bell_scan,
    "market": _run_market,
    "convergence": _run_convergence,
}


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON: {exc}") from exc
    top = _take(raw, "config", required=("experiment",),
                optional={"seed": 0, "params": {}})
    if top["experiment"] not in EXPERIMENT_KINDS:
        raise ConfigParseError(
            f"unknown experiment '{top['experiment']}' (expected one of {EXPERIMENT_KINDS})"
        )
    if not isinstance(top["seed"], int):
        raise ConfigParseError("'seed' must be an integer")
    return top


def run(config_path: str, seed_override: int | None = None, out_dir: str = ".") -> int:
    """Execute the experiment described by the config file.

    Writes ``<experiment>_report.json`` (plus any series CSVs) under
    ``out_dir``.  Returns the process exit code.
    """
    try:
        config = load_config(config_path)
        kind = config["experiment"]
        seed = seed_override if seed_override is not None else config["seed"]
        runner = _RUNNERS[kind]
    except ConfigParseError as exc:
        _emit_error("parse", str(exc))
        return EXIT_PARSE

    try:
        resolved, results, files = runner(config["params"], seed)
    except ConfigParseError as exc:
        _emit_error("parse", str(exc))
        return EXIT_PARSE
    except (ValueError, TypeError) as exc:
        _emit_error("validation", str(exc))
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        _emit_error("runtime", f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME

    report = {
        "experiment": kind,
        "seed": seed,
        "params": resolved,
        "results": results,
    }
    os.makedirs(out_dir, exist_ok=True)
    report_path = os.path.join(out_dir, f"{kind.replace('-', '_')}_report.json")
    _atomic_write(report_path, _dump_report(report))
    print(f"wrote {report_path}")
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        _atomic_write(path, text)
        print(f"wrote {path}")
    return EXIT_OK


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}},
                                sort_keys=True) + "\n")


# --- selftest ---------------------------------------------------------------

_PROBE_TABLES = (
    (0.25, 0.25, 0.25),
    (1.0, 1.0, 1.0),
    (0.5, 0.0, 0.5),
    (0.31, 0.31, 0.31),
    (0.32, 0.32, 0.32),
    (0.55, 0.05, 0.55),
)


def _check_parity() -> tuple[bool, str]:
    rng = np.random.default_rng(1812)
    worst = 0.0
    for _ in range(200):
        spot, strike = rng.uniform(10, 200), rng.uniform(10, 200)
        rate, sigma = rng.uniform(0.0, 0.1), rng.uniform(0.05, 0.6)
        tau = rng.uniform(0.05, 3.0)
        call = bs_price(OptionSpec(spot, strike, rate, sigma, tau, kind=OptionKind.CALL))
        put = bs_price(OptionSpec(spot, strike, rate, sigma, tau, kind=OptionKind.PUT))
        rhs = spot - strike * math.exp(-rate * tau)
        worst = max(worst, abs(call - put - rhs))
    return worst <= 1e-12, f"max parity deviation {worst:.3g}"


def _check_rho_normalization() -> tuple[bool, str]:
    from .sphere_model import DeltaRho, PiecewiseConstantRho, TruncatedGaussianRho

    rhos = [
        UniformRho(),
        DeltaRho(0.2),
        PiecewiseConstantRho([-1.0, -0.25, 0.5, 1.0], [0.5, 2.0, 1.0]),
        TruncatedGaussianRho(center=0.1, width=0.4),
    ]
    for rho in rhos:
        if rho.cdf(-1.0) != 0.0 or rho.cdf(1.0) != 1.0:
            return False, f"{rho!r} violates cdf(-1)=0, cdf(1)=1"
        grid = np.linspace(-1.0, 1.0, 201)
        vals = [rho.cdf(float(x)) for x in grid]
        if np.any(np.diff(vals) < -1e-15):
            return False, f"{rho!r} cdf not nondecreasing"
    return True, f"{len(rhos)} variants normalized"


def _check_lp_vs_facets() -> tuple[bool, str]:
    rng = np.random.default_rng(2718)
    tables = [AgreementTable.from_pair_values(3, v) for v in _PROBE_TABLES]
    tables += [random_agreement_table(3, rng) for _ in range(100)]
    for idx, table in enumerate(tables):
        lp = joint_feasibility(table).feasible
        facets = facets_feasible(bell_facets_n3(table))
        if lp != facets:
            return False, f"table {idx}: LP={lp} facets={facets}"
    return True, f"{len(tables)} tables agree"


def _check_uniform_closed_form() -> tuple[bool, str]:
    rho = UniformRho()
    pole = UnitVector3(0.0, 0.0, 1.0)
    worst = 0.0
    for deg in range(15, 180, 15):
        theta = math.radians(deg)
        p1, _ = transition_probabilities(rho, from_polar(theta, 0.0), pole)
        worst = max(worst, abs(p1 - math.cos(theta / 2.0) ** 2))
    return worst <= 1e-12, f"max closed-form deviation {worst:.3g}"


SELFTEST_CHECKS = (
    ("put_call_parity", _check_parity),
    ("rho_normalization", _check_rho_normalization),
    ("lp_vs_facets_n3", _check_lp_vs_facets),
    ("uniform_cos2_half_angle", _check_uniform_closed_form),
)


def selftest() -> int:
    """Fast subset of the acceptance checks; exit 0 iff all pass."""
    failed = []
    for name, check in SELFTEST_CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # noqa: BLE001 - report, don't crash
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        print(f"selftest {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        if not ok:
            failed.append(name)
    if failed:
        print(f"selftest FAILED: {', '.join(failed)}")
        return 1
    print("selftest OK")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spheremarket",
        description="Run sphere-market experiments from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config", help="path to the JSON config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=".", help="output directory for reports")
    sub.add_parser("selftest", help="run the fast acceptance subset")

    args = parser.parse_args(argv)
    if args.command == "selftest":
        return selftest()
    return run(args.config, seed_override=args.seed, out_dir=args.out)


if __name__ == "__main__":
    sys.exit(main())
