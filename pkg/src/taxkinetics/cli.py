"""Command-line interface: config files in, CSV/JSON artifacts out.

Subcommands: ``run`` (single scenario to stationarity), ``sweep`` (graded
evasion levels plus quadratic fit), ``compare`` (evasion vs full
compliance), ``spread`` (widespread vs concentrated evasion) and
``validate`` (invariant suite). Every artifact-producing command also
writes a manifest that fully describes the run; pointing ``--config`` at a
manifest reproduces the run bit for bit.

Config files are JSON, or TOML when the filename ends in ``.toml``. All
rates and shares in files are fractions; percentages appear only in
rendered report tables and in the ``--eta`` flag.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .checks import run_validation_suite
from .config import ModelConfig, default_config
from .errors import ConfigError, KineticModelError
from .experiments import (
    InitialConditionSpec,
    compare_compliance_vs_evasion,
    evasion_sweep,
    fit_quadratic_through_origin,
    run_scenario,
    spread_comparison,
)
from .integrate import IntegrationOptions

__all__ = ["main", "load_config"]

_FULL = "%.17g"    # state dumps: full double precision
_TABLE = "%.4g"    # report tables: 4 significant digits

_CONFIG_KEYS = {"n", "m", "S", "incomes", "incomes_rule", "tau", "tau_min",
                "tau_max", "theta_ev", "sector_shares", "ic", "integ"}
_IC_KEYS = {"mode", "profile", "x", "target_mu"}
_INTEG_KEYS = {"dt", "max_time", "stationarity_tol", "drift_tol"}

_INCOME_RULE = re.compile(r"^\s*([0-9.eE+-]+)\s*\*\s*j\s*$")


# ---------------------------------------------------------------- loading

def _read_document(path: Path) -> dict:
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: TOML parse error: {exc}") from exc
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc


def _parse_incomes(doc: dict, path: Path) -> np.ndarray:
    if "incomes" in doc:
        return np.asarray(doc["incomes"], dtype=float)
    rule = doc.get("incomes_rule")
    if rule is None:
        raise ConfigError(f"{path}: either incomes or incomes_rule is required")
    match = _INCOME_RULE.match(str(rule))
    if not match:
        raise ConfigError(
            f"{path}: incomes_rule must look like '10*j', got {rule!r}")
    if "n" not in doc:
        raise ConfigError(f"{path}: incomes_rule requires the class count n")
    step = float(match.group(1))
    return step * np.arange(1, int(doc["n"]) + 1, dtype=float)


def _reject_unknown(doc: dict, allowed: set, where: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def load_config(path) -> tuple[ModelConfig, IntegrationOptions, InitialConditionSpec]:
    """Parse and validate a config (or manifest) file.

    Returns the model configuration, the integration options and the
    initial-condition spec, with defaults filled in for anything optional
    that is absent.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    doc = _read_document(path)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a table/object")

    if isinstance(doc.get("config"), dict) and "engine_version" in doc:
        # manifest written by a previous run
        merged = dict(doc["config"])
        if isinstance(doc.get("ic"), dict):
            merged["ic"] = doc["ic"]
        if isinstance(doc.get("integ"), dict):
            merged["integ"] = doc["integ"]
        doc = merged

    _reject_unknown(doc, _CONFIG_KEYS, str(path))

    incomes = _parse_incomes(doc, path)
    if "n" in doc and int(doc["n"]) != incomes.shape[0]:
        raise ConfigError(
            f"{path}: n={doc['n']} does not match {incomes.shape[0]} income entries")

    if "theta_ev" not in doc:
        raise ConfigError(f"{path}: theta_ev is required")
    if "sector_shares" not in doc:
        raise ConfigError(f"{path}: sector_shares is required")
    theta_ev = np.asarray(doc["theta_ev"], dtype=float)
    if "m" in doc and int(doc["m"]) != theta_ev.shape[0]:
        raise ConfigError(
            f"{path}: m={doc['m']} does not match {theta_ev.shape[0]} theta_ev entries")

    config = ModelConfig(
        incomes=incomes,
        theta_ev=theta_ev,
        sector_shares=np.asarray(doc["sector_shares"], dtype=float),
        exchange_amount=float(doc.get("S", 1.0)),
        tau_min=None if "tau_min" not in doc else float(doc["tau_min"]),
        tau_max=None if "tau_max" not in doc else float(doc["tau_max"]),
        tax_rates=None if "tau" not in doc else np.asarray(doc["tau"], dtype=float),
    )

    integ_doc = doc.get("integ", {})
    _reject_unknown(integ_doc, _INTEG_KEYS, f"{path}: integ")
    opts = IntegrationOptions(**{k: float(v) for k, v in integ_doc.items()})

    ic_doc = doc.get("ic", {})
    _reject_unknown(ic_doc, _IC_KEYS, f"{path}: ic")
    ic = InitialConditionSpec(
        mode=ic_doc.get("mode", "uniform"),
        x0=None if "x" not in ic_doc else np.asarray(ic_doc["x"], dtype=float),
        profile=None if "profile" not in ic_doc else np.asarray(ic_doc["profile"], dtype=float),
        target_mu=None if "target_mu" not in ic_doc else float(ic_doc["target_mu"]),
    )
    return config, opts, ic


# --------------------------------------------------------------- manifests

def _config_to_dict(config: ModelConfig) -> dict:
    out = {
        "n": config.n,
        "m": config.m,
        "S": float(config.exchange_amount),
        "incomes": [float(v) for v in config.incomes],
        "theta_ev": [float(v) for v in config.theta_ev],
        "sector_shares": [float(v) for v in config.sector_shares],
    }
    if config.tax_rates is not None:
        out["tau"] = [float(v) for v in config.tax_rates]
    else:
        out["tau_min"] = float(config.tau_min)
        out["tau_max"] = float(config.tau_max)
    return out


def _ic_to_dict(ic: InitialConditionSpec) -> dict:
    out = {"mode": ic.mode}
    if ic.profile is not None:
        out["profile"] = [float(v) for v in ic.profile]
    if ic.x0 is not None:
        out["x"] = [[float(v) for v in row] for row in ic.x0]
    if ic.target_mu is not None:
        out["target_mu"] = float(ic.target_mu)
    return out


def _integ_to_dict(opts: IntegrationOptions) -> dict:
    return {
        "dt": opts.dt,
        "max_time": opts.max_time,
        "stationarity_tol": opts.stationarity_tol,
        "drift_tol": opts.drift_tol,
    }


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, command: str, config: ModelConfig,
                    opts: IntegrationOptions, ic: InitialConditionSpec,
                    outputs: list[str], extra: dict | None = None):
    manifest = {
        "engine": "taxkinetics",
        "engine_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "config": _config_to_dict(config),
        "ic": _ic_to_dict(ic),
        "integ": _integ_to_dict(opts),
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    _write_json(out_dir / "manifest.json", manifest)


# ----------------------------------------------------------------- writers

def _open_csv(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _write_state_csv(path: Path, x: np.ndarray):
    fh, writer = _open_csv(path)
    with fh:
        writer.writerow(["j", "alpha", "x"])
        for j in range(x.shape[0]):
            for a in range(x.shape[1]):
                writer.writerow([j + 1, a + 1, _FULL % x[j, a]])


def _write_trajectory_csv(path: Path, samples, incomes: np.ndarray):
    fh, writer = _open_csv(path)
    with fh:
        n, m = samples[0][1].shape
        header = ["t"] + [f"x_{j + 1}_{a + 1}" for j in range(n) for a in range(m)]
        writer.writerow(header + ["sum", "mu"])
        for t, x in samples:
            row = [_FULL % t] + [_FULL % v for v in x.ravel()]
            row.append(_FULL % x.sum())
            row.append(_FULL % float(incomes @ x.sum(axis=1)))
            writer.writerow(row)


def _write_sweep_csv(path: Path, rows):
    fh, writer = _open_csv(path)
    with fh:
        writer.writerow(["eta_pct", "theta1_pct", "theta2_pct", "theta3_pct",
                         "gap_pct", "gini", "converged", "residual"])
        for row in rows:
            writer.writerow([
                _TABLE % (100.0 * row.eta),
                _TABLE % (100.0 * row.theta_ev[0]),
                _TABLE % (100.0 * row.theta_ev[1]),
                _TABLE % (100.0 * row.theta_ev[2]),
                _TABLE % (100.0 * row.income_gap),
                _TABLE % row.gini_total,
                "true" if row.converged else "false",
                _TABLE % row.residual,
            ])


def _write_compare_csv(path: Path, delta: np.ndarray):
    fh, writer = _open_csv(path)
    with fh:
        writer.writerow(["class", "delta_fraction"])
        for j, v in enumerate(delta, start=1):
            writer.writerow([j, _TABLE % v])


# ---------------------------------------------------------------- commands

def _resolve_inputs(args) -> tuple[ModelConfig, IntegrationOptions, InitialConditionSpec]:
    if args.config is not None:
        return load_config(args.config)
    return default_config(), IntegrationOptions(), InitialConditionSpec()


def _cmd_run(args) -> int:
    config, opts, ic = _resolve_inputs(args)
    out_dir = _ensure_out(args)
    stride = args.dump_trajectory
    result, report = run_scenario(config, ic, opts, sample_stride=stride)

    _write_state_csv(out_dir / "state.csv", result.state)
    _write_json(out_dir / "metrics.json", report.to_dict())
    outputs = ["state.csv", "metrics.json"]
    if stride is not None:
        _write_trajectory_csv(out_dir / "trajectory.csv", result.samples, config.incomes)
        outputs.append("trajectory.csv")
    _write_manifest(out_dir, "run", config, opts, ic, outputs, extra={
        "result": {"converged": result.converged, "final_time": result.final_time,
                   "residual": result.residual, "n_steps": result.n_steps}})

    status = "converged" if result.converged else "NOT converged"
    print(f"{status} at t={result.final_time:g} (residual {result.residual:.3e}), "
          f"gini={report.gini_total:.4f}, income gap={100 * report.income_gap:.2f}%")
    print(f"wrote {', '.join(outputs)} to {out_dir}")
    return 0


def _parse_eta_percent(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--eta expects comma-separated numbers, got {text!r}") from exc
    if not values:
        raise ConfigError("--eta list is empty")
    return [v / 100.0 for v in values]


def _cmd_sweep(args) -> int:
    config, opts, ic = _resolve_inputs(args)
    out_dir = _ensure_out(args)
    etas = _parse_eta_percent(args.eta)

    rows = evasion_sweep(config, etas, ic, opts)
    for row in rows:
        print(f"eta={100 * row.eta:5.1f}%  gap={100 * row.income_gap:6.2f}%  "
              f"gini={row.gini_total:.4f}  converged={row.converged}")

    _write_sweep_csv(out_dir / "sweep.csv", rows)
    outputs = ["sweep.csv"]
    fit_extra = {}
    fittable = [(r.eta, r.income_gap) for r in rows if r.eta > 0.0]
    if len({e for e, _ in fittable}) >= 2:
        a, b = fit_quadratic_through_origin(fittable)
        _write_json(out_dir / "fit.json", {
            "model": "income_gap = a*eta^2 + b*eta (fractions)",
            "a": a, "b": b, "n_points": len(fittable)})
        outputs.append("fit.json")
        fit_extra = {"fit": {"a": a, "b": b}}
        print(f"quadratic fit: gap ~ {a:.3f}*eta^2 + {b:.3f}*eta")
    _write_manifest(out_dir, "sweep", config, opts, ic, outputs,
                    extra={"eta": [r.eta for r in rows], **fit_extra})
    print(f"wrote {', '.join(outputs)} to {out_dir}")
    return 0


def _cmd_compare(args) -> int:
    config, opts, ic = _resolve_inputs(args)
    out_dir = _ensure_out(args)
    delta = compare_compliance_vs_evasion(config, ic, opts)
    _write_compare_csv(out_dir / "compare.csv", delta)
    _write_manifest(out_dir, "compare", config, opts, ic, ["compare.csv"])
    for j, v in enumerate(delta, start=1):
        print(f"class {j}: {v:+.5f}")
    print(f"wrote compare.csv to {out_dir}")
    return 0


def _cmd_spread(args) -> int:
    config, opts, ic = _resolve_inputs(args)
    out_dir = _ensure_out(args)
    cmp = spread_comparison(config, ic, opts)
    payload = {
        "evasion_level": cmp.evasion_level,
        "widespread": {"theta_ev": list(cmp.widespread_theta),
                       "gini_total": cmp.widespread_gini,
                       "gini_per_sector": [float(g) for g in cmp.widespread_sector_gini]},
        "concentrated": {"theta_ev": list(cmp.concentrated_theta),
                         "gini_total": cmp.concentrated_gini,
                         "gini_per_sector": [float(g) for g in cmp.concentrated_sector_gini]},
        "gini_difference": cmp.widespread_gini - cmp.concentrated_gini,
    }
    _write_json(out_dir / "spread.json", payload)
    _write_manifest(out_dir, "spread", config, opts, ic, ["spread.json"])
    print(f"total evasion level {cmp.evasion_level:.4f} in both scenarios")
    print(f"widespread gini   = {cmp.widespread_gini:.5f}")
    print(f"concentrated gini = {cmp.concentrated_gini:.5f}")
    print(f"wrote spread.json to {out_dir}")
    return 0


def _cmd_validate(args) -> int:
    config, _, _ = _resolve_inputs(args)
    results = run_validation_suite(config)
    failed = 0
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def _ensure_out(args) -> Path:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


# ------------------------------------------------------------------ parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxkinetics",
        description="Kinetic income-exchange model with taxation, redistribution "
                    "and heterogeneous tax compliance.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, with_out=True):
        sp.add_argument("--config", metavar="PATH", default=None,
                        help="JSON or TOML config file (built-in baseline if omitted); "
                             "a manifest.json from a previous run also works")
        if with_out:
            sp.add_argument("--out", metavar="DIR", default="out",
                            help="output directory (default: out)")
        sp.add_argument("--seedless", action="store_true",
                        help="reserved; the engine never uses randomness")

    sp = sub.add_parser("run", help="integrate one scenario to stationarity")
    common(sp)
    sp.add_argument("--dump-trajectory", metavar="STRIDE", type=int, default=None,
                    help="also write trajectory.csv, sampling every STRIDE steps")
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("sweep", help="income gap and Gini across evasion levels")
    common(sp)
    sp.add_argument("--eta", metavar="LIST", default="5,10,15,20,25,30,40,50",
                    help="comma-separated total evasion levels in percent "
                         "(default: 5,10,15,20,25,30,40,50)")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("compare", help="evasion vs full-compliance class populations")
    common(sp)
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("spread", help="widespread vs concentrated evasion Gini pair")
    common(sp)
    sp.set_defaults(func=_cmd_spread)

    sp = sub.add_parser("validate", help="run the invariant suite and report pass/fail")
    common(sp, with_out=False)
    sp.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    """CLI entry point. Returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KineticModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
