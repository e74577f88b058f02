"""Command-line entry point: ``artifact <command> ...``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import io
import json
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .catalogue import catalogue
from .chain import InfeasibleBudget
from .compose import NoRoot
from .core import check_seed, fmt12, round12
from .scenarios import COMMANDS, ConfigError, Outputs, build_params
from .trust import GuardTripped, NegativeMargin, NoReversal

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_FAILURES = 0, 2, 3, 4
OUTPUT_ENV = "ARTIFACT_OUTPUT_DIR"
INFEASIBLE = (GuardTripped, NegativeMargin, NoReversal, InfeasibleBudget, NoRoot)
CONFIG_KEYS = {"command", "params", "seed", "workers", "version", "timestamp", "outputs"}


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUTPUT_ENV) or "results")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt12(v) if isinstance(v, (int, float)) or hasattr(v, "dtype") else v
                    for v in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(round12(obj), indent=2, sort_keys=True) + "\n"


def write_outputs(out: Outputs, out_dir: Path, manifest: dict) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for name, (header, rows) in out.csv.items():
        (out_dir / name).write_text(_csv_text(header, rows))
        names.append(name)
    for name, obj in out.json.items():
        (out_dir / name).write_text(_json_text(obj))
        names.append(name)
    for name, text in out.text.items():
        (out_dir / name).write_text(text)
        names.append(name)
    manifest = {**manifest, "outputs": sorted(names)}
    (out_dir / "manifest.json").write_text(_json_text(manifest))
    return names


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        cfg = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{p}: expected a mapping at top level")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{p}: unknown keys {sorted(unknown)}")
    return cfg


def execute(command: str, params: dict, seed: int, workers: int, out_dir: Path) -> int:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        seed = check_seed(seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    cls, runner = COMMANDS[command]
    p = build_params(cls, params)
    try:
        out = runner(p, seed, workers)
    except INFEASIBLE:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    manifest = {
        "command": command,
        "params": dataclasses.asdict(p),
        "seed": seed,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    for name in write_outputs(out, out_dir, manifest):
        print(out_dir / name)
    return EXIT_OK


def _overrides(pairs) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = yaml.safe_load(v)
    return out


def cmd_family(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    if cfg.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
    params = {**(cfg.get("params") or {}), **_overrides(args.set)}
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    return execute(args.command, params, seed, args.workers, _out_dir(args.out))


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if "command" not in cfg:
        raise ConfigError(f"{args.config}: missing 'command'")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    params = {**(cfg.get("params") or {}), **_overrides(args.set)}
    return execute(cfg["command"], params, seed, workers, _out_dir(args.out))


def cmd_catalogue(args, extra) -> int:
    params = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            val = next(it, None)
            if val is None:
                raise ConfigError(f"{tok} needs a value")
        params[key] = yaml.safe_load(val)
    if params and args.spec is None:
        raise ConfigError("row parameters need --spec")
    try:
        if args.spec is not None:
            if not 1 <= args.spec <= 16:
                raise ConfigError("--spec must be in 1..16")
            rows = [r for r in catalogue({args.spec: params}) if r["spec_id"] == args.spec]
        else:
            rows = catalogue()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if args.json:
        print(_json_text(rows), end="")
        return EXIT_OK
    print(f"{'id':>2}  {'domain':<11} {'boundary':>12} {'ok':<5} {'cost':>12} {'units':<17} rule")
    for r in rows:
        v = r["verdict"]
        print(f"{r['spec_id']:>2}  {r['domain']:<11} {fmt12(v['boundary_value']):>12} "
              f"{str(v['satisfied']):<5} {fmt12(v['violation_cost']):>12} "
              f"{v['cost_units']:<17} {r['design_rule']}")
    return EXIT_OK


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _checks(path: Path) -> list[tuple[str, bool]]:
    """Acceptance comparisons for each known output family."""
    rows = _read_csv(path)
    name = path.name
    out = []
    if name == "chain_sim.csv":
        for r in rows:
            if r["in_scope"] != "True":
                continue
            out.append((f"chain n={r['n']} eps={r['eps']} rel_err={float(r['rel_err']):.4f}",
                        float(r["rel_err"]) <= 0.05))
    elif name == "stopping.csv":
        for r in rows:
            out.append((f"stop chain={r['chain']} loss={float(r['mean_loss']):.4f}",
                        float(r["mean_loss"]) <= float(r["allowed"])
                        and float(r["oracle"]) <= float(r["best_fixed"]) + 1e-12))
    elif name == "bandit.csv":
        for r in rows:
            out.append((f"bandit T={r['T']} regret={float(r['mean_regret']):.2f}",
                        float(r["max_regret"]) <= float(r["envelope"])))
    elif name == "marketplace.csv":
        for r in rows:
            ok = r["audit_ok"] == "True" and float(r["ci_low"]) <= float(r["eps_bound"])
            out.append((f"marketplace {r['market']} eps1={r['eps1']}", ok))
    elif name == "selective.csv":
        for r in rows:
            width = float(r["ci_high"]) - float(r["ci_low"])
            ok = abs(float(r["loss"]) - float(r["closed_form"])) <= 3 * width
            out.append((f"selective alpha={r['alpha']}", ok))
    return out


def cmd_report(args) -> int:
    root = Path(args.results_dir)
    if not root.is_dir():
        raise ConfigError(f"results directory not found: {root}")
    checks = []
    for path in sorted(root.rglob("*.csv")):
        checks.extend(_checks(path))
    if not checks:
        raise ConfigError(f"no recognised results under {root}")
    failed = 0
    for label, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
        failed += not ok
    print(f"{len(checks) - failed}/{len(checks)} passed")
    return EXIT_FAILURES if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalogue", help="the sixteen boundary/cost/rule rows")
    c.add_argument("--spec", type=int)
    c.add_argument("--json", action="store_true")

    for name in COMMANDS:
        s = sub.add_parser(name, help=f"run the {name} scenario")
        s.add_argument("--config")
        s.add_argument("--set", action="append", metavar="KEY=VALUE")
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--out")

    r = sub.add_parser("run", help="run a scenario config or replay a manifest")
    r.add_argument("config")
    r.add_argument("--set", action="append", metavar="KEY=VALUE")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out")

    rep = sub.add_parser("report", help="pass/fail table over a results directory")
    rep.add_argument("results_dir")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and args.command != "catalogue":
        parser.error(f"unrecognised arguments: {' '.join(extra)}")
    try:
        if args.command == "catalogue":
            return cmd_catalogue(args, extra)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "report":
            return cmd_report(args)
        return cmd_family(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except INFEASIBLE as exc:
        print(f"infeasible scenario: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
