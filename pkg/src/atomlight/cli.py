"""Command-line scenario runner.

Subcommands: run a scenario file, validate one without executing, list
the shipped scenario library.  Exit codes: 0 ok, 2 parse error,
3 validation error, 4 runtime numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources
from pathlib import Path

import yaml

from .gaussian import GaussianError
from .lindblad import NoUniqueSteadyState
from .scenarios import (
    ConfigError,
    ScenarioConfig,
    execute,
    load_config,
    validate_config,
    write_results,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

OUT_DIR_ENV = "ATOMLIGHT_OUT"


def shipped_scenarios() -> list[Path]:
    root = Path(str(resources.files("atomlight").joinpath("scenarios")))
    return sorted(root.glob("*.yaml"))


def _load(path: str) -> ScenarioConfig:
    try:
        return load_config(path)
    except FileNotFoundError as e:
        raise ConfigError(f"no such file: {path}") from e
    except yaml.YAMLError as e:
        raise _ParseError(str(e)) from e


class _ParseError(Exception):
    pass


def cmd_run(args) -> int:
    try:
        cfg = _load(args.config)
    except _ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.seed is not None:
        cfg = ScenarioConfig(cfg.kind, cfg.name, cfg.params, cfg.sweep, args.seed, cfg.output_format)
    if args.format is not None:
        cfg = ScenarioConfig(cfg.kind, cfg.name, cfg.params, cfg.sweep, cfg.seed, args.format)
    problems = validate_config(cfg)
    if problems:
        for p in problems:
            print(f"validation error: {p}", file=sys.stderr)
        return EXIT_VALIDATION
    out_dir = args.out or os.environ.get(OUT_DIR_ENV, ".")
    try:
        records = execute(cfg, jobs=args.jobs)
    except (ConfigError,) as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (GaussianError, NoUniqueSteadyState, FloatingPointError, ValueError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    path = write_results(records, out_dir, cfg.output_format)
    for r in records:
        pt = " ".join(f"{k}={v}" for k, v in r.point.items())
        kv = " ".join(f"{k}={_fmt(v)}" for k, v in r.outputs.items())
        print(f"[{r.scenario}] {pt} {kv}".replace("  ", " "))
    print(f"results written to {path}")
    return EXIT_OK


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def cmd_validate(args) -> int:
    try:
        cfg = _load(args.config)
    except (_ParseError, ConfigError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    problems = validate_config(cfg)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_VALIDATION
    print("ok")
    return EXIT_OK


def cmd_list(args) -> int:
    rows = []
    for path in shipped_scenarios():
        raw = yaml.safe_load(path.read_text())
        rows.append((raw.get("name", path.stem), raw.get("kind", "?"), raw.get("description", "")))
    width = max((len(r[0]) for r in rows), default=10)
    kwidth = max((len(r[1]) for r in rows), default=10)
    for name, kind, desc in rows:
        print(f"{name:<{width}}  {kind:<{kwidth}}  {desc}")
    return EXIT_OK


def scenario_path(name: str) -> Path:
    """Resolve a shipped scenario by name."""
    for path in shipped_scenarios():
        if path.stem == name:
            return path
    raise FileNotFoundError(f"no shipped scenario named {name!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="atomlight",
        description="Gaussian light-matter interface scenario runner",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario file")
    run_p.add_argument("config", help="path to a scenario YAML file")
    run_p.add_argument("--out", default=None, help=f"output directory (default ${OUT_DIR_ENV} or .)")
    run_p.add_argument("--seed", type=int, default=None, help="override the root seed")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    run_p.add_argument("--format", choices=("csv", "json"), default=None)
    run_p.set_defaults(func=cmd_run)

    val_p = sub.add_parser("validate", help="check a scenario file without running it")
    val_p.add_argument("config")
    val_p.set_defaults(func=cmd_validate)

    list_p = sub.add_parser("list", help="list shipped scenarios")
    list_p.set_defaults(func=cmd_list)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
