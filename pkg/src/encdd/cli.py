"""Command-line runner: ``encdd list | validate CONFIG | run [CONFIG]``.

Configs are JSON objects::

    {"kind": "leakage-suppression", "seed": 0, "output": "out/leak",
     "params": {"cycles": [8, 16, 32, 64]}}

Exit codes: 0 pass, 1 tolerance failure, 2 config error. ``ENCDD_OUTPUT_DIR``
overrides the output directory.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import json
import os
import sys
from pathlib import Path

import numpy as np

from .recipes import CATALOG_VERSION, RECIPES, run_recipe

SCHEMA_VERSION = 1
TOP_LEVEL = {"kind", "params", "output", "seed"}

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

    def render(self, source: str) -> str:
        loc = source
        if self.line is not None:
            loc += f":{self.line}"
            if self.column is not None:
                loc += f":{self.column}"
        return f"{loc}: error: {self}"


def _line_of(text: str, key: str) -> int | None:
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


def unknown_kind_message(kind: str) -> str:
    near = difflib.get_close_matches(kind, list(RECIPES), n=1, cutoff=0.0)
    hint = f"; did you mean {near[0]!r}?" if near else ""
    return f"unknown experiment kind {kind!r}{hint}"


def _coerce(name: str, value, default, text: str):
    line = _line_of(text, name)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"parameter {name!r} must be true/false", line)
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"parameter {name!r} must be an integer", line)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"parameter {name!r} must be a number", line)
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"parameter {name!r} must be a list", line)
        return value
    if isinstance(default, str) and not isinstance(value, (str, int, float)):
        raise ConfigError(f"parameter {name!r} must be a string", line)
    return value


def parse_config(text: str) -> dict:
    """Strictly validate a config document; returns the normalized config."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", 1)
    for key in data:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown field {key!r}", _line_of(text, key))
    if "kind" not in data:
        raise ConfigError("missing field 'kind'", 1)
    kind = data["kind"]
    if kind not in RECIPES:
        raise ConfigError(unknown_kind_message(str(kind)), _line_of(text, "kind"))
    rec = RECIPES[kind]
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object", _line_of(text, "params"))
    merged = dict(rec.defaults)
    for name, value in params.items():
        if name not in rec.defaults:
            raise ConfigError(f"unknown parameter {name!r} for {kind}", _line_of(text, name))
        merged[name] = _coerce(name, value, rec.defaults[name], text)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("'seed' must be an integer", _line_of(text, "seed"))
    output = data.get("output", f"results/{kind}")
    if not isinstance(output, str):
        raise ConfigError("'output' must be a string", _line_of(text, "output"))
    return {"kind": kind, "params": merged, "seed": seed, "output": output}


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    rec = RECIPES[cfg["kind"]]
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        if key == "seed":
            cfg["seed"] = _coerce("seed", value, 0, "")
        elif key == "output":
            cfg["output"] = str(value)
        elif key in rec.defaults:
            cfg["params"][key] = _coerce(key, value, rec.defaults[key], "")
        else:
            raise ConfigError(f"unknown parameter {key!r} for {cfg['kind']}")
    return cfg


def _jsonable(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def write_results(cfg: dict, outcome, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": cfg["kind"],
        "seed": cfg["seed"],
        "params": cfg["params"],
        "passed": bool(outcome.passed),
        "failures": outcome.failures,
        "results": outcome.summary,
    }
    text = json.dumps(summary, indent=2, sort_keys=True, default=_jsonable)
    (out_dir / "summary.json").write_text(text + "\n")
    if outcome.rows:
        cols = ["schema_version"] + list(outcome.rows[0])
        with open(out_dir / f"{cfg['kind']}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
            w.writeheader()
            for row in outcome.rows:
                w.writerow({"schema_version": SCHEMA_VERSION,
                            **{k: _fmt(v) for k, v in row.items()}})
    return summary


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    return v


def catalog_text() -> str:
    lines = [f"encdd experiment catalog v{CATALOG_VERSION} ({len(RECIPES)} kinds)", ""]
    for kind, rec in RECIPES.items():
        lines.append(f"{kind}")
        lines.append(f"  reproduces: {rec.claim}")
        for name, default in rec.defaults.items():
            doc = rec.docs.get(name, "")
            lines.append(f"    {name} = {json.dumps(default)}" + (f"  # {doc}" if doc else ""))
        lines.append("")
    return "\n".join(lines)


def _load(path: str | None, kind: str | None) -> tuple[dict, str]:
    if path is None:
        if kind is None:
            raise ConfigError("need a config file or --kind")
        text = json.dumps({"kind": kind})
        return parse_config(text), "<--kind>"
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    cfg = parse_config(text)
    if kind is not None and kind != cfg["kind"]:
        raise ConfigError(f"--kind {kind!r} conflicts with config kind {cfg['kind']!r}")
    return cfg, path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="encdd",
                                     description="Encoded dynamical decoupling experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_list = sub.add_parser("list", help="show the experiment catalog")
    p_list.add_argument("kind", nargs="?", help="show a single kind")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("config", nargs="?")
    p_run.add_argument("--kind", help="run a kind with default parameters")
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a parameter, seed or output")
    p_run.add_argument("--output", help="output directory")
    args = parser.parse_args(argv)

    if args.command == "list":
        if args.kind:
            if args.kind not in RECIPES:
                print(f"error: {unknown_kind_message(args.kind)}", file=sys.stderr)
                return EXIT_CONFIG
            rec = RECIPES[args.kind]
            print(f"{rec.kind}\n  reproduces: {rec.claim}")
            for name, default in rec.defaults.items():
                print(f"    {name} = {json.dumps(default)}  # {rec.docs.get(name, '')}")
        else:
            print(catalog_text(), end="")
        return EXIT_PASS

    source = getattr(args, "config", None) or "<--kind>"
    try:
        if args.command == "validate":
            cfg, source = _load(args.config, None)
            print(f"{source}: ok ({cfg['kind']})")
            return EXIT_PASS
        if args.kind and args.kind not in RECIPES:
            raise ConfigError(unknown_kind_message(args.kind))
        cfg, source = _load(args.config, args.kind)
        cfg = apply_overrides(cfg, args.overrides)
    except ConfigError as exc:
        print(exc.render(source), file=sys.stderr)
        return EXIT_CONFIG

    env_dir = os.environ.get("ENCDD_OUTPUT_DIR")
    if args.output:
        out_dir = Path(args.output)
    elif env_dir:
        out_dir = Path(env_dir) / cfg["kind"]
    else:
        out_dir = Path(cfg["output"])
    outcome = run_recipe(cfg["kind"], cfg["params"], cfg["seed"])
    write_results(cfg, outcome, out_dir)
    status = "PASS" if outcome.passed else "FAIL"
    print(f"{cfg['kind']}: {status} -> {out_dir}")
    for f in outcome.failures:
        print(f"  {f}", file=sys.stderr)
    return EXIT_PASS if outcome.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
