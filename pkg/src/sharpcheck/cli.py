"""Command-line front door: run estimate suites from config files and render
stored reports.

Config files are INI-style.  A ``[suite]`` section carries run-wide settings
and one ``[estimate:ID]`` section per catalog entry carries parameter
overrides plus an optional ladder::

    [suite]
    name = core
    seed = 1
    jobs = 2

    [estimate:MAX-LP]
    p = 2.0
    ladder = 0.25 0.125 0.0625

Exit status: 0 when every check passes, 1 when a check fails or a run blows
up, 2 for unreadable or invalid configs and malformed reports.  Flags beat
``SHARPCHECK_*`` environment variables, which beat the config file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass, field

from .harness import SCHEMA_VERSION, EstimateSpec, resolve_entry, run_suite
from .harness.report import csv_from_doc, suite_to_csv, suite_to_json

ENV_PREFIX = "SHARPCHECK_"
_SUITE_KEYS = ("name", "seed", "jobs", "out", "format")
_VERIFY_FORMATS = ("json", "csv", "both")
_REPORT_FORMATS = ("summary", "csv", "json")


class ConfigError(Exception):
    """Invalid config or usage; rendered with a file/line prefix when known."""


@dataclass
class SuiteConfig:
    name: str
    path: str
    seed: int | None = None
    jobs: int | None = None
    out: str | None = None
    fmt: str | None = None
    blocks: list = field(default_factory=list)   # (estimate id, params, ladder)


def _line_maps(text: str):
    """Config line numbers for section headers and keys, for diagnostics."""
    sections: dict[str, int] = {}
    keys: dict[tuple, int] = {}
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, i)
        elif "=" in line and current is not None and not raw[:1].isspace():
            keys.setdefault((current, line.split("=", 1)[0].strip()), i)
    return sections, keys


def _parse_scalar(text: str):
    t = text.strip()
    low = t.lower()
    if low in ("none", "null"):
        return None
    if low == "true":
        return True
    if low == "false":
        return False
    for cast in (int, float):
        try:
            return cast(t)
        except ValueError:
            pass
    return t


def _parse_ladder(text: str, where: str):
    items = text.replace(",", " ").split()
    if not items:
        raise ConfigError(f"{where}: ladder must list at least one value")
    try:
        return tuple(float(v) for v in items)
    except ValueError:
        raise ConfigError(f"{where}: ladder values must be numbers, got {text!r}") from None


def load_suite(path: str) -> SuiteConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror or e})") from None

    sections, keys = _line_maps(text)
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str            # catalog parameter names are case-sensitive
    try:
        parser.read_string(text, source=path)
    except configparser.ParsingError as e:
        lineno, bad = e.errors[0]
        raise ConfigError(f"{path}, line {lineno}: cannot parse {bad}") from None
    except configparser.Error as e:
        line = getattr(e, "lineno", None)
        at = f", line {line}" if line else ""
        raise ConfigError(f"{path}{at}: {e.message.splitlines()[0]}") from None

    def where(section, key=None):
        line = keys.get((section, key)) if key else sections.get(section)
        return f"{path}, line {line}" if line else path

    if "suite" not in parser:
        raise ConfigError(f"{path}, line 1: missing [suite] section")

    cfg = SuiteConfig(name=os.path.splitext(os.path.basename(path))[0], path=path)
    for key, raw in parser["suite"].items():
        if key not in _SUITE_KEYS:
            raise ConfigError(f"{where('suite', key)}: unknown suite key {key!r} "
                              f"(known: {', '.join(_SUITE_KEYS)})")
        if key == "name":
            cfg.name = raw.strip()
        elif key in ("seed", "jobs"):
            val = _parse_scalar(raw)
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"{where('suite', key)}: {key} must be an integer, got {raw!r}")
            setattr(cfg, key, val)
        elif key == "out":
            cfg.out = raw.strip()
        elif key == "format":
            fmt = raw.strip().lower()
            if fmt not in _VERIFY_FORMATS:
                raise ConfigError(f"{where('suite', key)}: format must be one of "
                                  f"{', '.join(_VERIFY_FORMATS)}")
            cfg.fmt = fmt

    for section in parser.sections():
        if section == "suite":
            continue
        if not section.startswith("estimate:"):
            raise ConfigError(f"{where(section)}: unknown section [{section}]; "
                              "expected [suite] or [estimate:ID]")
        estimate_id = section.split(":", 1)[1].strip()
        try:
            entry = resolve_entry(estimate_id)
        except ValueError as e:
            raise ConfigError(f"{where(section)}: {e}") from None

        params, ladder = {}, ()
        for key, raw in parser[section].items():
            if key == "ladder":
                ladder = _parse_ladder(raw, where(section, key))
                continue
            if key not in entry.defaults:
                raise ConfigError(f"{where(section, key)}: unknown parameter {key!r} "
                                  f"for {entry.id}")
            params[key] = _parse_scalar(raw)
        if entry.validate is not None:
            try:
                entry.validate(entry.merged(params))
            except ValueError as e:
                raise ConfigError(f"{where(section)}: invalid parameters for "
                                  f"{entry.id}: {e}") from None
        cfg.blocks.append((estimate_id, params, ladder))

    if not cfg.blocks:
        raise ConfigError(f"{path}: no [estimate:ID] sections")
    return cfg


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name)


def _env_int(name: str):
    raw = _env(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment {ENV_PREFIX}{name} must be an integer, "
                          f"got {raw!r}") from None


def cmd_verify(args) -> int:
    cfg = load_suite(args.config)

    seed = args.seed if args.seed is not None else _env_int("SEED")
    if seed is None:
        seed = cfg.seed
    if seed is None:
        raise ConfigError(f"{cfg.path}: no seed given; set [suite] seed, --seed, "
                          f"or {ENV_PREFIX}SEED")
    jobs = args.jobs if args.jobs is not None else _env_int("JOBS")
    if jobs is None:
        jobs = cfg.jobs if cfg.jobs is not None else 1
    if jobs < 1:
        raise ConfigError("jobs must be at least 1")
    out = args.out or _env("OUT") or cfg.out or f"{cfg.name}.json"
    fmt = args.format or (_env("FORMAT") or "").lower() or cfg.fmt or "both"
    if fmt not in _VERIFY_FORMATS:
        raise ConfigError(f"format must be one of {', '.join(_VERIFY_FORMATS)}, got {fmt!r}")

    blocks = cfg.blocks
    if args.only:
        chosen = [x.strip() for x in args.only.split(",") if x.strip()]
        known = {b[0] for b in blocks}
        for cid in chosen:
            if cid not in known:
                raise ConfigError(f"--only references {cid!r}, which is not in {cfg.path}")
        blocks = [b for b in blocks if b[0] in chosen]

    specs = [EstimateSpec(id=bid, params=params, ladder=ladder, seed=seed)
             for bid, params, ladder in blocks]
    try:
        reports = run_suite(specs, jobs=jobs)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    paths = []
    if fmt in ("json", "both"):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(suite_to_json(cfg.name, reports, seed))
        paths.append(out)
    if fmt in ("csv", "both"):
        stem = out[:-5] if out.endswith(".json") else out
        csv_path = stem + ".csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write(suite_to_csv(reports))
        paths.append(csv_path)

    ok = 0
    for r in reports:
        status = "pass" if r.passed() else "FAIL"
        ok += r.passed()
        tail = r.primary.n_emp[-1] if r.primary.n_emp else float("nan")
        print(f"{status}  {r.id:<20} verdict={r.verdict:<12} n_emp={tail:.6g}")
    print(f"suite {cfg.name}: {ok}/{len(reports)} passed; wrote {', '.join(paths)}")
    return 0 if ok == len(reports) else 1


def _load_report(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"{path}: cannot read report ({e.strerror or e})") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: malformed report JSON ({e})") from None
    if not isinstance(doc, dict) or "entries" not in doc or "schema_version" not in doc:
        raise ConfigError(f"{path}: not a suite report (missing schema_version/entries)")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"{path}: schema_version {doc['schema_version']} is not "
                          f"the supported {SCHEMA_VERSION}")
    return doc


def _summary_lines(doc: dict):
    rows = [("id", "n_emp", "trend", "verdict", "margin")]
    for e in doc["entries"]:
        n_emp = e["primary"]["n_emp"]
        tail = n_emp[-1] if n_emp else "-"
        tail = tail if isinstance(tail, str) else f"{tail:.6g}"
        bound = (e.get("notes") or {}).get("analytic_bound")
        if bound and not isinstance(bound.get("max_n_emp"), str):
            margin = f"{bound['threshold'] - bound['max_n_emp']:+.3g}"
        else:
            margin = "-"
        rows.append((e["id"], tail, e["primary"]["trend"], e["verdict"], margin))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            for row in rows]


def cmd_report(args) -> int:
    doc = _load_report(args.report)
    if args.format == "json":
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    elif args.format == "csv":
        sys.stdout.write(csv_from_doc(doc))
    else:
        for line in _summary_lines(doc):
            print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharpcheck",
        description="Run estimate-verification suites and render their reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a suite config and write JSON/CSV reports")
    v.add_argument("config", help="suite config file")
    v.add_argument("--seed", type=int, default=None, help="override the suite seed")
    v.add_argument("--jobs", type=int, default=None, help="parallel checks (threads)")
    v.add_argument("--out", default=None, help="JSON output path (CSV goes beside it)")
    v.add_argument("--only", default=None, metavar="ID[,ID...]",
                   help="run only the listed estimate ids")
    v.add_argument("--format", default=None, choices=_VERIFY_FORMATS,
                   help="which artifacts to write (default both)")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("report", help="render a stored suite report")
    r.add_argument("report", help="suite report JSON")
    r.add_argument("--format", default="summary", choices=_REPORT_FORMATS,
                   help="summary table, CSV flattening, or byte-stable JSON")
    r.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
