"""Command-line interface.

Exit codes: 0 success, 1 a reproduction check failed, 2 usage error,
3 numerical failure.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines; flags
given on the command line win over the file.  Relative ``--out`` paths are
resolved against ``$BIHAMIL_OUTPUT_DIR`` when it is set.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import reproduce
from .ecmap import Family, classify, scan_image
from .integrator import IntegratorConfig, NonConvergence, integrate
from .stability import classify_equilibrium

OUTPUT_DIR_ENV = "BIHAMIL_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


# (dest, type, default); default None marks a required option
SPECS = {
    "simulate": [
        ("x0", finite_float, None), ("y0", finite_float, None), ("z0", finite_float, None),
        ("dt", finite_float, None), ("steps", positive_int, None),
        ("tol", finite_float, 1e-12), ("max_inner", positive_int, 50),
        ("solver", str, "newton"), ("out", str, ""), ("format", str, "csv"),
    ],
    "classify": [
        ("h", finite_float, ""), ("c", finite_float, ""), ("tol", finite_float, 1e-9),
        ("family", str, ""), ("M", finite_float, ""), ("out", str, ""),
    ],
    "scan_image": [
        ("h_min", finite_float, None), ("h_max", finite_float, None),
        ("c_min", finite_float, None), ("c_max", finite_float, None),
        ("resolution", int, None), ("tol", finite_float, 1e-9),
        ("out", str, ""), ("format", str, "csv"),
    ],
    "reproduce": [("experiment", str, None), ("out", str, "")],
}

CHOICES = {
    "solver": ("newton", "picard"),
    "format": ("csv", "json"),
    "family": tuple(f.value for f in Family),
    "experiment": tuple(reproduce.EXPERIMENTS),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bihamil", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "integrate with the implicit mid-point rule",
        "classify": "stratum of (h, c) or stability of an equilibrium family",
        "scan_image": "label a grid of (h, c) points",
        "reproduce": "rerun a headline experiment and check it",
    }
    for name, spec in SPECS.items():
        p = sub.add_parser(name.replace("_", "-"), help=helps[name])
        p.add_argument("--config", help="file of 'key = value' lines")
        for dest, typ, _ in spec:
            flag = "--" + dest.replace("_", "-")
            # values stay raw strings here; conversion happens after merging with --config
            p.add_argument(flag, dest=dest, default=None, choices=CHOICES.get(dest))
        p.set_defaults(_spec=name)
    return parser


def _resolve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> dict:
    spec = SPECS[args._spec]
    config = {}
    if args.config:
        try:
            config = read_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    known = {dest for dest, _, _ in spec}
    unknown = set(config) - known
    if unknown:
        parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = {}
    for dest, typ, default in spec:
        raw = getattr(args, dest)
        if raw is None:
            raw = config.get(dest)
        flag = "--" + dest.replace("_", "-")
        if raw is None or raw == "":
            if default is None:
                parser.error(f"missing required option {flag}")
            values[dest] = None if default == "" else default
            continue
        if dest in CHOICES and raw not in CHOICES[dest]:
            parser.error(f"{flag}: invalid choice {raw!r} (choose from {', '.join(CHOICES[dest])})")
        try:
            values[dest] = typ(raw)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"{flag}: {exc}")
    return values


def write_output(text: str, out: str | None) -> None:
    """Write to stdout, or atomically to ``out`` (temp file + rename)."""
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_simulate(v: dict) -> int:
    try:
        cfg = IntegratorConfig(dt=v["dt"], newton_tol=v["tol"], max_inner_iters=v["max_inner"],
                               max_steps=v["steps"], solver=v["solver"])
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    try:
        traj = integrate((v["x0"], v["y0"], v["z0"]), cfg)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_output(traj.to_csv() if v["format"] == "csv" else traj.to_json(), v["out"])
    return EXIT_OK


def cmd_classify(v: dict) -> int:
    region = v["h"] is not None or v["c"] is not None
    family = v["family"] is not None or v["M"] is not None
    if region == family:
        raise _Usage("give either --h and --c, or --family and --M")
    if region:
        if v["h"] is None or v["c"] is None:
            raise _Usage("--h and --c must be given together")
        if v["tol"] < 0:
            raise _Usage("--tol must be non-negative")
        payload = {"label": classify((v["h"], v["c"]), v["tol"]).value}
    else:
        if v["family"] is None or v["M"] is None:
            raise _Usage("--family and --M must be given together")
        payload = classify_equilibrium(v["family"], v["M"]).to_dict()
    write_output(json.dumps(payload) + "\n", v["out"])
    return EXIT_OK


def cmd_scan_image(v: dict) -> int:
    try:
        rows = scan_image(v["h_min"], v["h_max"], v["c_min"], v["c_max"], v["resolution"], v["tol"])
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    if v["format"] == "json":
        text = json.dumps([{"h": h, "c": c, "label": lab.value} for h, c, lab in rows]) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "c", "label"])
        for h, c, lab in rows:
            w.writerow([repr(h), repr(c), lab.value])
        text = buf.getvalue()
    write_output(text, v["out"])
    return EXIT_OK


def cmd_reproduce(v: dict) -> int:
    try:
        checks = reproduce.run_experiment(v["experiment"])
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_output(reproduce.format_report(v["experiment"], checks), v["out"])
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


class _Usage(Exception):
    pass


COMMANDS = {
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "scan_image": cmd_scan_image,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        values = _resolve(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args._spec](values)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"bihamil: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
