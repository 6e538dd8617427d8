"""Command-line front end: ``gram``, ``conditions``, ``verify``, ``sweep``.

Exit codes: 0 success, 1 usage or I/O error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import halfplane as hp
from .campaign import CampaignConfig, log_type_sweep, run_campaign, write_campaign
from .conditions import full_report
from .paraproducts import (
    composition_gram_closed,
    composition_gram_direct,
    matrix_filename,
    write_matrix_csv,
)
from .symbols import Symbol, SymbolFileError, generate, load

logger = logging.getLogger("dyadic_paraproducts")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_symbol_spec(spec: str, depth: int | None) -> tuple[Symbol, int | None]:
    """``zero``, ``const:<c>``, ``log``, ``random:seed=<n>[,gamma=<g>][,dist=<name>]``, ``file:<path>``.

    Returns the symbol and its generator seed (None when not random).
    """
    kind, _, arg = spec.partition(":")
    if kind == "file":
        b = load(arg)
        if depth is not None and b.depth != depth:
            raise UsageError(f"{arg}: depth {b.depth} does not match --depth {depth}")
        return b, None
    if depth is None:
        raise UsageError(f"--depth is required for symbol spec {spec!r}")
    if kind == "zero":
        return generate("zero", depth), None
    if kind == "const":
        try:
            c = complex(arg.replace("i", "j")) if arg else 1.0
        except ValueError:
            raise UsageError(f"bad constant in {spec!r}") from None
        return generate("constant", depth, c=c), None
    if kind == "log":
        return generate("log_type", depth), None
    if kind == "random":
        params = {}
        for item in filter(None, arg.split(",")):
            key, _, value = item.partition("=")
            params[key] = value
        try:
            seed = int(params.pop("seed"))
            gamma = float(params.pop("gamma", 0.75))
            dist = params.pop("dist", "complex_normal")
        except (KeyError, ValueError):
            raise UsageError(f"random spec needs seed=<int>: {spec!r}") from None
        if params:
            raise UsageError(f"unknown random parameters {sorted(params)}")
        return generate("random", depth, seed=seed, gamma=gamma, distribution=dist), seed
    raise UsageError(f"unknown symbol spec {spec!r}")


def _symbols(args) -> tuple[Symbol, Symbol, int | None]:
    b, b_seed = parse_symbol_spec(args.b, args.depth)
    d, _ = parse_symbol_spec(args.d, args.depth if args.depth is not None else b.depth)
    if b.depth != d.depth:
        raise UsageError(f"symbol depths differ: {b.depth} vs {d.depth}")
    seed = args.seed if args.seed is not None else b_seed
    return b, d, seed


def _max_discrepancy(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))
    return 0.0 if scale == 0 else float(np.max(np.abs(a - b)) / scale)


def cmd_gram(args) -> int:
    b, d, _ = _symbols(args)
    p_direct = composition_gram_direct(b, d)
    p_closed = composition_gram_closed(b, d)
    t_direct = hp.t_gram_direct(b, d)
    t_closed = hp.t_gram_closed(b, d)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        for kind, M in (
            ("P_direct", p_direct),
            ("P_closed", p_closed),
            ("T_direct", t_direct),
            ("T_closed", t_closed),
        ):
            write_matrix_csv(M, out / matrix_filename(kind, b, d))
    checks = {
        "P closed vs direct": _max_discrepancy(p_closed.toarray(), p_direct.toarray()),
        "T closed vs direct": _max_discrepancy(t_closed.toarray(), t_direct.toarray()),
        "T vs 2 conj(P)": _max_discrepancy(t_closed.toarray(), 2 * np.conj(p_closed.toarray())),
    }
    ok = True
    for name, value in checks.items():
        flag = "ok" if value <= args.tol else "FAIL"
        ok &= value <= args.tol
        print(f"{name:<22s} max discrepancy {value:.3e}  [{flag}]")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_conditions(args) -> int:
    b, d, seed = _symbols(args)
    report = full_report(b, d, seed=seed)
    text = json.dumps(report.to_json(), indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"conditions_D{b.depth}_b{b.digest()}_d{d.digest()}.json").write_text(text + "\n")
    return EXIT_OK


def _parse_depths(text: str) -> list[int]:
    depths = []
    for part in text.split(","):
        lo, sep, hi = part.partition("-")
        try:
            depths.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise UsageError(f"bad depth list {text!r}") from None
    return depths


def cmd_verify(args) -> int:
    obj = {}
    if args.config:
        try:
            obj = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    overrides = {
        "depths": _parse_depths(args.depths) if args.depths else None,
        "trials": args.trials,
        "seed": args.seed,
        "gamma": args.gamma,
        "distribution": args.distribution,
        "out": args.out,
        "timestamp": True if args.timestamp else None,
    }
    obj.update({k: v for k, v in overrides.items() if v is not None})
    if args.tol is not None:
        obj["tolerances"] = {**obj.get("tolerances", {}), "gram": args.tol}
    try:
        config = CampaignConfig.from_json(obj)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid campaign config: {exc}") from None

    result = run_campaign(config)
    if config.out:
        csv_path, summary_path = write_campaign(result, config.out)
        print(f"wrote {csv_path} and {summary_path}")
    summary = result.summary
    if summary["no_data"]:
        print("no data: campaign has zero trials")
    for name, check in summary["invariants"].items():
        status = "PASS" if check["pass"] else "FAIL"
        worst = "n/a" if check["worst"] is None else f"{check['worst']:.3e}"
        line = f"{status}  {name:<28s} worst {worst:>10s}  bound {check['bound']:.3e}"
        if not check["pass"]:
            line += f"  (depth {check['failure']['depth']}, seed {check['failure']['seed']})"
        print(line)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    depths = _parse_depths(args.depths)
    rows = log_type_sweep(depths)
    columns = ["depth", "A", "B", "C", "total", "op_norm", "ratio", "bmo_product"]
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep_log_type.csv").write_text(text)
    norms = [row["op_norm"] for row in rows]
    if any(b <= a for a, b in zip(norms, norms[1:])):
        print("op_norm is not strictly increasing in depth", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dyadic-paraproducts", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def symbol_flags(p):
        p.add_argument("--depth", type=int)
        p.add_argument("--b", default="const:1", help="symbol spec for b")
        p.add_argument("--d", default="const:1", help="symbol spec for d")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")

    p = sub.add_parser("gram", help="write the four Gram matrices and compare them")
    symbol_flags(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("conditions", help="A, B, C, BMO norms and the operator norm")
    symbol_flags(p)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_conditions)

    p = sub.add_parser("verify", help="randomized verification campaign")
    p.add_argument("--config")
    p.add_argument("--depths")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--distribution")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.add_argument("--timestamp", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="log-type growth study")
    p.add_argument("--depths", default="2-8")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (UsageError, SymbolFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
