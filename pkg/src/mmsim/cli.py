"""Command-line front end: single runs, area sweeps, the autoencoder bench, FMA eval.

Exit codes: 0 success, 1 simulator output differs from the golden model,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .config import Geometry, InvalidGeometry, validate
from .cost import sweep, sweep_csv
from .fp16 import F16, MalformedLiteral, f16_fma, f16_from_decimal
from .golden import DimensionError, GemmProblem, MatF16, gemm_padded, load_matrix, save_matrix
from .perf import ConfigError, OPERATING_POINTS, PerfReport, SwBaseline, analyze
from .tiler import Stationarity, run_gemm
from .trace import Verbosity
from .workloads import MLPERF_TINY_AUTOENCODER, NARROW_AUTOENCODER, bench

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

LAYER_PRESETS = {"mlperf": MLPERF_TINY_AUTOENCODER, "narrow": NARROW_AUTOENCODER}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    H: int = 4
    L: int = 8
    P: int = 3
    frequency_hz: float = OPERATING_POINTS["performance"].freq_hz
    power_mw: float = OPERATING_POINTS["performance"].power_mw
    sw_cores: int = 8
    sw_macs_per_cycle_per_core: float = 0.18
    stationarity: str = Stationarity.X_STATIONARY.value
    seed: int = 0
    format: str = "json"
    trace: str = Verbosity.SUMMARY.value

    @property
    def geometry(self) -> Geometry:
        return validate(Geometry(self.H, self.L, self.P))

    @property
    def baseline(self) -> SwBaseline:
        return SwBaseline(self.sw_cores, self.sw_macs_per_cycle_per_core)


FILE_KEYS = ("H", "L", "P", "frequency_hz", "power_mw", "sw_cores",
             "sw_macs_per_cycle_per_core", "stationarity", "seed")

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    kind = _TYPES[key]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise UsageError(f"config key {key!r} must be an integer, got {value!r}")
    elif kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise UsageError(f"config key {key!r} must be a number, got {value!r}")
        value = float(value)
    elif not isinstance(value, str):
        raise UsageError(f"config key {key!r} must be a string, got {value!r}")
    return value


def load_config_file(path: str | Path) -> dict:
    """Read a flat JSON object restricted to the documented keys."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - set(FILE_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items()}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **load_config_file(args.config))
    flags = {
        "H": args.H, "L": args.L, "P": args.P, "frequency_hz": args.freq,
        "power_mw": args.power, "seed": args.seed, "format": args.format,
        "trace": args.trace, "stationarity": args.stationarity,
    }
    cfg = replace(cfg, **{k: v for k, v in flags.items() if v is not None})
    try:
        cfg.geometry
        Stationarity(cfg.stationarity)
    except InvalidGeometry as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(f"unknown stationarity {cfg.stationarity!r}") from exc
    if cfg.frequency_hz <= 0:
        raise UsageError("frequency must be positive")
    if cfg.power_mw < 0:
        raise UsageError("power must be non-negative")
    if cfg.sw_cores < 1 or cfg.sw_macs_per_cycle_per_core <= 0:
        raise UsageError("software baseline throughput must be positive")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _report_text(report: PerfReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PerfReport.CSV_FIELDS)
    writer.writerow(report.csv_row())
    return buf.getvalue()


def _diff_summary(got: MatF16, want: MatF16, limit: int = 5) -> str:
    rows, cols = np.nonzero(got.data != want.data)
    lines = [f"mismatch: {rows.size} of {want.data.size} elements differ from the golden model"]
    for r, c in list(zip(rows, cols))[:limit]:
        lines.append(f"  Z[{r},{c}]: simulated {got[r, c].hex()} expected {want[r, c].hex()}")
    return "\n".join(lines)


def random_operands(M: int, N: int, K: int, seed: int) -> GemmProblem:
    rng = np.random.default_rng(seed)
    return GemmProblem(
        MatF16.from_float(rng.uniform(-1, 1, (M, N))),
        MatF16.from_float(rng.uniform(-1, 1, (N, K))),
    )


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    M, N, K = args.M, args.N, args.K
    for name, v in (("M", M), ("N", N), ("K", K)):
        if v < 1:
            raise UsageError(f"{name} must be >= 1, got {v}")
    if args.x or args.w:
        if not (args.x and args.w):
            raise UsageError("--x and --w must be given together")
        p = GemmProblem(load_matrix(args.x), load_matrix(args.w))
        if p.dims != (M, N, K):
            raise UsageError(f"operand files give dims {p.dims}, command line says {(M, N, K)}")
    else:
        p = random_operands(M, N, K, cfg.seed)
    g = cfg.geometry
    res = run_gemm(p, g, Stationarity(cfg.stationarity), Verbosity(cfg.trace))
    report = analyze(res.trace, g, cfg.frequency_hz, cfg.power_mw, cfg.baseline)
    want = gemm_padded(p, g)

    text = _report_text(report, cfg.format)
    if res.trace.per_cycle:
        if args.trace_out:
            Path(args.trace_out).write_text(res.trace.to_csv())
            _emit(text, args.out)
        else:
            # trace takes stdout; the report goes to --out or stderr
            sys.stdout.write(res.trace.to_csv())
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stderr.write(text)
    else:
        _emit(text, args.out)
    if args.z_out:
        save_matrix(res.Z, args.z_out)
    if res.Z != want:
        print(_diff_summary(res.Z, want), file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def parse_int_list(text: str) -> list[int]:
    """``4``, ``2,4,8`` or an inclusive range ``2:8``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    try:
        rows = sweep(args.h_range, args.l_range, cfg.P)
    except InvalidGeometry as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    extra = None
    if args.probe:
        M, N, K = args.probe
        p = random_operands(M, N, K, cfg.seed)
        util = []
        for r in rows:
            g = Geometry(r.H, r.L, cfg.P)
            res = run_gemm(p, g, Stationarity(cfg.stationarity))
            if res.Z != gemm_padded(p, g):
                print(f"mismatch at H={r.H} L={r.L}", file=sys.stderr)
                return EXIT_MISMATCH
            util.append(f"{analyze(res.trace, g, cfg.frequency_hz, cfg.power_mw, cfg.baseline).utilization:.6f}")
        extra = {"utilization": util}
    if cfg.format == "json":
        table = list(csv.DictReader(io.StringIO(sweep_csv(rows, extra))))
        _emit(json.dumps(table, indent=2) + "\n", args.out)
    else:
        _emit(sweep_csv(rows, extra), args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    if args.B < 1:
        raise UsageError(f"batch size must be >= 1, got {args.B}")
    res = bench(args.B, LAYER_PRESETS[args.layers], cfg.geometry, cfg.baseline,
                cfg.seed, cfg.frequency_hz, cfg.power_mw)
    summary = res.aggregate_json() + "\n"
    if cfg.format == "json":
        _emit(summary, args.out)
    else:
        _emit(res.to_csv(), args.out)
        if args.summary:
            Path(args.summary).write_text(summary)
        else:
            sys.stderr.write(summary)
    if not res.bit_exact:
        print("mismatch: at least one GEMM differs from the golden model", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def parse_operand(text: str) -> F16:
    s = text.strip()
    if s.lower().startswith("0x"):
        try:
            return F16(int(s, 16))
        except ValueError as exc:
            raise MalformedLiteral(f"bad hex pattern: {text!r}") from exc
    return f16_from_decimal(s)


def cmd_fp16_eval(args: argparse.Namespace) -> int:
    a, b, c = (parse_operand(t) for t in (args.a, args.b, args.c))
    r = f16_fma(a, b, c)
    if args.format == "json":
        print(json.dumps({"hex": r.hex(), "decimal": repr(float(r))}))
    else:
        print(f"{r.hex()} {float(r)!r}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit code 2 but route through UsageError
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--H", type=int)
    common.add_argument("--L", type=int)
    common.add_argument("--P", type=int)
    common.add_argument("--freq", type=float, help="clock frequency in Hz")
    common.add_argument("--power", type=float, help="power in mW")
    common.add_argument("--trace", choices=[v.value for v in Verbosity])
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--seed", type=int)
    common.add_argument("--stationarity", choices=[s.value for s in Stationarity])
    common.add_argument("--out", help="write the main output here instead of stdout")

    parser = _Parser(prog="mmsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="simulate one GEMM Z = X.W")
    run.add_argument("M", type=int)
    run.add_argument("N", type=int)
    run.add_argument("K", type=int)
    run.add_argument("--x", help="X operand file (RMAT or CSV)")
    run.add_argument("--w", help="W operand file (RMAT or CSV)")
    run.add_argument("--z-out", help="write the simulated Z here")
    run.add_argument("--trace-out", help="per-cycle trace CSV destination")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", parents=[common], help="area/ports table over H and L")
    sw.add_argument("--h-range", type=parse_int_list, default=[4], metavar="LIST")
    sw.add_argument("--l-range", type=parse_int_list, default=[8], metavar="LIST")
    sw.add_argument("--probe", type=int, nargs=3, metavar=("M", "N", "K"),
                    help="also measure utilization on this GEMM at every point")
    sw.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", parents=[common], help="autoencoder training step")
    b.add_argument("B", type=int)
    b.add_argument("--layers", choices=sorted(LAYER_PRESETS), default="mlperf")
    b.add_argument("--summary", help="aggregate JSON destination (csv format only)")
    b.set_defaults(func=cmd_bench)

    fp = sub.add_parser("fp16", help="binary16 helpers")
    fp_sub = fp.add_subparsers(dest="fp16_command", required=True, parser_class=_Parser)
    ev = fp_sub.add_parser("eval", help="fused a*b+c; operands as decimals or 0x patterns")
    ev.add_argument("a")
    ev.add_argument("b")
    ev.add_argument("c")
    ev.add_argument("--format", choices=["text", "json"], default="text")
    ev.set_defaults(func=cmd_fp16_eval)
    return parser


def _protect_operands(argv: list[str]) -> list[str]:
    """Let ``fp16 eval`` take operands such as ``-inf`` or ``-0x3C00``."""
    if argv[:2] != ["fp16", "eval"] or "--" in argv:
        return argv
    opts, operands, rest = [], [], iter(argv[2:])
    for tok in rest:
        if tok.startswith("--") or tok in ("-h",):
            opts.append(tok)
            if tok == "--format":
                opts.append(next(rest, ""))
        else:
            operands.append(tok)
    return argv[:2] + opts + ["--"] + operands


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _protect_operands(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
        if args.command == "bench" and args.format is None:
            args.format = "csv"
        return args.func(args)
    except (UsageError, InvalidGeometry, DimensionError, MalformedLiteral, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
