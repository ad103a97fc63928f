"""Command-line front end.

Subcommands::

    sweep             sum rate of several schemes over an SNR grid
    tradeoff          one sweep per (K, L) pair
    solve-one         solve a single quantization-aware instance
    quantizer-design  optimal Gaussian step sizes

Exit status: 0 success, 2 usage error, 3 solver failure or unmet
certification, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .evaluation import SCHEMES, RateReport, SweepConfig, run_sweep
from .model import RngSeed, SystemDims, SystemInstance, generate_channel
from .precoders import quantizer_for
from .qap_solver import SolverConfig, Status, build_real_program, dumps_solution
from .qap_solver.precoder import quantization_aware_precoder
from .quantizer import GaussianSource, optimize_step_size

__all__ = ["CliConfig", "UsageError", "main", "parse_and_validate", "parse_snr_grid", "run"]

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

DEFAULT_NODE_LIMIT = 1000

PRESETS = {
    "fig2-desk": {
        "subcommand": "sweep", "M": 8, "K": 2, "levels": 8, "snr_db": "-10:5:30",
        "trials": 200, "seed": 0, "schemes": ",".join(SCHEMES),
    },
    "fig3-desk": {
        "subcommand": "tradeoff", "M": 8, "pairs": "1x8,2x4,4x2", "snr_db": "-10:5:30",
        "trials": 200, "seed": 0, "schemes": "unaware-wf,unaware-mrt,infinite-wf",
    },
}

FALLBACKS = {"M": 8, "K": 2, "levels": 8, "snr_db": "-10:5:30", "trials": 200, "seed": 0,
             "schemes": ",".join(SCHEMES), "pairs": "1x8,2x4,4x2"}


class UsageError(ValueError):
    """Invalid or inconsistent command-line input."""


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    sweeps: tuple
    out: Path | None
    fmt: str
    timestamp: bool
    dump: Path | None = None
    trial: int = 0
    power: float | None = None
    variance: float = 1.0


def parse_snr_grid(text: str) -> tuple:
    """``"a:step:b"`` (inclusive), a comma list, or a single value, in dB."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise UsageError(f"--snr-db: expected start:step:stop, got {text!r}")
            start, step, stop = parts
            if step == 0 or (stop - start) / step < 0:
                raise UsageError(f"--snr-db: step {step:g} does not reach {stop:g} from {start:g}")
            count = math.floor((stop - start) / step + 1e-9) + 1
            return tuple(round(start + i * step, 10) for i in range(count))
        values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"--snr-db: cannot parse {text!r}") from None
    if not values:
        raise UsageError("--snr-db: empty SNR grid")
    if not all(math.isfinite(v) for v in values):
        raise UsageError("--snr-db: values must be finite")
    return values


def _parse_pairs(text: str) -> tuple:
    pairs = []
    for item in text.split(","):
        try:
            k, l = item.lower().split("x")
            pairs.append((int(k), int(l)))
        except ValueError:
            raise UsageError(f"--pairs: expected KxL items such as 2x4, got {item!r}") from None
    return tuple(pairs)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("system")
    g.add_argument("-M", "--antennas", dest="M", type=int, help="BS antennas (default 8)")
    g.add_argument("-K", "--users", dest="K", type=int, help="single-antenna users (default 2)")
    g.add_argument("-L", "--levels", dest="levels", type=int,
                   help="quantizer levels per real dimension (default 8)")
    g.add_argument("--snr-db", help="start:step:stop or comma list (default -10:5:30)")
    g.add_argument("--power", type=float,
                   help="transmit power q; only used when no SNR is given (N0 = 1)")
    g = common.add_argument_group("experiment")
    g.add_argument("--trials", type=int, help="Monte Carlo channels (default 200)")
    g.add_argument("--seed", type=int, help="base seed (default 0)")
    g.add_argument("--schemes", help=f"comma list from {','.join(SCHEMES)}")
    g.add_argument("--preset", choices=sorted(PRESETS), help="documented experiment recipe")
    g.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    g = common.add_argument_group("solver")
    g.add_argument("--gap-tol", type=float, default=1e-9, help="absolute optimality gap")
    g.add_argument("--time-limit", type=float,
                   help="seconds per solve; results then depend on machine speed")
    g.add_argument("--node-limit", type=int, default=None,
                   help=f"nodes per solve (default {DEFAULT_NODE_LIMIT} for sweeps, "
                        "unlimited for solve-one; 0 = unlimited)")
    g = common.add_argument_group("output")
    g.add_argument("--out", help="output file ('-' or omitted: stdout)")
    g.add_argument("--format", choices=("csv", "json"), help="default: from --out suffix, else csv")
    g.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header")

    parser = argparse.ArgumentParser(prog="qaprecoding", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", metavar="command")
    sub.add_parser("sweep", parents=[common], help="SNR sweep of several schemes")
    p = sub.add_parser("tradeoff", parents=[common], help="one sweep per (K, L) pair")
    p.add_argument("--pairs", help="comma list of KxL, e.g. 1x8,2x4,4x2")
    p = sub.add_parser("solve-one", parents=[common], help="solve one aware instance")
    p.add_argument("--trial", type=int, default=0, help="channel index under --seed")
    p.add_argument("--dump", help="write the instance and solution as JSON")
    p = sub.add_parser("quantizer-design", parents=[common], help="optimal step sizes")
    p.add_argument("--variance", type=float, default=1.0, help="source variance per real dim")
    return parser


def _aware_feasible(K: int, L: int) -> bool:
    # even L: the smallest lattice power is 2MK (delta/2)^2 = K q (delta_unit/2)^2
    if L % 2:
        return True
    return K * (optimize_step_size(L)[0] / 2) ** 2 <= 1.0


def parse_and_validate(argv) -> CliConfig:
    """Parse ``argv`` into a fully validated :class:`CliConfig`.

    Raises
    ------
    UsageError
        With a message naming the offending flag.
    """
    parser = _build_parser()
    # let negative grids such as "-10:5:30" through as values
    args, rest = [], list(argv)
    while rest:
        arg = rest.pop(0)
        if arg == "--snr-db" and rest and rest[0].startswith("-"):
            arg = f"--snr-db={rest.pop(0)}"
        args.append(arg)
    try:
        ns = parser.parse_args(args)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid command line") from None
    if ns.subcommand is None:
        raise UsageError("missing command (sweep, tradeoff, solve-one, quantizer-design)")
    values = dict(vars(ns))
    if ns.preset:
        preset = PRESETS[ns.preset]
        if ns.subcommand != preset["subcommand"]:
            raise UsageError(f"--preset {ns.preset} belongs to the "
                             f"'{preset['subcommand']}' command")
        for key, value in preset.items():
            if values.get(key) is None:
                values[key] = value
    for key, value in FALLBACKS.items():
        if values.get(key) is None:
            values[key] = value

    for flag, key, low in (("--antennas", "M", 1), ("--users", "K", 1), ("--levels", "levels", 2),
                           ("--trials", "trials", 1), ("--threads", "threads", 1)):
        if values[key] < low:
            raise UsageError(f"{flag} must be >= {low}, got {values[key]}")
    if not 0 <= values["seed"] < 2**63:
        raise UsageError(f"--seed must be a non-negative integer, got {values['seed']}")
    if not (values["gap_tol"] > 0):
        raise UsageError(f"--gap-tol must be positive, got {values['gap_tol']}")
    if values["time_limit"] is not None and not values["time_limit"] > 0:
        raise UsageError(f"--time-limit must be positive, got {values['time_limit']}")
    if values["node_limit"] is not None and values["node_limit"] < 0:
        raise UsageError(f"--node-limit must be >= 0, got {values['node_limit']}")
    if values["power"] is not None and not (math.isfinite(values["power"]) and values["power"] > 0):
        raise UsageError(f"--power must be positive, got {values['power']}")

    schemes = tuple(s.strip() for s in values["schemes"].split(",") if s.strip())
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise UsageError(f"--schemes: unknown {bad}; choose from {','.join(SCHEMES)}")

    sub = ns.subcommand
    snr_given = ns.snr_db is not None or (ns.preset and "snr_db" in PRESETS[ns.preset])
    if sub == "solve-one" and values["power"] is not None and not snr_given:
        snr = (10 * math.log10(values["power"]),)
    else:
        snr = parse_snr_grid(values["snr_db"])
    if sub == "solve-one" and len(snr) != 1:
        raise UsageError("--snr-db: solve-one takes a single SNR value")

    node_limit = values["node_limit"]
    if node_limit is None:
        node_limit = None if sub == "solve-one" else DEFAULT_NODE_LIMIT
    elif node_limit == 0:
        node_limit = None
    solver = SolverConfig(gap_tolerance=values["gap_tol"], time_limit=values["time_limit"],
                          node_limit=node_limit, record_trace=sub == "solve-one")

    if sub == "tradeoff":
        pairs = _parse_pairs(values["pairs"])
    else:
        pairs = ((values["K"], values["levels"]),)
    sweeps = []
    for K, L in pairs:
        if K < 1:
            raise UsageError(f"users must be >= 1, got K={K}")
        if L < 2:
            raise UsageError(f"levels must be >= 2, got L={L}")
        if sub in ("sweep", "tradeoff", "solve-one") and (
                sub == "solve-one" or "aware-wf-beta" in schemes) and not _aware_feasible(K, L):
            raise UsageError(f"aware-wf-beta with K={K}, L={L}: every lattice precoder exceeds "
                             "the power budget; drop the scheme or use more levels")
        sweeps.append(SweepConfig(M=values["M"], K=K, levels=L, snr_db=snr,
                                  trials=values["trials"], seed=values["seed"], schemes=schemes,
                                  solver=solver, workers=values["threads"]))

    if sub == "quantizer-design" and not (values["variance"] > 0):
        raise UsageError(f"--variance must be positive, got {values['variance']}")

    out = None if ns.out in (None, "-") else Path(ns.out)
    fmt = ns.format or ("json" if out is not None and out.suffix.lower() == ".json" else "csv")
    dump = Path(ns.dump) if getattr(ns, "dump", None) else None
    if sub == "tradeoff" and out is None and len(sweeps) > 1:
        raise UsageError("--out: tradeoff writes one file per (K, L) and needs an output path")
    return CliConfig(sub, tuple(sweeps), out, fmt, not ns.no_timestamp, dump,
                     getattr(ns, "trial", 0), values["power"], getattr(ns, "variance", 1.0))


def _header(cfg: CliConfig) -> str:
    if not cfg.timestamp:
        return ""
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return f"# generated {stamp}\n" if cfg.fmt == "csv" else ""


def _render(cfg: CliConfig, report: RateReport) -> str:
    if cfg.fmt == "json":
        doc = json.loads(report.to_json())
        if cfg.timestamp:
            doc = {"generated": datetime.now(timezone.utc).isoformat(timespec="seconds"), **doc}
        return json.dumps(doc, indent=2) + "\n"
    return _header(cfg) + report.to_csv()


def _pair_path(out: Path, K: int, L: int) -> Path:
    return out.with_name(f"{out.stem}_K{K}_L{L}{out.suffix}")


def _check_writable(path: Path):
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OSError(f"output directory {parent} does not exist")
    if not os.access(parent, os.W_OK):
        raise OSError(f"output directory {parent} is not writable")


def _write_atomic(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    parent = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _summarize(report: RateReport):
    for r in report.rows:
        print(f"K={r.K} L={r.L} {r.scheme:<14} snr={r.snr_db:>6g} dB  "
              f"rate={r.mean_sumrate:.4f} se={r.std_err:.4f} trials={r.trials} "
              f"failures={r.solver_failures} limited={r.solver_limited}", file=sys.stderr)


def run(cfg: CliConfig) -> int:
    """Execute a validated configuration and return the exit status."""
    targets = []
    if cfg.subcommand == "tradeoff" and cfg.out is not None:
        targets = [_pair_path(cfg.out, s.K, s.levels) for s in cfg.sweeps]
    elif cfg.out is not None:
        targets = [cfg.out]
    if cfg.dump is not None:
        targets.append(cfg.dump)
    for t in targets:
        _check_writable(t)

    if cfg.subcommand == "quantizer-design":
        return _run_quantizer_design(cfg)
    if cfg.subcommand == "solve-one":
        return _run_solve_one(cfg)

    status = EXIT_OK
    for i, sweep in enumerate(cfg.sweeps):
        report = run_sweep(sweep)
        _summarize(report)
        path = targets[i] if cfg.out is not None else None
        _write_atomic(path, _render(cfg, report))
        if any(r.solver_failures for r in report.rows):
            status = EXIT_SOLVER
    return status


def _run_quantizer_design(cfg: CliConfig) -> int:
    L = cfg.sweeps[0].levels
    source = GaussianSource(cfg.variance)
    delta, dist = optimize_step_size(L, source)
    rows = [{"L": L, "variance": cfg.variance, "delta": delta, "distortion": dist,
             "sqnr_db": 10 * math.log10(cfg.variance / dist)}]
    if cfg.fmt == "json":
        text = json.dumps({"quantizers": rows}, indent=2) + "\n"
    else:
        text = _header(cfg) + "L,variance,delta,distortion,sqnr_db\n" + "".join(
            f"{r['L']},{r['variance']:.10g},{r['delta']:.10g},{r['distortion']:.10g},"
            f"{r['sqnr_db']:.10g}\n" for r in rows)
    print(f"L={L} delta={delta:.6f} distortion={dist:.6g}", file=sys.stderr)
    _write_atomic(cfg.out, text)
    return EXIT_OK


def _run_solve_one(cfg: CliConfig) -> int:
    sweep = cfg.sweeps[0]
    H = generate_channel(SystemDims(sweep.M, sweep.K), sweep.gamma, RngSeed(sweep.seed, cfg.trial))
    inst = SystemInstance.from_snr_db(H, sweep.snr_db[0], N0=sweep.N0, gamma=sweep.gamma)
    spec = quantizer_for(inst, sweep.levels)
    try:
        P, beta, result = quantization_aware_precoder(inst, spec, sweep.solver)
    except RuntimeError as exc:
        print(f"solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"status={result.status} objective={result.objective:.12g} "
          f"lower_bound={result.lower_bound:.12g} nodes={result.nodes_explored} "
          f"time={result.wall_time:.3f}s", file=sys.stderr)
    prog = build_real_program(inst, beta, spec)
    text = dumps_solution(prog, result, inst, beta)
    if cfg.dump is not None:
        _write_atomic(cfg.dump, text)
    if cfg.out is not None or cfg.dump is None:
        _write_atomic(cfg.out, text)
    return EXIT_OK if result.status is Status.OPTIMAL else EXIT_SOLVER


def main(argv=None) -> int:
    try:
        cfg = parse_and_validate(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"qaprecoding: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except OSError as exc:
        print(f"qaprecoding: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
