"""Monte Carlo sum-rate comparison of precoding schemes over SNR sweeps.

Every trial draws one Rayleigh channel and reuses it for all SNR points and
schemes, so scheme differences are paired.  SNR is set by fixing
``gamma = N0 = 1`` and varying the transmit power ``q``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .model import RngSeed, SystemDims, SystemInstance, generate_channel
from .precoders import mrt_precoder, quantization_unaware_precoder, quantizer_for, wf_precoder
from .qap_solver import SolverConfig, Status, quantization_aware_precoder

__all__ = [
    "CSV_COLUMNS",
    "RateReport",
    "RateRow",
    "SCHEMES",
    "SweepConfig",
    "evaluate_schemes",
    "kl_configs",
    "run_kl_tradeoff",
    "run_sweep",
    "sum_rate",
]

SCHEMES = ("aware-wf-beta", "unaware-wf", "unaware-mrt", "infinite-wf", "infinite-mrt")

CSV_COLUMNS = ("scheme", "snr_db", "K", "L", "mean_sumrate", "std_err", "trials",
               "solver_failures", "mean_nodes", "solver_limited")


def sum_rate(inst: SystemInstance, P) -> float:
    """Sum of ``log2(1 + SINR_k)`` with inter-user interference treated as noise."""
    G = inst.H @ inst.check_precoder(P)
    power = np.abs(G) ** 2
    signal = np.diag(power)
    interference = power.sum(axis=1) - signal
    return float(np.sum(np.log2(1.0 + signal / (interference + inst.N0))))


@dataclass(frozen=True)
class SweepConfig:
    M: int = 8
    K: int = 2
    levels: int = 8
    snr_db: tuple = tuple(range(-10, 31, 5))
    trials: int = 200
    seed: int = 0
    gamma: float = 1.0
    N0: float = 1.0
    schemes: tuple = SCHEMES
    solver: SolverConfig = SolverConfig(node_limit=1000)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        SystemDims(self.M, self.K)
        if self.levels < 2:
            raise ValueError("levels must be >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snr_db:
            raise ValueError("the SNR grid is empty")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ValueError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class RateRow:
    scheme: str
    snr_db: float
    K: int
    L: int
    mean_sumrate: float
    std_err: float
    trials: int
    solver_failures: int
    mean_nodes: float
    solver_limited: int


@dataclass
class RateReport:
    config: SweepConfig
    rows: list = field(default_factory=list)

    def row(self, scheme: str, snr_db: float) -> RateRow:
        for r in self.rows:
            if r.scheme == scheme and r.snr_db == float(snr_db):
                return r
        raise KeyError((scheme, snr_db))

    def curve(self, scheme: str):
        """``(snr_db, mean, std_err)`` arrays of one scheme."""
        rows = [r for r in self.rows if r.scheme == scheme]
        return (np.array([r.snr_db for r in rows]), np.array([r.mean_sumrate for r in rows]),
                np.array([r.std_err for r in rows]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.scheme, _fmt(r.snr_db), r.K, r.L, _fmt(r.mean_sumrate),
                             _fmt(r.std_err), r.trials, r.solver_failures, _fmt(r.mean_nodes),
                             r.solver_limited])
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = asdict(self.config)
        doc = {"config": cfg, "rows": [asdict(r) for r in self.rows]}
        return json.dumps(doc, indent=2, default=_json_default, allow_nan=True) + "\n"


def _fmt(x: float) -> str:
    return "nan" if not math.isfinite(x) else f"{x:.10g}"


def _json_default(obj):
    if isinstance(obj, Status):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def evaluate_schemes(inst: SystemInstance, levels: int, schemes=SCHEMES,
                     solver: SolverConfig = SolverConfig()) -> dict:
    """Precoders of the requested schemes for one instance.

    Returns a dict ``scheme -> (P, info)``; ``info`` holds the solver result
    for the quantization-aware scheme and the exception for failed schemes
    (``P`` is None then).
    """
    spec = quantizer_for(inst, levels) if any(not s.startswith("infinite") for s in schemes) \
        else None
    cache = {}

    def wf():
        if "wf" not in cache:
            cache["wf"] = wf_precoder(inst)
        return cache["wf"]

    def mrt():
        if "mrt" not in cache:
            cache["mrt"] = mrt_precoder(inst)
        return cache["mrt"]

    out = {}
    for scheme in schemes:
        try:
            if scheme == "infinite-wf":
                out[scheme] = (wf(), None)
            elif scheme == "infinite-mrt":
                out[scheme] = (mrt(), None)
            elif scheme == "unaware-wf":
                out[scheme] = (quantization_unaware_precoder(inst, spec, wf()), None)
            elif scheme == "unaware-mrt":
                out[scheme] = (quantization_unaware_precoder(inst, spec, mrt()), None)
            elif scheme == "aware-wf-beta":
                P, _, result = quantization_aware_precoder(inst, spec, solver)
                out[scheme] = (P, result)
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
        except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
            out[scheme] = (None, exc)
    return out


def _run_trial(cfg: SweepConfig, trial: int, on_precoder):
    H = generate_channel(SystemDims(cfg.M, cfg.K), cfg.gamma, RngSeed(cfg.seed, trial))
    records = []
    for snr in cfg.snr_db:
        inst = SystemInstance.from_snr_db(H, snr, N0=cfg.N0, gamma=cfg.gamma)
        for scheme, (P, info) in evaluate_schemes(inst, cfg.levels, cfg.schemes,
                                                  cfg.solver).items():
            if on_precoder is not None and P is not None:
                on_precoder(scheme, snr, trial, inst, P)
            rate = sum_rate(inst, P) if P is not None else None
            nodes = info.nodes_explored if scheme == "aware-wf-beta" and P is not None else None
            limited = P is not None and nodes is not None and info.status is not Status.OPTIMAL
            records.append((snr, scheme, rate, nodes, limited))
    return records


def run_sweep(cfg: SweepConfig, on_precoder=None) -> RateReport:
    """Mean sum rate and standard error for every (scheme, SNR) of the sweep.

    Parameters
    ----------
    cfg : SweepConfig
    on_precoder : callable, optional
        Called as ``on_precoder(scheme, snr_db, trial, inst, P)`` for every
        precoder produced, e.g. to audit the power constraint.

    Notes
    -----
    Trials may run on ``cfg.workers`` threads; results are aggregated in
    trial order, so the report does not depend on the thread count.
    A scheme that fails on a trial is excluded from that trial's average
    and counted in ``solver_failures``.
    """
    if cfg.workers == 1:
        per_trial = [_run_trial(cfg, t, on_precoder) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            per_trial = list(pool.map(lambda t: _run_trial(cfg, t, on_precoder),
                                      range(cfg.trials)))

    report = RateReport(cfg)
    for scheme in cfg.schemes:
        for snr in cfg.snr_db:
            rates, nodes, failures, limited = [], [], 0, 0
            for records in per_trial:
                for s, sch, rate, n, lim in records:
                    if s != snr or sch != scheme:
                        continue
                    if rate is None:
                        failures += 1
                        continue
                    rates.append(rate)
                    if n is not None:
                        nodes.append(n)
                    limited += lim
            rates = np.array(rates)
            mean = float(rates.mean()) if rates.size else math.nan
            se = float(rates.std(ddof=1) / math.sqrt(rates.size)) if rates.size > 1 else math.nan
            report.rows.append(RateRow(
                scheme, snr, cfg.K, cfg.levels, mean, se, int(rates.size), failures,
                float(np.mean(nodes)) if nodes else 0.0, limited,
            ))
    return report


def run_kl_tradeoff(cfgs) -> list:
    """One report per configuration; all must share ``M``, the SNR grid and the trial count."""
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("no configurations given")
    ref = cfgs[0]
    for c in cfgs[1:]:
        if (c.M, c.snr_db, c.trials) != (ref.M, ref.snr_db, ref.trials):
            raise ValueError("trade-off configurations must share M, the SNR grid and trials")
    return [run_sweep(c) for c in cfgs]


def kl_configs(base: SweepConfig, pairs) -> list:
    """Copies of ``base`` with ``(K, L)`` replaced by each pair."""
    return [replace(base, K=K, levels=L) for K, L in pairs]
