"""A small sum-rate sweep.

Runs every scheme over an SNR grid with 40 paired trials and prints the
curves.  The aware scheme pulls ahead of the unaware one as SNR grows, and
MRT saturates early because it ignores inter-user interference.
Use the CLI preset ``fig2-desk`` for the full 200-trial version.
"""

from qaprecoding import SolverConfig, SweepConfig, run_sweep

cfg = SweepConfig(M=8, K=2, levels=8, snr_db=(-10, 0, 10, 20, 30), trials=40,
                  solver=SolverConfig(node_limit=500))
report = run_sweep(cfg)

print("scheme            " + "".join(f"{s:>9g}" for s in cfg.snr_db))
for scheme in cfg.schemes:
    _, mean, _ = report.curve(scheme)
    print(f"{scheme:16s}  " + "".join(f"{m:9.3f}" for m in mean))
