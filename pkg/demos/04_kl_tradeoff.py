"""Users versus resolution at a fixed fronthaul budget.

With K*L fixed, serving more users with coarser quantizers helps at low SNR
where noise dominates, while one user with a fine quantizer wins at high SNR
where quantization distortion dominates.
"""

from qaprecoding import SweepConfig, run_kl_tradeoff
from qaprecoding.evaluation import kl_configs

base = SweepConfig(M=8, snr_db=(0, 30), trials=60, schemes=("unaware-wf",))
for report in run_kl_tradeoff(kl_configs(base, [(1, 8), (2, 4), (4, 2)])):
    r0, r30 = (report.row("unaware-wf", s) for s in (0, 30))
    print(f"K={report.config.K} L={report.config.levels}:  "
          f"0 dB {r0.mean_sumrate:6.3f} +- {r0.std_err:.3f}   "
          f"30 dB {r30.mean_sumrate:6.3f} +- {r30.std_err:.3f}")
