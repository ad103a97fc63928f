"""One quantization-aware precoder, step by step.

Draws a Rayleigh channel, computes the Wiener filter precoder, quantizes it
naively (the unaware scheme), then solves the lattice-constrained MSE problem
by branch and bound (the aware scheme) and compares the results.
"""

import numpy as np

from qaprecoding import (
    RngSeed,
    SolverConfig,
    SystemDims,
    SystemInstance,
    beta_wf,
    generate_channel,
    mse_closed_form,
    quantization_aware_precoder,
    quantization_unaware_precoder,
    quantizer_for,
    sum_rate,
    wf_precoder,
)

H = generate_channel(SystemDims(M=4, K=2), rng=RngSeed(7))
inst = SystemInstance.from_snr_db(H, 15.0)
spec = quantizer_for(inst, 4)
print(f"q = {inst.q:.2f}, quantizer step = {spec.step:.4f}")

W = wf_precoder(inst)
U = quantization_unaware_precoder(inst, spec, W)
P, beta, res = quantization_aware_precoder(inst, spec, SolverConfig(record_trace=True))

print(f"solver: {res.status.value}, {res.nodes_explored} nodes, {res.wall_time:.3f} s")
print("incumbent improvements (node, objective):")
for node, value in res.incumbent_trace:
    print(f"  {node:6d}  {value:.6f}")

b = beta_wf(inst)
for name, X in (("infinite WF", W), ("unaware", U), ("aware", P)):
    print(f"{name:12s} power {np.linalg.norm(X) ** 2:8.3f}  "
          f"MSE {mse_closed_form(inst, X, b):.4f}  sum rate {sum_rate(inst, X):.3f}")
