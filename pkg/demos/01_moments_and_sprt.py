"""LLR moments and a few sequential tests, run one at a time.

Shows the moment summary of two worked families, then runs single SPRTs with
a trace so the walk and its overshoot past the threshold can be inspected.
"""
import numpy as np

from seqexp import ExponentialPair, GaussianPair, Hypothesis, SprtConfig, run_sprt, wald_error_bounds

for pair in (GaussianPair(0.0, 1.0), ExponentialPair(1.0, 2.0)):
    ms = pair.moments()
    print(pair)
    print(f"  D0={ms.D0:.6f}  D1={ms.D1:.6f}  V0={ms.V0:.6f}  V1={ms.V1:.6f}")

# One test under each hypothesis with thresholds alpha=4, beta=5.
pair = GaussianPair(0.0, 1.0)
cfg = SprtConfig(alpha=4.0, beta=5.0, max_steps=10_000)
rng = np.random.default_rng(1)
for hyp in Hypothesis:
    out = run_sprt(pair, hyp, cfg, rng, trace=True)
    path = " ".join(f"{s:+.2f}" for s in out.trace)
    print(f"\ntrue {hyp.name}: decided {out.decision.name} after {out.stop_time} steps")
    print(f"  walk: {path}")
    print(f"  overshoot past the threshold: {out.overshoot:.3f}")

b10, b01 = wald_error_bounds(cfg)
print(f"\nWald bounds: P(decide H1 | H0) <= {b10:.4f}, P(decide H0 | H1) <= {b01:.4f}")
