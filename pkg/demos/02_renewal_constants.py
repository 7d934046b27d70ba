"""Renewal constants from their series, checked against simulated overshoots.

For the exponential pair the H0 overshoot is memoryless, so A and B have
closed forms ((g1-g0)/g0 and log(g0/g1)); the series should reproduce them.
"""
import math

from seqexp import ExponentialPair, GaussianPair, constants_overshoot_mc, constants_series

for pair in (GaussianPair(0.0, 1.0), ExponentialPair(1.0, 2.0)):
    rc = constants_series(pair, tol=1e-10)
    mc = constants_overshoot_mc(pair, trials=100_000, seed=1)
    print(pair)
    for name in ("A", "A_tilde", "B", "B_tilde"):
        s = rc.details[name]
        m = mc.details[name]
        print(f"  {name:8s} series {s.value:+.10f} ({s.terms_used} terms, tail < {s.tail_bound:.1e})"
              f"   simulated {m.mean:+.4f} +- {m.stderr:.4f}")

print("\nexponential closed forms: A = 1, B = -log 2 =", -math.log(2))

# Near gamma0 = gamma1 the terms decay too slowly and the series gives up.
try:
    constants_series(ExponentialPair(0.99, 1.0), max_terms=10**5)
except ArithmeticError as exc:
    print("\nExponential(0.99, 1):", exc)
