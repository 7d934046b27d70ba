"""Second-order terms of the error exponents under both kinds of constraint.

Probabilistic constraint: the backoff G(lambda, eps)/sqrt(n) flips sign at
eps = 1/2. Expectation constraint: F(lambda) is affine in lambda, and flat
for Gaussian pairs because their LLR is symmetric under the two hypotheses.
"""
import numpy as np

from seqexp import (
    ExponentialPair,
    GaussianPair,
    constants_series,
    second_order_expectation,
    second_order_probabilistic,
)

pair = ExponentialPair(1.0, 2.0)
ms = pair.moments()
print("probabilistic constraint, Exponential(1, 2)")
print("  lambda   eps=0.05   eps=0.5   eps=0.9")
for lam in (0.0, 0.5, 1.0):
    g = [second_order_probabilistic(ms, lam, e).second_order for e in (0.05, 0.5, 0.9)]
    print(f"  {lam:4.1f}   " + "  ".join(f"{v:+8.4f}" for v in g))

print("\nexpectation constraint, F(lambda)")
lams = np.linspace(0, 1, 5)
for pair in (GaussianPair(0.0, 0.5), GaussianPair(0.0, 2.0), ExponentialPair(0.3, 1.0), ExponentialPair(0.7, 1.0)):
    rc = constants_series(pair)
    f = [second_order_expectation(rc, lam).second_order for lam in lams]
    print(f"  {str(pair):60s}" + " ".join(f"{v:+.4f}" for v in f))
