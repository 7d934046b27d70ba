"""Desk-scale checks of the asymptotic statements.

1. E[T] is linear in the threshold with slope 1/D0 and intercept A/D0.
2. The error probabilities scaled by e^b approach e^{B~} and e^{B}.

The second check is run with 100 * e^b trials (about 80 error events at
b = 8, so ~11% noise) and again with 10^4 * e^b, which resolves the limit
to about 1%. Takes around a minute.
"""
import math

from seqexp import ExponentialPair, GaussianPair, check_error_convergence, constants_series, fit_stopping_line

for pair in (GaussianPair(0.0, 1.0), ExponentialPair(1.0, 2.0)):
    ms = pair.moments()
    rc = constants_series(pair)
    fit = fit_stopping_line(pair, [10.0, 20.0, 40.0, 80.0], trials=20_000)
    print(pair)
    print(f"  E[T] line: slope {fit.slope:.4f} (1/D0 = {1 / ms.D0:.4f}), "
          f"intercept {fit.intercept:.3f} +- {fit.intercept_se:.3f} (A/D0 = {rc.A / ms.D0:.3f})")
    for factor in (100.0, 10_000.0):
        table = check_error_convergence(pair, [4.0, 6.0, 8.0], trial_factor=factor, constants=rc)
        print(f"  {int(factor)} * e^b trials:")
        for r in table.rows:
            print(f"    b={r.boundary:.0f}  P10 e^b = {r.scaled_p10.mean:.4f} +- {r.scaled_p10.stderr:.4f}"
                  f" (-> {math.exp(rc.B_tilde):.4f})   P01 e^b = {r.scaled_p01.mean:.4f} +- {r.scaled_p01.stderr:.4f}"
                  f" (-> {math.exp(rc.B):.4f})")
