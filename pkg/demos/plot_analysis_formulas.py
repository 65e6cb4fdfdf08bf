"""
How often a single round suffices
=================================

Given n_e uniformly placed errors, the round succeeds exactly when the row
and column graph is a forest. Counting forests of the complete bipartite
graph gives the probability exactly; Monte Carlo agrees.
"""

from rectfec.analysis import (
    expected_I_regime3,
    lambda_of_x,
    mc_conditional,
    prob_good_given_ne,
)

for n_e in range(0, 10):
    exact = prob_good_given_ne(3, 3, n_e, exact=True)
    mc = mc_conditional(3, 3, n_e, 4000, seed=n_e, statistic="prob-i-zero")
    print(f"n_e={n_e:2d}  exact {str(exact):>12s} = {float(exact):.4f}  mc {mc.estimate:.4f}")

###############################################################################
# With n_e about sqrt(x N) errors the mean request size settles near
# lambda(x); with many more errors one giant cluster forms and the mean
# follows n_e + 1 - E(R) - E(C).

print("lambda(0.25) =", lambda_of_x(0.25))
for n in (25, 50, 100):
    print(n, mc_conditional(n, n, round(0.5 * (n + 1)), 20000, seed=1).estimate)

print("giant cluster, n=m=30, n_e=127:", expected_I_regime3(30, 30, 127),
      mc_conditional(30, 30, 127, 5000, seed=2).estimate)
