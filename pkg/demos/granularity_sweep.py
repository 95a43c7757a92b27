"""
Scoring models by the finest granularity they pass
===================================================

For k = s, ..., 2s the space is binned with the error-maximizing binning and
a bootstrap closeness test checks whether the binned model is within
epsilon_test of the binned reference. A model is scored by the last level it
passes.
"""

from dataclasses import replace

from stairtest import StairSpec, TestConfig, highest_granularity, make_suite

p = StairSpec().build()
suite = make_suite(p, (0.0, 0.1, 0.15, 0.2))

# The default test works on the squared l2 distance. Moving 0.2 of mass
# changes the binned squared l2 by at most 2 * 0.2**2 = 0.08, so with
# epsilon_test = 0.1 every model of the suite passes every level.
l2 = TestConfig(epsilon_test=0.1, delta=0.05, seed=1)
tv = replace(l2, distance="tv")

print("true TV   l2 score   tv score")
for i, q in enumerate(suite):
    samples = q.sample(10_000, seed=100 + i)
    a = highest_granularity(p, samples, l2, label=f"q{i + 1}")
    b = highest_granularity(p, samples, tv, label=f"q{i + 1}")
    print(f"{q.exact_tv():7.2f}   {a.highest_passed:8d}   {b.highest_passed:8d}")

# Half of the samples can choose the binning while the other half feeds the
# test, which removes the optimism of testing on the data that chose the bins.
q = suite[1]
res = highest_granularity(p, q.sample(10_000, seed=7), tv, holdout=True)
print(f"\nTV 0.1 model with holdout: highest_passed={res.highest_passed}")
for o in res.outcomes:
    print(f"  k={o.k}  statistic={o.statistic:.4f}  lower bound={o.lower_bound:.4f}")
