"""
Stair distributions and error-maximizing binnings
==================================================

A stair distribution is flat on a handful of contiguous regions of a huge
categorical space. Binning the space without ever mixing two regions keeps
the reference intact while collapsing the samples of a model onto a few
bins, where distances are cheap to estimate.
"""

import numpy as np

from stairtest import (StairSpec, binned_tv, empirical_pmf, optimize_binning, perturb,
                       random_binning, tv_distance_sparse)

# The default reference: 6 positions with 6 categories each, four regions,
# the last one carrying no mass.
p = StairSpec().build()
print(p)
print("region sizes ", p.sizes.tolist())
print("region masses", np.round(p.region_masses, 3).tolist())

# A model that moves 0.15 of mass between the two halves of the first region.
# Region masses are unchanged, so the coarsest binning cannot see the error.
q = perturb(p, 0.15, "within_region")
print("\ntrue TV(p, q) =", round(q.exact_tv(), 4))

samples = q.sample(1000, seed=0)
q_hat = empirical_pmf(samples)
print("empirical TV with 1000 samples =", round(tv_distance_sparse(p, q_hat), 4))

# Each extra bin cuts one region in two. The optimizer picks the regions
# and the cut; the baseline picks both at random.
print("\n k  optimized  random")
for k in range(p.s, 2 * p.s + 1):
    best = optimize_binning(p, samples, k)
    rand = random_binning(p, k, seed=k, samples=samples)
    print(f"{k:2d}  {binned_tv(best, p, samples):9.4f}  {binned_tv(rand, p, samples):6.4f}")

# The optimized binning for k = s + 1 separates the over-sampled half of the
# first region from the rest of it.
print("\n", optimize_binning(p, samples, p.s + 1))
