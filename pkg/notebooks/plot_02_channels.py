"""
Sampling block-fading channels through the surface
==================================================

Draw channel blocks, apply random phase configurations and compare the
aggregate gain with the co-phased upper bound.
"""

import numpy as np

from riskeygen.channels import aggregate, aligned_magnitude, draw_block, random_phase_matrix
from riskeygen.scene import ScenarioConfig

rng = np.random.default_rng(0)
sc = ScenarioConfig()
budget, corr = sc.budget(), sc.spatial_correlation()

###########################################################################
# One block, many random configurations. Each configuration gives a fresh
# end-to-end coefficient even though the propagation channels are frozen.

blk = draw_block(rng, budget, corr, size=1)
phases = random_phase_matrix(rng, corr.n, size=1000)
g = aggregate(np.repeat(blk.h_ab, 1000), np.repeat(blk.h_ar, 1000, axis=0), phases, np.repeat(blk.h_rb, 1000, axis=0))
print("spread of |g| over configurations:", np.percentile(np.abs(g), [5, 50, 95]))
print("co-phased bound:", aligned_magnitude(blk)[0])

###########################################################################
# Averaged over blocks and phases, the aggregate power is the direct power
# plus N times the cascaded power.

n = 20_000
blk = draw_block(rng, budget, corr, size=n)
g = aggregate(blk.h_ab, blk.h_ar, random_phase_matrix(rng, corr.n, size=n), blk.h_rb)
print("E|g|^2 / expected:", np.mean(np.abs(g) ** 2) / (budget.beta_ab + budget.beta_ar * budget.beta_rb * corr.n))
