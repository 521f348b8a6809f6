"""
Key rate bounds, leakage and information rates
==============================================

Evaluate the closed-form key rate and leakage, then the Monte Carlo
information rate of keeping the best observed configuration.
"""

import numpy as np

from riskeygen import rates
from riskeygen.keygen import ProtocolParams
from riskeygen.scene import ScenarioConfig

sc = ScenarioConfig()
p = ProtocolParams()
cov = rates.scenario_covariance(sc, p)

###########################################################################
# Key rate and leakage fall as Eve's correlation with Bob grows.

for rho in (0.0, 0.5, 0.9, 0.99):
    c = rates.scenario_covariance(sc.replace(rho=rho), p)
    print(f"rho={rho:4.2f}  skr_lb={rates.skr_lb(c, 2):7.3f}  leakage={rates.leakage(c):6.3f}")

###########################################################################
# Reconciliation discounts the raw rate by the capacity of a BSC.

print("effective key rate:", rates.scenario_eskr(sc, p))

###########################################################################
# Opportunistic selection among L configurations against the scaling law.

ls = (4, 16, 64)
ob = rates.ergodic_rate_ob_curve(np.random.default_rng(2), sc, 2, ls, 5000)
frob = sc.spatial_correlation().frob_sq
for l, est in zip(ls, ob):
    print(f"L={l:3d}  OB={est.mean:6.3f} +- {est.stderr:.3f}  scaling={rates.scaling_law_rate(l, sc.budget(), frob):6.3f}")
