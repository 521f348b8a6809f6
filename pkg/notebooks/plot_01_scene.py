"""
Geometry, path loss and RIS correlation
=======================================

Build the default scenario, look at the link budget it implies, and see how
element spacing changes the correlation matrix of the surface.
"""

###########################################################################
# The default scenario places Alice at the origin, Bob 30 m away and a
# 100-element surface 3 m from Alice.

import numpy as np

from riskeygen.scene import RisLayout, ScenarioConfig, build_ris_correlation

sc = ScenarioConfig()
b = sc.budget()
for name in ("beta_ab", "beta_ae", "beta_ar", "beta_rb", "beta_re"):
    print(f"{name:8s} {10 * np.log10(getattr(b, name)):8.2f} dB")

###########################################################################
# Closely packed elements are correlated, so ||R||_F^2 exceeds N. At half
# a wavelength the sinc kernel vanishes along rows and columns and the
# norm drops towards N.

lam = sc.wavelength
for spacing in (0.1, 0.25, 0.5, 1.0):
    corr = build_ris_correlation(RisLayout(20, 5, spacing * lam), lam)
    print(f"d = {spacing:4.2f} lambda   ||R||_F^2 / N = {corr.frob_sq / corr.n:6.3f}")

###########################################################################
# Eve's correlation with Bob can be declared or derived from her distance.

near = sc.replace(rho_mode="derived")
print("derived rho for the default Eve:", round(near.rho_effective, 4))
