"""
Generating keys from estimated phases
=====================================

Run the pilot exchange, quantize the phases and compare the three parties'
keys.
"""

import numpy as np

from riskeygen.keygen import ProtocolParams, empirical_kmr, match_prob_approx, run_keygen, symbol_mismatch
from riskeygen.rates import scenario_covariance
from riskeygen.scene import Position, ScenarioConfig

sc = ScenarioConfig(eve=Position(31.0, 0.0, 1.5), rho=0.9)
p = ProtocolParams(q_levels=4)
rec, keys = run_keygen(np.random.default_rng(1), sc, p)
print("keys per block:", keys.n_keys, " bits per key:", keys.key_bits)

###########################################################################
# Alice and Bob agree on most bits, while Eve sits well above them even at
# strong correlation.

print("KMR Alice-Bob:", empirical_kmr(keys.bits_alice, keys.bits_bob))
print("KMR Bob-Eve:  ", empirical_kmr(keys.bits_bob, keys.bits_eve))

###########################################################################
# The analytic symbol match probability tracks the simulation.

snr = scenario_covariance(sc, p).snr
print("symbol match, simulated:", 1 - symbol_mismatch(keys.levels_alice, keys.levels_bob))
print("symbol match, analytic: ", match_prob_approx(p.q_levels, snr))
