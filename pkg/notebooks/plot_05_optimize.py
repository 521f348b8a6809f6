"""
Choosing the key-generation time, switching interval and alphabet
=================================================================

Search the protocol parameters that maximize the secrecy rate.
"""

from riskeygen.optimize import optimize_all, secrecy_objective
from riskeygen.scene import ScenarioConfig

sc = ScenarioConfig()
res = optimize_all(sc)
print(f"T_k*={res.t_key_star} (closed form {res.t_key_star_closed})  T_s*={res.t_switch_star}  Q*={res.q_star}")
print(f"secrecy rate {res.secrecy_rate:.4f} bits/symbol")

###########################################################################
# The closed-form T_k drops the log-log term of the information rate and
# balances the undiscounted key term, so it lands below the scan.

for tk in (res.t_key_star_closed, res.t_key_star):
    print(f"T_k={tk}  R_S={secrecy_objective(sc, 1000, tk, 2, res.q_star):.4f}")

###########################################################################
# More power supports a larger alphabet.

for pw in (10, 15, 20, 25):
    r = optimize_all(sc.replace(tx_power_dbm=float(pw)))
    print(f"P={pw} dBm  Q*={r.q_star}  T_k*={r.t_key_star}  R_S={r.secrecy_rate:.3f}")
