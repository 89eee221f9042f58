"""
Why the coercivity condition cannot be dropped
==============================================

For the free Schroedinger flow on (0, pi) the bound state phi_2 is stable,
yet the form S'' has a negative direction phi_1 and stays negative on the
three-constraint set through i phi_1.  Adding the constraint against
J psi restores positivity.
"""

from nls_stability.linear import check_counterexample, perturbation_study

for rep in check_counterexample():
    vals = ", ".join(f"{k}={v:g}" for k, v in rep.scalars.items())
    print(f"{rep.condition:16s} {'holds' if rep.holds else 'fails':6s} {vals}")

study = perturbation_study(n_trials=50, size=1e-2, t_end=100.0)
print(f"perturbations of size 1e-2 stay within {study['max_tube_distance']:.4f} of the orbit")
