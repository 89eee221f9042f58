"""
Bound states of the delta-potential NLS and the slope of d
==========================================================

The two-hump profile is sampled from its closed form and polished by Newton
on the grid.  Its action ``d(omega)`` changes convexity with the power:
convex for p <= 3, concave for p >= 5, and for p = 4 there is a single
inflection point omega*.
"""

import numpy as np

from nls_stability.dcurve import d2_identity, find_omega_star
from nls_stability.delta import b_omega, default_grid, profile

# a profile, its shift and the discrete residual
p, gamma, omega = 3.0, 1.0, -1.0
prof = profile(p, gamma, omega, default_grid(omega, 2001))
m = prof.model
print(f"b_omega = {b_omega(p, gamma, omega):.10f}")
print(f"Q = {m.charge(prof.field):.8f}  E = {m.energy(prof.field):.8f}  residual = {prof.residual:.2e}")

# sign of d'' along a sweep, for three powers
omegas = -np.geomspace(0.3, 8.0, 7)
for p in (2.0, 4.0, 6.0):
    signs = "".join("+" if d2_identity(p, 1.0, w, n_points=2001) > 0 else "-" for w in omegas)
    print(f"p = {p:g}: d'' signs from omega = -0.3 to -8: {signs}")

# the inflection point for p = 4
star = find_omega_star(4.0, 1.0, n_points=2001)
print(f"omega* = {star.omega_star:.6f}, d'''(omega*) = {star.d3_at_star:.4f}")
