"""
A two-component system with a bifurcating branch
================================================

For 0 < gamma < 1 the bound state (alpha phi, beta phi) is built from the
scalar ground state.  Rotating the components by two fixed 2x2 matrices
splits the linearisation into scalar operators L_a, whose signs decide the
instability conditions.  At gamma = 1 the branch meets (0, phi) and the
kernel doubles.
"""

from nls_stability.system import (
    check_instability_conditions, classify_La, coefficients, operators_RI, semitrivial_degeneracy,
)

for g in (0.25, 0.5, 0.75, 0.99):
    c = coefficients(g)
    print(f"gamma={g:4.2f}  alpha={c.alpha:.6f}  beta={c.beta:.6f}  "
          f"(2-gamma)beta={c.a_real:.4f}  (1-2gamma)beta={c.a_imag:+.4f}")

r = operators_RI(0.5, -1.0, 1)
print(f"diagonalisation residuals: {r.residual_R:.1e}, {r.residual_I:.1e}")

for a in (0.5, 1.0, 1.5, 2.0):
    cl = classify_La(-1.0, 1, a)
    print(f"L_{a:g}: {cl.case:24s} lowest {cl.spectrum.eigenvalues[:2].round(6)}")

for rep in check_instability_conditions(0.5, -1.0, 1):
    print(f"{rep.condition:10s} {'holds' if rep.holds else 'fails'}")
print("gamma = 1 kernel dimension:", semitrivial_degeneracy(-1.0, 1)[0].scalars["kernel_dim_est"])
