"""
Spectral conditions behind the instability pipelines
=====================================================

L_omega has one negative eigenvalue on even functions and one on odd
functions; M_omega has phi in its kernel.  Each pipeline then checks the
conditions that an instability argument needs at one parameter point.
"""

from nls_stability.spectral import (
    critical_slope_pipeline, delta_sector_spectra, negative_slope_pipeline, odd_mode_pipeline,
)

spec = delta_sector_spectra(3.0, 1.0, -1.0, n_points=2001)
for name in ("L_even", "L_odd", "M_even"):
    rep = spec[name]
    print(f"{name:7s} lowest eigenvalues {rep.eigenvalues[:3].round(6)}  negatives {rep.n_negative}")

for run in (negative_slope_pipeline, odd_mode_pipeline, critical_slope_pipeline):
    res = run(n_points=2001)
    marks = ", ".join(f"{r.condition}:{'ok' if r.holds else 'FAIL'}" for r in res.reports)
    print(f"{res.name:15s} omega={res.omega:+.5f}  {marks}")
