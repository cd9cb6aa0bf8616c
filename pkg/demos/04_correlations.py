"""Sixth- and fourth-order correlations between a window and its image.

Uses T = 1e4 so the whole script finishes in well under a minute; the
acceptance suite runs the same experiments up to T = 1e6.

Run:  python demos/04_correlations.py
"""

from zetaladder.cli_io import emit_plot_data
from zetaladder.correlation import (
    correlation4,
    correlation6,
    geometry_window,
    prediction_check,
    segment_geometry,
)
from zetaladder.ladder import build_ladder

model = build_ladder(2e4)

r6 = correlation6(model, 1e4)
print(f"U = 1e4^0.895 = {r6.spec.U:.2f}")
print(f"int Z^4(phi/2) Z^2     = {r6.lhs:.6e}   ratio to C0 U ln^5 T   = {r6.ratio:.4f}")
print(f"int Z^4(phi/2) Zhat^2  = {r6.intermediate_hat:.6e}   ratio to 2 C0 U ln^4 T = {r6.intermediate_ratio:.4f}")

p = prediction_check(model, 1e4, r6.spec.U, mean=r6.lhs / r6.spec.U)
print(f"\nmean-value point alpha = {p.alpha:.6f}")
print(f"|Z(alpha)| = {p.lhs_abs_z:.6f}, predicted {p.rhs_pred:.6f} (residual {p.residual:+.4f})")
print(f"alpha - phi(alpha)/2 = {p.shift:.2f} vs (1-c) pi(T) = {p.shift_reference:.2f}")

r4 = correlation4(model, 1e4)
print(f"\nfourth-order: U = {r4.spec.U:.2f}, ratio to U ln^2 T = {r4.ratio:.4f}")

g = segment_geometry(model, 1e4, geometry_window(1e4))
print(f"\nimage {g.image[0]:.2f}..{g.image[1]:.2f} of source {g.source[0]:.0f}..{g.source[1]:.2f}:"
      f" gap rho = {g.rho:.2f} > {g.rho_lower_bound:.2f}")

print("\nplot data:")
print(emit_plot_data([r6]), end="")
