"""Build a ladder and look at how far the image phi(t)/2 lags behind t.

The lag (the defect) should track (1 - c) pi(t), and the ladder slope
over a window should be close to one.

Run:  python demos/02_ladder.py     (first run builds and caches a 2e5 ladder)
"""

import math

from zetaladder.ladder import build_ladder, ladder_defect, ladder_phi, ladder_slope

model = build_ladder(2e5)

print("       t        phi(t)/2      defect   (1-c)pi(t)   ratio")
for t in (1e3, 1e4, 1e5, 2e5):
    p = ladder_phi(model, t)
    d = ladder_defect(model, t)
    print(f"{t:>8g}  {p.phi_half:>12.3f}  {d['defect']:>10.3f}  {d['reference']:>10.3f}  {d['ratio']:.4f}")

T = 1e5
U = T ** 0.875
s = ladder_slope(model, T, U)
print(f"\nslope on [1e5, 1e5 + {U:.0f}]: {s:.6f}"
      f"  (|slope-1| = {abs(s - 1):.4f}, ln ln T / ln T = {math.log(math.log(T)) / math.log(T):.4f})")
