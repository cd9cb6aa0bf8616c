"""Evaluate Hardy's Z-function and check it against the high-precision oracle.

Run:  python demos/01_hardy_z.py
"""

import numpy as np

from zetaladder.zeta_engine import em_zeta_half, hardy_z, hardy_z_array

# a few heights, fast path against Euler-Maclaurin at 40 digits
for t in (100.0, 1000.0, 12345.678, 1e5):
    s = hardy_z(t)
    oracle = float(abs(em_zeta_half(t)))
    print(f"t={t:>10g}  Z={s.z:+.12f}  |zeta| oracle={oracle:.12f}  diff={abs(s.abs_zeta - oracle):.1e}")

# sign changes of Z on [10, 100] are the zeros of zeta on the critical line
t = np.linspace(10.0, 100.0, 20001)
z = hardy_z_array(t)
idx = np.flatnonzero(np.diff(np.sign(z)))
print(f"\n{idx.size} sign changes in [10, 100]; first few brackets:")
for i in idx[:5]:
    print(f"  ({t[i]:.4f}, {t[i + 1]:.4f})")
