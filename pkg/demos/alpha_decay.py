"""Alpha decay of U-234 as a resonance of a square double well.

The nucleus is modelled by V = 436 on 1 < |x| < 3 (units of a0 = 7.2 fm and
|E1| = 0.1 MeV). The decaying state is a zero of a(k) just below the real
axis; its imaginary part is 35 orders of magnitude smaller than the real
part, so the root is polished at 50 digits.

    python demos/alpha_decay.py
"""

import mpmath

from reslab.pole import gamow_transform_closed_form, pole_prediction
from reslab.potential import make_double_well
from reslab.resonance import find_resonances, gamow_from_resonance
from reslab.units import UnitScheme

units = UnitScheme()
V = make_double_well(1.0, 2.0, 436.0)

# --- the root ---------------------------------------------------------------
r = find_resonances(V, (7.0, 8.0), 1e-3, digits=50)[0]
with mpmath.workdps(50):
    print("z       =", mpmath.nstr(r.z, 20))
print(f"channel = {r.channel}, Newton steps = {len(r.newton_steps)}")

p = units.momentum_si(r.z_complex)
print(f"hbar z  = {p.real:.5e} {p.imag:+.5e} i  kg m/s")
print(f"E       = {r.E * units.E1_MeV:.4f} MeV")
print(f"Gamma   = {units.to_si_rate(r.Gamma):.4e} 1/s  (measured 1.3361e-13)")

# --- Lorentzian transform of the truncated Gamow function -------------------
# Near Re z the transform of 1_l G is indistinguishable from c / (k - conj z).
G = gamow_from_resonance(V, r)
hw = r.half_width
print("\n  (k - Re z)/half-width   |transform|         |pole|             ratio")
with mpmath.workdps(50):
    for s in (-10, -3, -1, 0, 1, 3, 10):
        k = mpmath.mpf(r.z.real) + mpmath.mpf(hw) * s
        exact = float(abs(gamow_transform_closed_form(G, k)))
        eta = pole_prediction(G, [k])[0]
        print(f"  {s:+5d}                 {exact:.6e}      {eta:.6e}      {exact / eta:.12f}")
