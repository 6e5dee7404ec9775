"""Three regimes of the survival probability of a truncated Gamow state.

A double well with lambda = 40 has a resonance with Gamma/E ~ 5e-4, narrow
enough for a clean exponential law on times one can actually integrate to.
The state 1_l G (the Gamow function cut to the inner well) is expanded in
generalized eigenfunctions and evolved exactly, so every regime comes from
the same numbers:

* t -> 0: P(t) is flat only for states in the domain of H; the sharp cut is not.
* 5/E < t < 0.5/Gamma: the mass in the well decays as exp(-2 Gamma t).
* t -> infinity: a power law takes over.

    python demos/decay_law.py
"""

import numpy as np

from reslab import spectral as sp
from reslab.pole import calibrate_pole, pole_window_mass
from reslab.potential import make_double_well
from reslab.resonance import find_resonances, gamow_from_resonance, truncate

V = make_double_well(1.0, 0.5, 40.0)
r = find_resonances(V, (0.5, 6.0), 0.5)[0]
G = gamow_from_resonance(V, r)
print(f"resonance: E = {r.E:.6f}, Gamma = {r.Gamma:.4e}, Gamma/E = {r.Gamma / r.E:.1e}")

psi = truncate(G, 1.0).function.normalized()
c = sp.forward_transform(psi, V, resonances=[r], tol=1e-3, raise_on_defect=False)
print(f"expansion: K_max = {c.K_max:.1f}, Parseval defect = {c.parseval_defect:.1e}, "
      f"{c.k_grid.size} k-nodes")

# --- exponential window -------------------------------------------------------
t0, t1 = sp.exponential_window(r.E, r.Gamma)
ts = np.linspace(t0, t1, 8)
res = sp.evolve(c, t_list=ts, x_window=V.L, x_grid=np.array([0.0]))
cal = calibrate_pole(c, G, t0)
pole = pole_window_mass(r, cal, G, ts)
print("\n      t        window mass     pole picture")
for t, m, p in zip(ts, res.window_mass, pole):
    print(f"  {t:8.2f}     {m:.6f}        {p:.6f}")
rate = sp.fit_decay_rate(ts, res.window_mass)
print(f"fitted rate / (2 Gamma) = {rate / (2 * r.Gamma):.5f}")

# --- short times --------------------------------------------------------------
# 1 - P ~ sqrt(t) for the sharp cut until h E reaches 1/K_max^2 scales, where
# the band-limited expansion turns smooth and the slope falls linearly with h.
print("\none-sided slope of P at t = 0, in units of E:")
for m in (1e-2, 1e-3, 1e-4):
    h = m / r.E
    P = np.abs(sp.survival_amplitudes(c, [0.0, h])) ** 2 / c.norm2**2
    print(f"  h = {m:.0e}/E   (P(h) - 1)/(h E) = {(P[1] - P[0]) / h / r.E:+.3e}")

# --- long times ---------------------------------------------------------------
# Eigenfunctions of a non-trivial potential vanish at k = 0, so the
# amplitude falls as t^(-3/2) here; t^(-1/2) belongs to the free particle.
Vw = make_double_well(1.0, 0.5, 20.0)
rw = find_resonances(Vw, (0.5, 3.0), 0.5)[0]
cw = sp.forward_transform(truncate(gamow_from_resonance(Vw, rw), 1.0).function.normalized(), Vw,
                          resonances=[rw], tol=1e-3, raise_on_defect=False)
tl = np.logspace(np.log10(3e3), np.log10(3e5), 7)
tail = sp.evolve(cw, t_list=tl, x_grid=np.array([0.0]), error_estimate="refine", rel_tol=0.25)
print(f"\nlambda = 20 well, Gamma = {rw.Gamma:.3e}: long-time amplitude")
for t, a in zip(tl, tail.survival_amplitude):
    print(f"  t = {t:9.0f}   |A| = {abs(a):.3e}")
print(f"log-log slope = {sp.loglog_slope(tl, tail.survival_amplitude):.3f}")
