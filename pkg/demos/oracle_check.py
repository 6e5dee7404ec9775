"""Spectral evolution against a plain Crank-Nicolson grid.

The two methods share nothing but the potential: one sums generalized
eigenfunctions with exact phases, the other steps a finite-difference
Hamiltonian in a box. The box is made large enough that nothing reflected
off its walls reaches the observation window before the last time.

The initial state is the Gamow function with a smooth cut-off, since a
sharp cut puts weight at wavenumbers no grid resolves. Halving h and dt
should quarter the difference.

    python demos/oracle_check.py
"""

import numpy as np

from reslab import oracle
from reslab import spectral as sp
from reslab.potential import make_double_well
from reslab.resonance import find_resonances, gamow_from_resonance, smooth_truncate

V = make_double_well(1.2, 0.3, 15.0)
r = find_resonances(V, (0.3, 4.0), 0.5)[0]
psi = smooth_truncate(gamow_from_resonance(V, r), 1.2)
print(f"resonance: E = {r.E:.4f}, Gamma = {r.Gamma:.4f}")

c = sp.forward_transform(psi, V, resonances=[r], tol=1e-8, recon_tol=1e-5, raise_on_defect=False)
t0, t1 = sp.exponential_window(r.E, r.Gamma)
ts = np.concatenate([[0.0], np.linspace(t0, t1, 4)])
W = V.L
spectral = sp.evolve(c, t_list=ts, x_grid=np.linspace(-W, W, 1201))

for h, dt in ((0.02, 0.01), (0.01, 0.005), (0.005, 0.0025)):
    K = oracle.effective_wavenumber(oracle.GridWave.from_callable(psi, 20.0, h, dt))
    B = oracle.required_box(W, K, t1)
    grid = oracle.propagate_crank_nicolson(oracle.GridWave.from_callable(psi, B, h, dt), V, ts, K=K)
    rows = oracle.compare(spectral, grid)
    diffs = "  ".join(f"{row.l2_diff:.2e}" for row in rows)
    print(f"h = {h:<6} dt = {dt:<7} box = {B:6.0f}   rel L2 diff at t = {ts.round(2).tolist()}:")
    print(f"    {diffs}")
