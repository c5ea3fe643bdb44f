# coding: utf-8

# # Long-time decay of a Gaussian vortex ring
#
# A small ring is run in self-similar variables.  The impulse I is conserved,
# the vorticity approaches I times the G1 Gaussian, and the first-order
# remainder decays faster than the vorticity itself.  A coarse grid keeps the
# run short; the acceptance suite repeats this on the 128 x 256 grid up to
# t = 50.

# In[1]:

from axivort import harness as H
from axivort.asymptotics import column, estimate_J_infinity, fit_decay_exponent
from axivort.grid_fields import Grid

grid = Grid(48, 96, 16.0, 16.0)
res = H.run_ring("gaussian_ring", grid, t_end=20.0)
print("failure:", res.failure)


# Impulse drift and the moment history.

# In[2]:

print(f"max relative impulse drift: {H.measure_impulse_drift(res):.2e}")
for r in res.records[::2]:
    print(f"t = {r.t:5.1f}  I = {r.I:.6f}  J = {r.J:+.5f}  |w|_1 = {r.l1:.4e}")


# Decay exponents fitted on [5, 20].

# In[3]:

for name in ("l1", "rem1_l1", "u_linf"):
    fit = fit_decay_exponent(column(res.records, name), (5.0, 20.0))
    print(f"{name:8s} slope {fit.slope:+.3f} +/- {fit.stderr:.3f}")


# The ring translates along the axis, so J keeps growing toward a finite
# limit instead of staying at its initial value.

# In[4]:

est = estimate_J_infinity(res.records)
print(f"J = {res.records[-1].J:.3f} at t = 20, extrapolated limit {est.J_inf:.3f}")
