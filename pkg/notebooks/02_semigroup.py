# coding: utf-8

# # The linear semigroup and its two Gaussian profiles
#
# G1 carries unit impulse and G2 carries unit second moment J.  Both are
# self-similar under the semigroup, which gives an exact oracle for the
# discrete operator.

# In[1]:

import numpy as np

from axivort.grid_fields import Grid, ScalarField, weighted_lp_norm
from axivort.semigroup import apply_S, gaussian_term, profile_field
from axivort import harness as H

grid = Grid(64, 128, 16.0, 16.0)


# Evolve each profile from time 1 to time 1 + t and compare with the
# Gaussian term at that time.

# In[2]:

for kind in ("G1", "G2"):
    w1 = gaussian_term(kind, grid, 1.0)
    for t in (1.0, 3.0):
        out = apply_S(t, w1)
        exact = gaussian_term(kind, grid, 1.0 + t)
        err = weighted_lp_norm(ScalarField(grid, out.values - exact.values), 1) / weighted_lp_norm(exact, 1)
        print(f"{kind}, t = {t}: relative L1 error {err:.2e}")


# The moment identities on the default grid.

# In[3]:

for name, value in H.measure_moments().items():
    print(f"{name:8s} {value:+.2e}")


# Mass of the profiles decays in L1 at the predicted rates: t^-1 for the
# impulse-carrying term and t^-3/2 for the J-carrying one.

# In[4]:

for kind in ("G1", "G2"):
    ts = np.array([4.0, 8.0, 16.0])
    norms = [weighted_lp_norm(gaussian_term(kind, grid, t), 1) for t in ts]
    print(kind, "log-log slope:", np.polyfit(np.log(ts), np.log(norms), 1)[0])
