# coding: utf-8

# # Weighted decay estimates and the Gronwall bound
#
# Each estimate predicts a power of t for a weighted norm ratio.  We measure
# that power on the G1 and G2 profiles, then check the explicit Gronwall
# bound against simulated solutions of the integral inequality.

# In[1]:

import math

from axivort import harness as H
from axivort.estimates import GronwallParams, gronwall_bound, gronwall_series, gronwall_simulate


# Predicted and fitted exponents for the 12 cases of the acceptance suite.

# In[2]:

for case, datum, pred, slope, stderr, const in H.measure_estimates():
    print(f"{str(case):48s} {datum:4s} predicted {pred:+.3f} measured {slope:+.4f}")


# The series in the bound is a Mittag-Leffler function, so at beta = 1 it is
# exp(b t).

# In[3]:

print(gronwall_series(0.3, 1.0, 10.0), math.exp(3.0))


# One random tuple in detail: the simulated solution saturates below the bound.

# In[4]:

p = GronwallParams(a=1.0, b=0.3, beta=0.6, gamma=1.4)
print("bound", gronwall_bound(p))
for T in (25.0, 100.0):
    print(f"T = {T:g}: max f = {gronwall_simulate(p, T, 1000):.4f}")
