# coding: utf-8

# # The heat kernel on axisymmetric fields
#
# The radial part of the heat semigroup acting on axisymmetric vorticity is
# built from the function K(tau) = (sqrt(pi)/tau) exp(-tau/2) I1(tau/2).
# This script checks our evaluation against direct quadrature and looks at
# its two regimes: K(0) = sqrt(pi)/4 and K(tau) ~ tau^(-3/2) for large tau.

# In[1]:

import numpy as np

from axivort.specfun import kernel_k, kernel_k_deriv, kernel_k_quadrature


# Compare the closed form with adaptive quadrature of its integral
# representation on a log-spaced set of arguments.

# In[2]:

tau = np.logspace(-4, 4, 17)
closed = kernel_k(tau)
quad = np.array([kernel_k_quadrature(t) for t in tau])
print("max relative gap:", np.max(np.abs(closed - quad) / np.abs(quad)))


# The two limits.

# In[3]:

print("K(0) =", kernel_k(0.0), " sqrt(pi)/4 =", np.sqrt(np.pi) / 4)
for t in (1e2, 1e3, 1e4):
    print(f"tau = {t:g}: tau^1.5 K(tau) = {t**1.5 * kernel_k(t):.6f}")


# The weighted derivatives (1 + tau)^(3/2 + i) |K^(i)(tau)| stay bounded,
# which is the property the semigroup estimates rest on.

# In[4]:

grid = np.concatenate([[0.0], np.logspace(-4, 4, 400)])
for i in range(4):
    sup = np.max((1 + grid) ** (1.5 + i) * np.abs(kernel_k_deriv(i, grid)))
    print(f"i = {i}: sup = {sup:.4f}")
