"""axivort: a numerical lab for the swirl-free axisymmetric vorticity equation.

Submodules
----------
specfun       the kernel K and the Bessel functions behind it
grid_fields   grids, fields, weighted norms, moments, snapshot files
semigroup     the linear semigroup S(t) and the Gaussian profiles G1, G2
biot_savart   stream function and velocity from the vorticity
solver        time integration of the nonlinear equation
asymptotics   expansion remainders and decay-rate fits
estimates     weighted L^p-L^q estimate harness and the Grönwall bound
harness       measurements behind the acceptance checks
cli           the ``axivort`` command

The package root imports nothing heavy, so ``axivort.cli`` can configure
BLAS threads before numpy starts.
"""

__version__ = "0.1.0"
