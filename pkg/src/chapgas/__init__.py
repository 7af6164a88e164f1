"""Radially symmetric Euler laboratory for Chaplygin and polytropic gases.

Evolves the 2-D compressible Euler system under radial symmetry, the
quasilinear potential equation of the isentropic approximation, and the
weighted vector-field diagnostics used to compare the global smooth
Chaplygin flow against finite-time gradient blow-up of polytropic gas.
"""

__version__ = "0.1.0"
