"""Exact first homology of congruence subgroups of SL2(Z).

Computes H_1 of groups between Gamma_1(N) and Gamma_0(N) with
symmetric-power coefficients by exact integer linear algebra, builds
hyperbolic and parabolic cycle classes and double-coset Hecke
operators on them, and verifies that the p-ordinary part of H_1 is
spanned by hyperbolic cycles.
"""

__version__ = "0.1.0"
