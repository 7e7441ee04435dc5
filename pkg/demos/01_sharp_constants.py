"""
Sharp constants for the tree maximal operator
=============================================

The p-th moment of the maximal function M phi is controlled by the mean
f and the p-th moment F of phi alone, and the control is exact:

    sup { integral of (M phi)^p : mean f, p-moment F } = F * omega_p(f^p/F)^p

where omega_p inverts the polynomial H_p(z) = -(p-1) z^p + p z^{p-1} on
[1, p/(p-1)].  This script walks the special-function layer underneath
that formula.
"""

import numpy as np

from treebellman import BellmanQuery, bellman_two_var, h_poly, omega_p, u_func

# H_p is strictly decreasing from H_p(1) = 1 down to H_p(p/(p-1)) = 0, so
# its inverse takes the moment ratio x = f^p/F in [0, 1] to a growth
# factor in [1, p/(p-1)].
for p in (1.5, 2.0, 3.0):
    q = p / (p - 1.0)
    print(f"p = {p}: H_p(1) = {h_poly(1.0, p):.1f},  H_p(q) = {h_poly(q, p):.1f},  q = {q:.4f}")

# at p = 2 the inverse is elementary: omega_2(x) = 1 + sqrt(1 - x)
x = np.linspace(0.0, 1.0, 5)
print("\n  x       omega_2(x)   1+sqrt(1-x)")
for xi, wi in zip(x, omega_p(x, 2.0)):
    print(f"  {xi:4.2f}    {wi:.12f}    {1 + np.sqrt(1 - xi):.12f}")

# the endpoint x -> 0 is the fully unconstrained regime: omega_p(0)^p is
# the sharp constant of the L^p maximal inequality (Doob's (p/(p-1))^p)
print("\nDoob constants omega_p(0)^p:")
for p in (1.5, 2.0, 3.0, 5.0):
    print(f"  p = {p}:  {omega_p(0.0, p) ** p:.6f}   vs  (p/(p-1))^p = {(p / (p - 1)) ** p:.6f}")

# u(x) = omega_p(x)^p / x interpolates between the two regimes: u(1) = 1
# (constant functions) and u(x) ~ Doob/x as x -> 0.  It is the value of
# the Bellman function along the normalized diagonal F = f^p/x.
print("\n  x      u(x, p=2)")
for xi in (1.0, 0.75, 0.5, 0.25, 0.1):
    print(f"  {xi:4.2f}   {u_func(xi, 2.0):10.6f}")

# the two-variable Bellman value itself, at the standard query
query = BellmanQuery(p=2.0, f=1.0, F=2.0)
print(f"\nB_2(f=1, F=2) = {bellman_two_var(query):.12f}  (= 3 + 2 sqrt(2))")
