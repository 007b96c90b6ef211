"""
Gauss-Legendre integration over an aperture
===========================================

Every surface integral in the package runs on a tensor-product
Gauss-Legendre grid. This script checks polynomial exactness and shows how
fast a smooth oscillatory integrand converges as the order grows.
"""

import numpy as np

from ddcmimo.quadrature import integrate_matrix_surface, legendre_rule, make_grid

# %%
# A rule with n nodes is exact for polynomials up to degree 2n - 1.
rule = legendre_rule(5)
print("nodes  ", np.round(rule.nodes, 6))
print("weights", np.round(rule.weights, 6))
for deg in (8, 9, 10):
    approx = np.dot(rule.weights, rule.nodes**deg)
    exact = 0.0 if deg % 2 else 2 / (deg + 1)
    print(f"x^{deg}: error {abs(approx - exact):.2e}")

# %%
# A plane-wave phase across a 0.5 m aperture at 2.4 GHz, integrated at
# increasing order. The analytic value is a product of two sinc terms.
kappa = 2 * np.pi / 0.1249
kx, kz = 0.4, 0.7
exact = 0.25 * np.sinc(kappa * kx * 0.25 / np.pi) * np.sinc(kappa * kz * 0.25 / np.pi)
for order in (2, 4, 6, 8, 10, 14):
    grid = make_grid(0.5, 0.5, order)
    val = integrate_matrix_surface(lambda x, z: np.exp(1j * kappa * (kx * x + kz * z)) * np.eye(1), grid)[0, 0]
    print(f"order {order:2d}: relative error {abs(val - exact) / abs(exact):.2e}")
