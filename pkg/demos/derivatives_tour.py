"""Length derivatives of a sheared isometry, checked against two oracles.

Run: python demos/derivatives_tour.py
"""

import math

from shearlab import derivatives as Dv
from shearlab import kernel as K
from shearlab import oracles as O
from shearlab import shear as S

gamma = K.Isometry.diag(math.e)  # translation length 2 along 0 -> inf
leaves = [
    (K.Geodesic.of(-1, 1), 0.7),
    (K.Geodesic.of(-2, 1.5), -0.4),
    (K.Geodesic.of(2.5, -2.4), 0.3),
]
config = S.build_config(gamma, leaves)

print(f"length {config.length:.6f}, {config.n} crossings")
for p, cr in enumerate(config.crossings):
    print(f"  crossing {p}: arc position {cr.s:+.4f}, angle {math.degrees(cr.theta):7.3f} deg, mass {cr.weight:+.2f}")

print("\norder  closed form            finite differences     rel err")
for order in (1, 2, 3):
    exact = Dv.length_derivative(config, order)
    fd = O.length_derivative_fd(config, order)
    print(f"  {order}    {exact:+.15e}  {fd.value:+.15e}  {abs(exact - fd.value) / abs(exact):.1e}")

print(f"\nforward-mode dual number: {O.dual_derivative(config):+.15e}")

# one leaf meeting the axis at a right angle does not change the length to first order,
# but always lengthens it to second order
single = S.build_config(gamma, [(K.Geodesic.of(-1, 1), 1.0)])
print(f"perpendicular leaf: d1 = {Dv.d1_length(single):+.1e}, d2 = {Dv.d2_length(single):+.6f}")
