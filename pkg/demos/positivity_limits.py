"""Where entry-wise conditions stop certifying positivity.

A symmetric matrix with nonnegative entries whose diagonal dominates every
entry of its row can still be indefinite once it is 3x3 or larger.  The
matrix H of the second derivative is always positive definite, but the
simple per-crossing lower bound built from those conditions can fail.

Run: python demos/positivity_limits.py
"""

import math

import numpy as np

from shearlab import derivatives as Dv
from shearlab import hessian as H
from shearlab import kernel as K
from shearlab import shear as S

a = H.SymMatrix([[1.0, 0.9, 0.0], [0.9, 1.0, 0.9], [0.0, 0.9, 1.0]])
cert = H.gauss_positivity(a)
print("3x3 matrix meeting the entry-wise conditions")
print(f"  verdict {cert.verdict}, pivots {np.round(cert.pivots, 4).tolist()}")
print(f"  x = (1, -1, 1): x^T A x = {a.quadratic([1, -1, 1]):+.3f}")

# six evenly spaced leaves perpendicular to the axis, masses alternating in sign
length = 2.0
positions = [k / 3 for k in range(6)]
leaves = [(K.Geodesic.of(-math.exp(s), math.exp(s)), (-1.0) ** k) for k, s in enumerate(positions)]
config = S.build_config(K.Isometry.diag(math.exp(length / 2)), leaves)
h = H.hessian_matrix(config)
print("\nsix perpendicular leaves, alternating masses")
print(f"  H certificate: {H.gauss_positivity(h).verdict}")
print(f"  second derivative {Dv.d2_length(config):.6f}")
print(f"  gap lower bound   {H.hessian_lower_bound(config):.6f}  (exceeds it)")

same_sign = config.with_weights(np.ones(6))
print("\nsame leaves, all masses +1")
print(f"  second derivative {Dv.d2_length(same_sign):.6f} >= bound {H.hessian_lower_bound(same_sign):.6f}")
